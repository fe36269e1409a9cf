"""Scenario generation and shipped example documents.

The sorting generator lays out a two-arm workcell on an abstract grid:
a shared table with colored objects, one drop container per arm, and a
collision table covering the central band where the arms' workspaces
overlap.  Geometry is synthetic; edge weights derive from grid distances.
"""

from __future__ import annotations

import json
import math
import random
from importlib import resources

MS_PER_UNIT = 140
EDGE_OVERHEAD_MS = 230
NEIGHBOR_RADIUS = 2.5
CONFLICT_RADIUS = 1.8
PICK_MS = 800
PLACE_MS = 500


def _weight(p, q) -> int:
    return max(1, int(round(math.dist(p, q) * MS_PER_UNIT)) + EDGE_OVERHEAD_MS)


def generate_sorting_scenario(n: int, conflict: float, seed: int) -> tuple[dict, dict]:
    """Workcell and task documents for sorting n colored objects with two
    arms; `conflict` in [0, 1] scales how many objects sit in the shared
    central band.  Deterministic in (n, conflict, seed)."""
    if n < 2 or n % 2 != 0:
        raise ValueError("object count must be even and >= 2")
    if not 0.0 <= conflict <= 1.0:
        raise ValueError("conflict level must be within [0, 1]")
    rng = random.Random(seed)

    labels = [f"{i:03d}" for i in range(1, n + 1)]
    colors = {lab: ("blue" if i % 2 == 0 else "red")
              for i, lab in enumerate(labels)}
    banded = set(rng.sample(labels, round(conflict * n)))

    pos = {}
    for lab in labels:
        if lab in banded:
            x = rng.uniform(-2.0, 2.0)
        elif colors[lab] == "blue":
            x = rng.uniform(-8.5, -3.0)
        else:
            x = rng.uniform(3.0, 8.5)
        y = rng.uniform(0.5, 6.0)
        pos[lab] = (round(x, 2), round(y, 2))

    anchors = {
        "left": {"home": (-7.0, 7.5), "drop": (-9.0, 0.5)},
        "right": {"home": (7.0, 7.5), "drop": (9.0, 0.5)},
    }

    roadmaps = {}
    for arm in ("left", "right"):
        prefix = arm[0].upper()
        nodes = [f"{prefix}_home", f"{prefix}_drop"] + \
            [f"{prefix}_obj_{lab}" for lab in labels]
        coords = {f"{prefix}_home": anchors[arm]["home"],
                  f"{prefix}_drop": anchors[arm]["drop"]}
        for lab in labels:
            coords[f"{prefix}_obj_{lab}"] = pos[lab]
        edges = [[f"{prefix}_home", f"{prefix}_drop",
                  _weight(anchors[arm]["home"], anchors[arm]["drop"])]]
        for lab in labels:
            obj = f"{prefix}_obj_{lab}"
            edges.append([f"{prefix}_home", obj, _weight(coords[f"{prefix}_home"], pos[lab])])
            edges.append([f"{prefix}_drop", obj, _weight(coords[f"{prefix}_drop"], pos[lab])])
        for i, a in enumerate(labels):
            for b in labels[i + 1:]:
                if math.dist(pos[a], pos[b]) <= NEIGHBOR_RADIUS:
                    edges.append([f"{prefix}_obj_{a}", f"{prefix}_obj_{b}",
                                  _weight(pos[a], pos[b])])
        roadmaps[arm] = {"nodes": nodes, "edges": edges}

    locations = [f"loc_obj_{lab}" for lab in labels] + ["loc_drop_left", "loc_drop_right"]
    mapping = {
        "left": {f"loc_obj_{lab}": [f"L_obj_{lab}"] for lab in labels},
        "right": {f"loc_obj_{lab}": [f"R_obj_{lab}"] for lab in labels},
    }
    mapping["left"]["loc_drop_left"] = ["L_drop"]
    mapping["right"]["loc_drop_right"] = ["R_drop"]

    table = []
    banded_sorted = [lab for lab in labels if lab in banded]
    for a in banded_sorted:
        for b in banded_sorted:
            if math.dist(pos[a], pos[b]) <= CONFLICT_RADIUS:
                table.append(["left", f"L_obj_{a}", "right", f"R_obj_{b}"])

    workcell = {
        "components": [{"id": "left", "start_config": "L_home"},
                       {"id": "right", "start_config": "R_home"}],
        "roadmaps": roadmaps,
        "locations": locations,
        "location_mapping": mapping,
        "collision_table": table,
    }

    ovcs = []
    grippers = {"left": [], "right": []}
    for lab in labels:
        arm = "left" if colors[lab] == "blue" else "right"
        oid = f"sort_{lab}"
        ovcs.append({
            "id": oid,
            "components": ["left", "right"],
            "slots": [
                {"actions": ["pick"], "locations": [f"loc_obj_{lab}"]},
                {"actions": ["place"], "locations": [f"loc_drop_{arm}"]},
            ],
        })
        grippers[arm].append({"ovc": oid, "from_slot": 1, "to_slot": 2})

    task = {
        "actions": {"pick": PICK_MS, "place": PLACE_MS},
        "ovcs": ovcs,
        "inter_constraints": [],
        "resources": {"gripper_left": grippers["left"],
                      "gripper_right": grippers["right"]},
    }
    return workcell, task


def dump_documents(workcell: dict, task: dict, workcell_path: str, task_path: str):
    for doc, path in ((workcell, workcell_path), (task, task_path)):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def molding_documents() -> tuple[dict, dict]:
    """The shipped injection-molding example: two arms plus a machine door,
    synchronized electrical check, and a bi-manual container lift."""
    wc = json.loads(resources.files("staams.data")
                    .joinpath("molding_workcell.json").read_text("utf-8"))
    task = json.loads(resources.files("staams.data")
                      .joinpath("molding_task.json").read_text("utf-8"))
    return wc, task
