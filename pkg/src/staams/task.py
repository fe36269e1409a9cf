"""Robot-independent task model: Ordered Visiting Constraints, inter-OVC
constraints, and exclusively reservable resources.

The task layer is pure description; variables are created when a task is
assembled against a workcell.  Slot indices are 1-based everywhere a task
document or another module refers to them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union


class TaskError(Exception):
    """Raised for malformed task construction or documents."""


TEMPORAL_KINDS = ("before", "during", "starts-together", "ends-together", "min-gap")


@dataclass
class SlotSpec:
    """One visit of an OVC: admissible actions, admissible locations, and an
    optional extra floor on the visit duration."""
    actions: list[str]
    locations: list[str]
    min_duration: Optional[int] = None


@dataclass
class OvcSpec:
    """An Ordered Visiting Constraint: one active component out of
    `components` performs the slot visits in order."""
    id: str
    components: list[str]
    slots: list[SlotSpec]


@dataclass
class TemporalRelation:
    kind: str
    first: tuple[str, int]     # (ovc id, slot index, 1-based)
    second: tuple[str, int]
    gap: int = 0

    def __post_init__(self):
        if self.kind not in TEMPORAL_KINDS:
            raise TaskError(f"unknown temporal relation kind {self.kind!r}")


@dataclass
class LocationAllDifferent:
    """The referenced slots must resolve to pairwise distinct locations."""
    targets: list[tuple[str, int]]


@dataclass
class LocationCompatibility:
    """The referenced slots' locations must match one of the allowed rows."""
    targets: list[tuple[str, int]]
    rows: list[tuple[str, ...]]


InterConstraint = Union[TemporalRelation, LocationAllDifferent, LocationCompatibility]


@dataclass
class Reservation:
    ovc: str
    from_slot: int
    to_slot: int


class TaskModel:
    """Mutable task under construction; immutable once handed to assembly."""

    def __init__(self, actions: Optional[dict[str, int]] = None):
        self.actions: dict[str, int] = {}
        self.ovcs: list[OvcSpec] = []
        self.inter: list[InterConstraint] = []
        self.resources: dict[str, list[Reservation]] = {}
        self._ovc_ids: dict[str, OvcSpec] = {}
        if actions:
            for name, dur in actions.items():
                self.add_action(name, dur)

    # -- catalog ---------------------------------------------------------------

    def add_action(self, name: str, min_duration: int):
        if min_duration < 0:
            raise TaskError(f"action {name}: negative minimum duration")
        self.actions[name] = int(min_duration)

    # -- construction ------------------------------------------------------------

    def new_ovc(self, ovc_id: str, components: Sequence[str],
                slots: Iterable[Union[SlotSpec, tuple]]) -> OvcSpec:
        """Register an OVC.  Each slot is a SlotSpec or an
        (actions, locations[, min_duration]) tuple."""
        if ovc_id in self._ovc_ids:
            raise TaskError(f"duplicate OVC id {ovc_id}")
        if not components:
            raise TaskError(f"OVC {ovc_id}: empty component domain")
        norm: list[SlotSpec] = []
        for j, slot in enumerate(slots, start=1):
            if not isinstance(slot, SlotSpec):
                slot = SlotSpec(*slot)
            if not slot.locations:
                raise TaskError(f"OVC {ovc_id} slot {j}: empty location domain")
            if not slot.actions:
                raise TaskError(f"OVC {ovc_id} slot {j}: empty action domain")
            for a in slot.actions:
                if a not in self.actions:
                    raise TaskError(f"OVC {ovc_id} slot {j}: unknown action {a}")
            norm.append(SlotSpec(list(slot.actions), list(slot.locations),
                                 slot.min_duration))
        if not norm:
            raise TaskError(f"OVC {ovc_id}: at least one slot required")
        spec = OvcSpec(ovc_id, list(components), norm)
        self.ovcs.append(spec)
        self._ovc_ids[ovc_id] = spec
        return spec

    def _check_ref(self, ref: tuple[str, int], what: str):
        ovc_id, slot = ref
        spec = self._ovc_ids.get(ovc_id)
        if spec is None:
            raise TaskError(f"{what} references unknown OVC {ovc_id}")
        if not 1 <= slot <= len(spec.slots):
            raise TaskError(f"{what} references slot {slot} of OVC {ovc_id} "
                            f"(has {len(spec.slots)})")

    def add_inter_constraint(self, constraint: InterConstraint):
        if isinstance(constraint, TemporalRelation):
            self._check_ref(constraint.first, f"{constraint.kind} relation")
            self._check_ref(constraint.second, f"{constraint.kind} relation")
        elif isinstance(constraint, (LocationAllDifferent, LocationCompatibility)):
            for ref in constraint.targets:
                self._check_ref(ref, "combinatorial constraint")
            if isinstance(constraint, LocationCompatibility):
                for row in constraint.rows:
                    if len(row) != len(constraint.targets):
                        raise TaskError("compatibility row arity mismatch")
        else:
            raise TaskError(f"unsupported inter-OVC constraint {constraint!r}")
        self.inter.append(constraint)

    def reserve_resource(self, resource_id: str, ovc_id: str,
                         from_slot: int, to_slot: Optional[int] = None):
        """Reserve a resource for the span from one slot's start to another
        slot's end (a single slot when to_slot is omitted)."""
        to_slot = from_slot if to_slot is None else to_slot
        self._check_ref((ovc_id, from_slot), f"resource {resource_id}")
        self._check_ref((ovc_id, to_slot), f"resource {resource_id}")
        if to_slot < from_slot:
            raise TaskError(f"resource {resource_id}: span is reversed")
        self.resources.setdefault(resource_id, []).append(
            Reservation(ovc_id, from_slot, to_slot))

    def ovc(self, ovc_id: str) -> OvcSpec:
        try:
            return self._ovc_ids[ovc_id]
        except KeyError:
            raise TaskError(f"unknown OVC {ovc_id}")


def _ref_from_doc(entry: dict) -> tuple[str, int]:
    return (entry["ovc"], int(entry["slot"]))


def load_task(document: dict) -> TaskModel:
    """Build a TaskModel from its JSON document form."""
    try:
        actions = document["actions"]
        ovcs = document["ovcs"]
    except (KeyError, TypeError) as exc:
        raise TaskError(f"task document missing key: {exc}") from exc

    task = TaskModel()
    for name, dur in actions.items():
        task.add_action(name, dur)

    for entry in ovcs:
        slots = []
        for s in entry["slots"]:
            slots.append(SlotSpec(list(s["actions"]), list(s["locations"]),
                                  s.get("min_duration_ms")))
        task.new_ovc(entry["id"], list(entry["components"]), slots)

    for entry in document.get("inter_constraints", []):
        kind = entry["kind"]
        if kind in TEMPORAL_KINDS:
            task.add_inter_constraint(TemporalRelation(
                kind, _ref_from_doc(entry["first"]), _ref_from_doc(entry["second"]),
                gap=int(entry.get("gap_ms", 0))))
        elif kind == "all-different":
            task.add_inter_constraint(LocationAllDifferent(
                [_ref_from_doc(t) for t in entry["targets"]]))
        elif kind == "compatibility-table":
            task.add_inter_constraint(LocationCompatibility(
                [_ref_from_doc(t) for t in entry["targets"]],
                [tuple(row) for row in entry["rows"]]))
        else:
            raise TaskError(f"unknown inter-OVC constraint kind {kind!r}")

    for rid, entries in document.get("resources", {}).items():
        for e in entries:
            task.reserve_resource(rid, e["ovc"], int(e["from_slot"]),
                                  int(e.get("to_slot", e["from_slot"])))
    return task


def load_task_file(path: str) -> TaskModel:
    with open(path, "r", encoding="utf-8") as fh:
        return load_task(json.load(fh))
