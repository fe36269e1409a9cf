"""Motion model: roadmaps, location mappings, collision tables, motion series.

A workcell document describes, per active component, a weighted roadmap of
joint configurations, which configurations reach which workspace locations,
and which cross-component configuration pairs may never be occupied at the
same time.  All travel durations are integer milliseconds; the all-pairs
shortest-path matrix is computed once at load and shared read-only.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cp import IntervalVar, IntVar, Model, ModelError


class WorkcellError(Exception):
    """Raised when a workcell document violates the schema or its invariants."""


def _dijkstra(n: int, adjacency: list[list[tuple[int, int]]], source: int) -> list[int]:
    dist = [-1] * n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adjacency[u]:
            nd = d + w
            if dist[v] < 0 or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


@dataclass
class Roadmap:
    """Weighted undirected graph of joint configurations for one component."""

    component: str
    nodes: list[str]
    edges: list[tuple[str, str, int]]
    node_index: dict[str, int] = field(default_factory=dict)
    travel: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.node_index:
            self.node_index = {n: i for i, n in enumerate(self.nodes)}

    def compute_travel_matrix(self):
        n = len(self.nodes)
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for u, v, w in self.edges:
            ui, vi = self.node_index[u], self.node_index[v]
            adjacency[ui].append((vi, w))
            adjacency[vi].append((ui, w))
        self.travel = [_dijkstra(n, adjacency, s) for s in range(n)]

    @property
    def max_travel(self) -> int:
        return max(max(row) for row in self.travel) if self.travel else 0

    def code(self, node: str) -> int:
        try:
            return self.node_index[node]
        except KeyError:
            raise WorkcellError(f"unknown configuration {node} in roadmap {self.component}")


def travel_duration(roadmap: Roadmap, u: str, v: str) -> int:
    """Shortest weighted path duration between two configurations, in ticks."""
    d = roadmap.travel[roadmap.code(u)][roadmap.code(v)]
    if d < 0:
        raise WorkcellError(f"unreachable pair {u}, {v} in roadmap {roadmap.component}")
    return d


@dataclass
class Component:
    id: str
    start_config: str


@dataclass
class Workcell:
    components: list[Component]
    roadmaps: dict[str, Roadmap]
    locations: list[str]
    location_mapping: dict[str, dict[str, list[str]]]  # component -> location -> nodes
    collision_pairs: set[tuple[str, str, str, str]]    # canonical (a, na, b, nb), a < b

    def component_ids(self) -> list[str]:
        return [c.id for c in self.components]

    def start_config(self, component: str) -> str:
        for c in self.components:
            if c.id == component:
                return c.start_config
        raise WorkcellError(f"unknown component {component}")

    def reachable_nodes(self, component: str, location: str) -> list[str]:
        return self.location_mapping.get(component, {}).get(location, [])

    def collision_codes(self, comp_a: str, comp_b: str) -> set[tuple[int, int]]:
        """Conflicting (code in comp_a, code in comp_b) pairs for a component pair."""
        ra, rb = self.roadmaps[comp_a], self.roadmaps[comp_b]
        out = set()
        for a, na, b, nb in self.collision_pairs:
            if (a, b) == (comp_a, comp_b):
                out.add((ra.code(na), rb.code(nb)))
            elif (a, b) == (comp_b, comp_a):
                out.add((ra.code(nb), rb.code(na)))
        return out


def load_workcell(document: dict) -> Workcell:
    """Validate a workcell document and precompute travel matrices."""
    try:
        raw_components = document["components"]
        raw_roadmaps = document["roadmaps"]
        locations = list(document["locations"])
        raw_mapping = document.get("location_mapping", {})
        raw_table = document.get("collision_table", [])
    except (KeyError, TypeError) as exc:
        raise WorkcellError(f"workcell document missing key: {exc}") from exc

    components = []
    seen = set()
    for entry in raw_components:
        cid, start = entry["id"], entry["start_config"]
        if cid in seen:
            raise WorkcellError(f"duplicate component {cid}")
        seen.add(cid)
        components.append(Component(cid, start))

    roadmaps: dict[str, Roadmap] = {}
    for comp in components:
        try:
            spec = raw_roadmaps[comp.id]
        except KeyError:
            raise WorkcellError(f"missing roadmap for component {comp.id}")
        nodes = list(spec["nodes"])
        if len(nodes) != len(set(nodes)):
            raise WorkcellError(f"duplicate configuration in roadmap {comp.id}")
        node_set = set(nodes)
        edges = []
        for u, v, w in spec.get("edges", []):
            for x in (u, v):
                if x not in node_set:
                    raise WorkcellError(f"unknown configuration {x} in roadmap {comp.id}")
            if not isinstance(w, int) or w <= 0:
                raise WorkcellError(
                    f"non-positive edge weight {w!r} on {u}-{v} in roadmap {comp.id}")
            edges.append((u, v, w))
        rm = Roadmap(comp.id, nodes, edges)
        rm.compute_travel_matrix()
        roadmaps[comp.id] = rm
        if comp.start_config not in node_set:
            raise WorkcellError(
                f"unknown configuration {comp.start_config} in roadmap {comp.id}")

    mapping: dict[str, dict[str, list[str]]] = {}
    location_set = set(locations)
    for cid, per_loc in raw_mapping.items():
        if cid not in roadmaps:
            raise WorkcellError(f"location mapping references unknown component {cid}")
        rm = roadmaps[cid]
        mapping[cid] = {}
        for loc, nodes in per_loc.items():
            if loc not in location_set:
                raise WorkcellError(f"unknown location {loc} in mapping for {cid}")
            if not nodes:
                raise WorkcellError(f"empty mapping for location {loc} on {cid}")
            for node in nodes:
                if node not in rm.node_index:
                    raise WorkcellError(f"unknown configuration {node}")
            mapping[cid][loc] = list(nodes)

    # every mapped or start configuration must live in one connected region;
    # stray islands are rejected
    for comp in components:
        rm = roadmaps[comp.id]
        anchors = {comp.start_config}
        for nodes in mapping.get(comp.id, {}).values():
            anchors.update(nodes)
        anchor = next(iter(anchors))
        src = rm.node_index[anchor]
        for node in rm.nodes:
            if rm.travel[src][rm.node_index[node]] < 0:
                raise WorkcellError(
                    f"disconnected configuration {node} in roadmap {comp.id}")

    pairs: set[tuple[str, str, str, str]] = set()
    for entry in raw_table:
        ca, na, cb, nb = entry
        if ca == cb:
            raise WorkcellError("collision pair within one component: "
                                f"{ca}:{na} / {cb}:{nb}")
        for c, n in ((ca, na), (cb, nb)):
            if c not in roadmaps:
                raise WorkcellError(f"collision pair references unknown component {c}")
            if n not in roadmaps[c].node_index:
                raise WorkcellError(f"unknown configuration {n}")
        if (ca, na) > (cb, nb):
            ca, na, cb, nb = cb, nb, ca, na
        pairs.add((ca, na, cb, nb))

    return Workcell(components, roadmaps, locations, mapping, pairs)


def load_workcell_file(path: str) -> Workcell:
    with open(path, "r", encoding="utf-8") as fh:
        return load_workcell(json.load(fh))


class MotionSeries:
    """CP structure of one component's timeline: m configuration variables
    interleaved with waiting and travel intervals, plus the horizon."""

    __slots__ = ("component", "roadmap", "configs", "waits", "travels", "horizon", "m")

    def __init__(self, component: str, roadmap: Roadmap, configs, waits, travels, horizon):
        self.component = component
        self.roadmap = roadmap
        self.configs: list[IntVar] = configs
        self.waits: list[IntervalVar] = waits
        self.travels: list[IntervalVar] = travels
        self.horizon: IntVar = horizon
        self.m = len(configs)

    def occupancy(self, position: int) -> tuple[IntVar, IntVar]:
        """(start, end) variables of the occupancy envelope at a 1-based
        position: inbound travel through the wait to the end of the
        outbound travel."""
        i = position - 1
        start = self.travels[i - 1].start if i >= 1 else self.waits[0].start
        end = self.travels[i].end if i < self.m - 1 else self.waits[-1].end
        return start, end

    @property
    def last_end(self) -> IntVar:
        return self.waits[-1].end


def build_motion_series(model: Model, roadmap: Roadmap, m: int,
                        start_config: str, time_ub: int) -> MotionSeries:
    """Create the alternating wait/travel chain with travel-duration
    channeling and horizon freezing; the first configuration is pinned to
    the component's start configuration."""
    if m < 1:
        raise ModelError(f"series length must be >= 1, got {m}")
    n = len(roadmap.nodes)
    comp = roadmap.component
    configs = [model.new_int_var(range(n), f"{comp}.c{i+1}") for i in range(m)]
    if not configs[0].fix(roadmap.code(start_config)):
        raise ModelError(f"cannot fix start configuration for {comp}")

    max_t = roadmap.max_travel
    waits, travels = [], []
    prev_end: Optional[IntVar] = None
    for i in range(m):
        start = model.new_fixed(0, f"{comp}.w1.start") if i == 0 else prev_end
        dur = model.new_int_var(range(0, time_ub + 1), f"{comp}.w{i+1}.dur")
        end = model.new_int_var(range(0, time_ub + 1), f"{comp}.w{i+1}.end")
        waits.append(model.new_interval_var(start, dur, end, name=f"{comp}.w{i+1}",
                                            post_sum=False))
        if i < m - 1:
            t_dur = model.new_int_var(range(0, max_t + 1), f"{comp}.t{i+1}.dur")
            t_end = model.new_int_var(range(0, time_ub + 1), f"{comp}.t{i+1}.end")
            travels.append(model.new_interval_var(end, t_dur, t_end,
                                                  name=f"{comp}.t{i+1}", post_sum=False))
            model.add_travel_channel(configs[i], configs[i + 1], t_dur, roadmap.travel)
            prev_end = t_end

    chain: list[IntervalVar] = []
    for i in range(m):
        chain.append(waits[i])
        if i < m - 1:
            chain.append(travels[i])
    model.add_timeline(chain)

    horizon = model.new_int_var(range(1, m + 1), f"{comp}.H")
    for i in range(1, m):
        model.add_tail_freeze(horizon, i + 1, configs[i - 1], configs[i],
                              [travels[i - 1].duration, waits[i].duration])
    return MotionSeries(comp, roadmap, configs, waits, travels, horizon)


def post_collision_constraints(model: Model, series: Sequence[MotionSeries],
                               workcell: Workcell) -> int:
    """Post conditional disjointness for every cross-component position pair
    that can take a conflicting configuration pair.  Returns the number of
    constraints posted."""
    posted = 0
    for ai in range(len(series)):
        for bi in range(ai + 1, len(series)):
            sa, sb = series[ai], series[bi]
            pairs = workcell.collision_codes(sa.component, sb.component)
            if not pairs:
                continue
            for i in range(1, sa.m + 1):
                occ_a = sa.occupancy(i)
                for j in range(1, sb.m + 1):
                    occ_b = sb.occupancy(j)
                    model.add_conditional_no_overlap(
                        sa.configs[i - 1], sb.configs[j - 1], pairs,
                        occ_a[0], occ_a[1], occ_b[0], occ_b[1])
                    posted += 1
    return posted
