"""Independent plan validation.

Re-derives every requirement of a timed plan directly from the workcell and
task documents, without touching the constraint engine: timeline tiling,
travel durations against the shortest-path matrix, reachability of slot
locations, visit ordering, temporal relations, resource exclusivity,
collision disjointness under the occupancy-envelope rule, and the reported
makespan.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .motion import Workcell
from .plan import Plan
from .task import LocationAllDifferent, LocationCompatibility, TaskModel, TemporalRelation

VIOLATION_KINDS = ("collision", "resource-overlap", "relation-violated",
                   "reach-violated", "travel-too-short", "order-violated")


@dataclass
class Violation:
    kind: str
    details: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def status(self) -> str:
        return "ok" if self.ok else "violations"

    def add(self, kind: str, details: str):
        assert kind in VIOLATION_KINDS
        self.violations.append(Violation(kind, details))

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def _overlaps(s1: int, e1: int, s2: int, e2: int) -> bool:
    """Half-open interval overlap: touching endpoints do not overlap."""
    return not (e1 <= s2 or e2 <= s1)


def _envelope(cp, index: int) -> tuple[int, int]:
    """Occupancy of visit `index` (0-based): from the start of the inbound
    travel to the end of the outbound travel."""
    start = cp.travels[index - 1].start if index >= 1 else cp.visits[0].start
    end = cp.travels[index].end if index < len(cp.travels) else cp.visits[-1].end
    return start, end


def validate_plan(workcell: Workcell, task: TaskModel, plan: Plan) -> ValidationReport:
    report = ValidationReport()

    # timelines and travel durations per component
    for cid, cp in plan.components.items():
        if cid not in workcell.roadmaps:
            report.add("reach-violated", f"plan references unknown component {cid}")
            continue
        rm = workcell.roadmaps[cid]
        if not cp.visits:
            report.add("order-violated", f"{cid}: empty visit sequence")
            continue
        if len(cp.travels) != len(cp.visits) - 1:
            report.add("order-violated",
                       f"{cid}: {len(cp.visits)} visits need {len(cp.visits)-1} travels")
            continue
        if cp.visits[0].start != 0:
            report.add("order-violated", f"{cid}: timeline does not start at 0")
        start_node = workcell.start_config(cid)
        if cp.visits[0].config != start_node:
            report.add("order-violated",
                       f"{cid}: first visit is {cp.visits[0].config}, "
                       f"expected start configuration {start_node}")
        for i, v in enumerate(cp.visits):
            if v.config not in rm.node_index:
                report.add("reach-violated",
                           f"{cid}: unknown configuration {v.config}")
            if v.end < v.start:
                report.add("order-violated",
                           f"{cid}: visit {i+1} ends before it starts")
        for i, t in enumerate(cp.travels):
            prev, nxt = cp.visits[i], cp.visits[i + 1]
            if t.start != prev.end or t.end != nxt.start:
                report.add("order-violated",
                           f"{cid}: travel {i+1} does not tile the timeline")
            if t.source != prev.config or t.target != nxt.config:
                report.add("order-violated",
                           f"{cid}: travel {i+1} endpoints disagree with visits")
            if t.source in rm.node_index and t.target in rm.node_index:
                need = rm.travel[rm.node_index[t.source]][rm.node_index[t.target]]
                if t.end - t.start < need:
                    report.add("travel-too-short",
                               f"{cid}: travel {i+1} {t.source}->{t.target} takes "
                               f"{t.end - t.start} < {need}")

    # OVC resolution: reach, order, actions
    for spec in task.ovcs:
        res = plan.ovcs.get(spec.id)
        if res is None:
            report.add("order-violated", f"OVC {spec.id} missing from plan")
            continue
        if res.component not in spec.components:
            report.add("reach-violated",
                       f"OVC {spec.id}: component {res.component} not admissible")
            continue
        cp = plan.components.get(res.component)
        if cp is None:
            report.add("reach-violated",
                       f"OVC {spec.id}: component {res.component} has no timeline")
            continue
        if len(res.slots) != len(spec.slots):
            report.add("order-violated", f"OVC {spec.id}: slot count mismatch")
            continue
        prev_pos = 0
        prev_end = None
        for j, (slot_spec, slot) in enumerate(zip(spec.slots, res.slots), start=1):
            if slot.location not in slot_spec.locations:
                report.add("reach-violated",
                           f"OVC {spec.id} slot {j}: location {slot.location} "
                           "not admissible")
            if slot.action not in slot_spec.actions:
                report.add("reach-violated",
                           f"OVC {spec.id} slot {j}: action {slot.action} not admissible")
            if not 1 <= slot.position <= len(cp.visits):
                report.add("order-violated",
                           f"OVC {spec.id} slot {j}: position {slot.position} "
                           "outside the visit sequence")
                continue
            if slot.position <= prev_pos:
                report.add("order-violated",
                           f"OVC {spec.id} slot {j}: positions not increasing")
            if prev_end is not None and slot.start < prev_end:
                report.add("order-violated",
                           f"OVC {spec.id} slot {j}: starts before slot {j-1} ends")
            prev_pos, prev_end = slot.position, slot.end
            visit = cp.visits[slot.position - 1]
            if (visit.start, visit.end) != (slot.start, slot.end):
                report.add("order-violated",
                           f"OVC {spec.id} slot {j}: interval differs from visit "
                           f"at position {slot.position}")
            reach = workcell.reachable_nodes(res.component, slot.location)
            if visit.config not in reach:
                report.add("reach-violated",
                           f"OVC {spec.id} slot {j}: configuration {visit.config} "
                           f"does not reach {slot.location}")
            floor = task.actions.get(slot.action, 0)
            if slot_spec.min_duration:
                floor = max(floor, slot_spec.min_duration)
            if slot.end - slot.start < floor:
                report.add("relation-violated",
                           f"OVC {spec.id} slot {j}: visit shorter than the "
                           f"{slot.action} minimum {floor}")

    def interval_of(ref):
        res = plan.ovcs.get(ref[0])
        if res is None or not 1 <= ref[1] <= len(res.slots):
            return None
        s = res.slots[ref[1] - 1]
        return s.start, s.end

    # temporal relations and combinatorial constraints
    for c in task.inter:
        if isinstance(c, TemporalRelation):
            a, b = interval_of(c.first), interval_of(c.second)
            if a is None or b is None:
                report.add("relation-violated",
                           f"{c.kind}: dangling reference {c.first}/{c.second}")
                continue
            (s1, e1), (s2, e2) = a, b
            ok = True
            if c.kind == "before":
                ok = e1 <= s2
            elif c.kind == "during":
                ok = s2 <= s1 and e1 <= e2
            elif c.kind == "starts-together":
                ok = s1 == s2
            elif c.kind == "ends-together":
                ok = e1 == e2
            elif c.kind == "min-gap":
                ok = s2 - e1 >= c.gap
            if not ok:
                report.add("relation-violated",
                           f"{c.kind} violated between {c.first} and {c.second}")
        elif isinstance(c, LocationAllDifferent):
            locs = []
            for ref in c.targets:
                res = plan.ovcs.get(ref[0])
                if res:
                    locs.append(res.slots[ref[1] - 1].location)
            if len(set(locs)) != len(locs):
                report.add("relation-violated", "all-different locations violated")
        elif isinstance(c, LocationCompatibility):
            row = []
            for ref in c.targets:
                res = plan.ovcs.get(ref[0])
                if res:
                    row.append(res.slots[ref[1] - 1].location)
            if tuple(row) not in {tuple(r) for r in c.rows}:
                report.add("relation-violated",
                           f"location combination {tuple(row)} not compatible")

    # resource exclusivity
    for rid, reservations in task.resources.items():
        spans = []
        for r in reservations:
            res = plan.ovcs.get(r.ovc)
            if res is None:
                continue
            spans.append((res.slots[r.from_slot - 1].start,
                          res.slots[r.to_slot - 1].end, r.ovc))
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                if _overlaps(spans[i][0], spans[i][1], spans[j][0], spans[j][1]):
                    report.add("resource-overlap",
                               f"resource {rid}: {spans[i][2]} and {spans[j][2]} overlap")

    # collision table over occupancy envelopes
    comp_list = [c for c in plan.components if c in workcell.roadmaps]
    for ai in range(len(comp_list)):
        for bi in range(ai + 1, len(comp_list)):
            ca, cb = comp_list[ai], comp_list[bi]
            conflicting = set()
            for a, na, b, nb in workcell.collision_pairs:
                if (a, b) == (ca, cb):
                    conflicting.add((na, nb))
                elif (a, b) == (cb, ca):
                    conflicting.add((nb, na))
            if not conflicting:
                continue
            pa, pb = plan.components[ca], plan.components[cb]
            for i, va in enumerate(pa.visits):
                for j, vb in enumerate(pb.visits):
                    if (va.config, vb.config) not in conflicting:
                        continue
                    sa, ea = _envelope(pa, i)
                    sb, eb = _envelope(pb, j)
                    if _overlaps(sa, ea, sb, eb):
                        report.add("collision",
                                   f"{ca}:{va.config} and {cb}:{vb.config} overlap "
                                   f"in [{max(sa, sb)}, {min(ea, eb)})")

    recomputed = max((cp.visits[-1].end for cp in plan.components.values()
                      if cp.visits), default=0)
    if recomputed != plan.makespan:
        report.add("relation-violated",
                   f"reported makespan {plan.makespan} != recomputed {recomputed}")
    return report
