"""Assembles a task model and a workcell into one constraint instance.

Connection variables tie each OVC slot to a position of the assigned
component's motion series.  A flat index K = offset(component) + position
addresses the concatenation of all series, so a single global all-different
over the K variables guarantees that no two slots ever reference the same
configuration variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cp import IntervalVar, IntVar, Model
from .cp.propagators import HorizonCount
from .motion import MotionSeries, Workcell, build_motion_series, post_collision_constraints
from .task import (
    LocationAllDifferent,
    LocationCompatibility,
    OvcSpec,
    TaskModel,
    TemporalRelation,
)


class AssemblyError(Exception):
    """Raised when a task cannot be grounded on a workcell."""


@dataclass
class AssembleOptions:
    collisions: bool = True
    evasive_slack: int = 2
    horizon_caps: dict[str, int] = field(default_factory=dict)
    time_ub: Optional[int] = None


class OvcVars:
    """Grounded variables of one OVC."""

    __slots__ = ("spec", "component", "actions", "locations", "intervals",
                 "connections", "flat_index")

    def __init__(self, spec: OvcSpec):
        self.spec = spec
        self.component: IntVar = None
        self.actions: list[IntVar] = []
        self.locations: list[IntVar] = []
        self.intervals: list[IntervalVar] = []
        self.connections: list[IntVar] = []
        self.flat_index: list[IntVar] = []


class StaamsInstance:
    """A fully grounded constraint instance plus its decision-variable groups."""

    def __init__(self, model, task, workcell, options):
        self.model: Model = model
        self.task: TaskModel = task
        self.workcell: Workcell = workcell
        self.options: AssembleOptions = options
        self.component_ids: list[str] = []
        self.location_ids: list[str] = []
        self.action_ids: list[str] = []
        self.series: dict[str, MotionSeries] = {}
        self.ovcs: list[OvcVars] = []
        self.makespan: IntVar = None
        self.collision_constraints = 0
        self.time_ub = 0
        # decision-variable groups, in phase order
        self.location_vars: list[IntVar] = []
        self.component_vars: list[IntVar] = []
        self.connection_vars: list[IntVar] = []
        self.horizon_vars: list[IntVar] = []
        self.config_vars: list[IntVar] = []
        self.interval_vars: list[IntVar] = []

    @property
    def inconsistent(self) -> bool:
        return self.model.inconsistent

    def ovc(self, ovc_id: str) -> OvcVars:
        for o in self.ovcs:
            if o.spec.id == ovc_id:
                return o
        raise AssemblyError(f"unknown OVC {ovc_id}")

    def decision_vars(self) -> list[IntVar]:
        return (self.location_vars + self.component_vars + self.connection_vars +
                self.horizon_vars + self.config_vars + self.interval_vars)


def _slot_min_duration(task: TaskModel, spec, slot) -> int:
    worst = max(task.actions[a] for a in slot.actions)
    return max(worst, slot.min_duration or 0)


def _admissible_components(task: TaskModel, workcell: Workcell,
                           spec: OvcSpec) -> list[str]:
    known = set(workcell.component_ids())
    admissible = []
    for comp in spec.components:
        if comp not in known:
            raise AssemblyError(f"OVC {spec.id}: unknown component {comp}")
        if all(any(workcell.reachable_nodes(comp, loc) for loc in slot.locations)
               for slot in spec.slots):
            admissible.append(comp)
    if not admissible:
        for j, slot in enumerate(spec.slots, start=1):
            if not any(workcell.reachable_nodes(c, loc)
                       for c in spec.components for loc in slot.locations):
                raise AssemblyError(
                    f"OVC {spec.id} slot {j}: location(s) "
                    f"{', '.join(slot.locations)} unreachable by "
                    f"{', '.join(spec.components)}")
        raise AssemblyError(
            f"OVC {spec.id}: no single component reaches every slot")
    return admissible


def _estimate_time_ub(task: TaskModel, workcell: Workcell,
                      m_per_comp: dict[str, int]) -> int:
    """A makespan bound that some serialized schedule always satisfies:
    every slot costs at most one worst-case travel plus its action minimum,
    plus evasive slack travels and all temporal gaps."""
    max_travel = max((workcell.roadmaps[c].max_travel for c in m_per_comp), default=0)
    total = 0
    for spec in task.ovcs:
        for slot in spec.slots:
            total += _slot_min_duration(task, spec, slot) + max_travel
    slack_positions = sum(m_per_comp[c] - 1 for c in m_per_comp) - \
        sum(len(spec.slots) for spec in task.ovcs)
    total += max(0, slack_positions) * max_travel
    for c in task.inter:
        if isinstance(c, TemporalRelation) and c.gap > 0:
            total += c.gap
    return total + max_travel + 1024


def assemble(task: TaskModel, workcell: Workcell,
             options: Optional[AssembleOptions] = None) -> StaamsInstance:
    """Ground the task on the workcell: motion series, connection variables,
    channeling, resources, inter-OVC constraints, and the makespan."""
    options = options or AssembleOptions()
    model = Model("staams")
    inst = StaamsInstance(model, task, workcell, options)

    comps = workcell.component_ids()
    inst.component_ids = comps
    comp_code = {c: i for i, c in enumerate(comps)}
    inst.location_ids = list(workcell.locations)
    loc_code = {l: i for i, l in enumerate(inst.location_ids)}
    inst.action_ids = list(task.actions.keys())
    act_code = {a: i for i, a in enumerate(inst.action_ids)}

    admissible = {spec.id: _admissible_components(task, workcell, spec)
                  for spec in task.ovcs}

    slots_admitting = {c: 0 for c in comps}
    for spec in task.ovcs:
        for comp in admissible[spec.id]:
            slots_admitting[comp] += len(spec.slots)

    m_per_comp = {}
    for comp in comps:
        m = 1 + slots_admitting[comp] + max(0, options.evasive_slack)
        cap = options.horizon_caps.get(comp)
        if cap is not None:
            m = max(1, min(m, cap))
        m_per_comp[comp] = m

    time_ub = options.time_ub or _estimate_time_ub(task, workcell, m_per_comp)
    inst.time_ub = time_ub

    for comp in comps:
        inst.series[comp] = build_motion_series(
            model, workcell.roadmaps[comp], m_per_comp[comp],
            workcell.start_config(comp), time_ub)

    offsets = {}
    flat_configs: list[IntVar] = []
    flat_wait_starts: list[IntVar] = []
    flat_wait_ends: list[IntVar] = []
    for comp in comps:
        offsets[comp] = len(flat_configs)
        s = inst.series[comp]
        flat_configs.extend(s.configs)
        flat_wait_starts.extend(w.start for w in s.waits)
        flat_wait_ends.extend(w.end for w in s.waits)
    offset_arr = [offsets[c] for c in comps]
    horizon_arr = [inst.series[c].horizon for c in comps]
    max_m = max(m_per_comp.values())

    all_flat_index: list[IntVar] = []
    actmin_arr = [task.actions[a] for a in inst.action_ids]

    for spec in task.ovcs:
        ov = OvcVars(spec)
        inst.ovcs.append(ov)
        comp_codes = [comp_code[c] for c in admissible[spec.id]]
        a_var = model.new_int_var(comp_codes, f"{spec.id}.A")
        ov.component = a_var
        inst.component_vars.append(a_var)

        # shifted so that K = off + X lands on the 0-based flat index of
        # position X (position 1 sits at offsets[comp])
        off_shift = [offset_arr[c] - 1 for c in range(len(comps))]
        off_var = model.new_int_var(sorted({off_shift[c] for c in comp_codes}),
                                    f"{spec.id}.off")
        model.add_element(a_var, off_shift, off_var)
        hh_var = model.new_int_var(range(1, max_m + 1), f"{spec.id}.H")
        model.add_element_var(a_var, horizon_arr, hh_var)

        for j, slot in enumerate(spec.slots, start=1):
            loc_var = model.new_int_var(sorted(loc_code[l] for l in set(slot.locations)),
                                        f"{spec.id}.L{j}")
            act_var = model.new_int_var(sorted(act_code[a] for a in set(slot.actions)),
                                        f"{spec.id}.P{j}")
            interval = model.new_interval_var((0, time_ub), (0, time_ub), (0, time_ub),
                                              name=f"{spec.id}.I{j}")
            # visit lasts at least the chosen action's minimum
            dmin = model.new_int_var(range(0, max(actmin_arr) + 1), f"{spec.id}.dmin{j}")
            model.add_element(act_var, actmin_arr, dmin)
            model.add_le_offset(dmin, 0, interval.duration)
            if slot.min_duration:
                interval.duration.set_min(slot.min_duration)

            x_var = model.new_int_var(range(2, max_m + 1), f"{spec.id}.X{j}")
            model.add_le_offset(x_var, 0, hh_var)
            k_var = model.new_int_var(
                range(min(offset_arr) + 1, len(flat_configs)), f"{spec.id}.K{j}")
            model.add_sum_eq(off_var, x_var, k_var)

            v_var = model.new_int_var(
                range(0, max(len(workcell.roadmaps[c].nodes) for c in comps)),
                f"{spec.id}.V{j}")
            model.add_element_var(k_var, flat_configs, v_var)
            rows = []
            for comp in admissible[spec.id]:
                rm = workcell.roadmaps[comp]
                for loc in slot.locations:
                    for node in workcell.reachable_nodes(comp, loc):
                        rows.append((comp_code[comp], loc_code[loc], rm.code(node)))
            model.add_table([a_var, loc_var, v_var], rows)

            model.add_element_var(k_var, flat_wait_starts, interval.start)
            model.add_element_var(k_var, flat_wait_ends, interval.end)

            ov.actions.append(act_var)
            ov.locations.append(loc_var)
            ov.intervals.append(interval)
            ov.connections.append(x_var)
            ov.flat_index.append(k_var)
            all_flat_index.append(k_var)
            inst.location_vars.append(loc_var)
            inst.location_vars.append(act_var)
            inst.connection_vars.append(x_var)

        if len(ov.connections) > 1:
            model.add_strictly_increasing(ov.connections)
            for j in range(len(ov.intervals) - 1):
                model.add_before(ov.intervals[j], ov.intervals[j + 1])

    if all_flat_index:
        model.add_all_different(all_flat_index)

    for comp in comps:
        assignments = [(inst.ovcs[i].component, len(spec.slots))
                       for i, spec in enumerate(task.ovcs)
                       if comp in admissible[spec.id]]
        if assignments:
            s = inst.series[comp]
            model.post(HorizonCount(s.horizon, assignments, comp_code[comp]),
                       "horizon-count", [s.horizon] + [a for a, _ in assignments],
                       watch=[a for a, _ in assignments])

    for rid, reservations in task.resources.items():
        spans = []
        for r in reservations:
            ov = inst.ovc(r.ovc)
            spans.append((ov.intervals[r.from_slot - 1].start,
                          ov.intervals[r.to_slot - 1].end))
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                model.add_no_overlap_vars(spans[i][0], spans[i][1],
                                          spans[j][0], spans[j][1])

    for c in task.inter:
        if isinstance(c, TemporalRelation):
            first = inst.ovc(c.first[0]).intervals[c.first[1] - 1]
            second = inst.ovc(c.second[0]).intervals[c.second[1] - 1]
            if c.kind == "before":
                model.add_before(first, second)
            elif c.kind == "during":
                model.add_during(first, second)
            elif c.kind == "starts-together":
                model.add_starts_together(first, second)
            elif c.kind == "ends-together":
                model.add_ends_together(first, second)
            else:
                model.add_min_gap(first, second, c.gap)
        elif isinstance(c, LocationAllDifferent):
            model.add_all_different(
                [inst.ovc(o).locations[j - 1] for o, j in c.targets])
        elif isinstance(c, LocationCompatibility):
            vars_ = [inst.ovc(o).locations[j - 1] for o, j in c.targets]
            rows = [tuple(loc_code[l] for l in row) for row in c.rows]
            model.add_table(vars_, rows)

    if options.collisions:
        inst.collision_constraints = post_collision_constraints(
            model, [inst.series[c] for c in comps], workcell)

    makespan = model.new_int_var(range(0, time_ub + 1), "makespan")
    model.add_max_eq(makespan, [inst.series[c].last_end for c in comps])
    inst.makespan = makespan

    for comp in comps:
        s = inst.series[comp]
        inst.horizon_vars.append(s.horizon)
        inst.config_vars.extend(s.configs)
    for comp in comps:
        s = inst.series[comp]
        inst.interval_vars.extend(w.start for w in s.waits)
        inst.interval_vars.append(s.last_end)
    inst.interval_vars.append(makespan)

    if not model.propagate():
        model.inconsistent = True
    return inst


def horizon_lower_bound(instance: StaamsInstance, component: str) -> int:
    """Home position plus one position per slot currently fixed to the
    component; never exceeds the series length."""
    count = 0
    for ov in instance.ovcs:
        if ov.component.is_fixed() and \
                instance.component_ids[ov.component.value()] == component:
            count += len(ov.spec.slots)
    return min(1 + count, instance.series[component].m)
