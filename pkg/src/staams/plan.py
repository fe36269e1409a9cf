"""Timed plans: the solved visit schedule per component, JSON round-trip,
and extraction from a solved instance."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .cp import Solution
from .linker import StaamsInstance


@dataclass
class Visit:
    config: str
    start: int
    end: int


@dataclass
class TravelSegment:
    source: str
    target: str
    start: int
    end: int


@dataclass
class ComponentPlan:
    visits: list[Visit] = field(default_factory=list)
    travels: list[TravelSegment] = field(default_factory=list)


@dataclass
class SlotResult:
    action: str
    location: str
    start: int
    end: int
    position: int


@dataclass
class OvcResult:
    component: str
    slots: list[SlotResult] = field(default_factory=list)


@dataclass
class Plan:
    components: dict[str, ComponentPlan]
    ovcs: dict[str, OvcResult]
    makespan: int

    def to_document(self) -> dict:
        return {
            "makespan_ms": self.makespan,
            "components": {
                cid: {
                    "visits": [{"config": v.config, "start_ms": v.start,
                                "end_ms": v.end} for v in cp.visits],
                    "travels": [{"from": t.source, "to": t.target,
                                 "start_ms": t.start, "end_ms": t.end}
                                for t in cp.travels],
                } for cid, cp in self.components.items()
            },
            "ovcs": {
                oid: {
                    "component": o.component,
                    "slots": [{"action": s.action, "location": s.location,
                               "start_ms": s.start, "end_ms": s.end,
                               "position": s.position} for s in o.slots],
                } for oid, o in self.ovcs.items()
            },
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Plan":
        components = {}
        for cid, entry in doc.get("components", {}).items():
            components[cid] = ComponentPlan(
                visits=[Visit(v["config"], v["start_ms"], v["end_ms"])
                        for v in entry.get("visits", [])],
                travels=[TravelSegment(t["from"], t["to"], t["start_ms"], t["end_ms"])
                         for t in entry.get("travels", [])])
        ovcs = {}
        for oid, entry in doc.get("ovcs", {}).items():
            ovcs[oid] = OvcResult(
                component=entry["component"],
                slots=[SlotResult(s["action"], s["location"], s["start_ms"],
                                  s["end_ms"], s["position"])
                       for s in entry.get("slots", [])])
        return cls(components, ovcs, doc.get("makespan_ms", 0))

    def dump(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_document(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Plan":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))


def extract_plan(instance: StaamsInstance, solution: Solution) -> Plan:
    """Read a CP solution back into a plan over the active positions 1..H."""
    components: dict[str, ComponentPlan] = {}
    for cid in instance.component_ids:
        series = instance.series[cid]
        nodes = series.roadmap.nodes
        h = solution.value(series.horizon)
        cp = ComponentPlan()
        for i in range(h):
            cp.visits.append(Visit(
                nodes[solution.value(series.configs[i])],
                solution.value(series.waits[i].start),
                solution.value(series.waits[i].end)))
        for i in range(h - 1):
            cp.travels.append(TravelSegment(
                nodes[solution.value(series.configs[i])],
                nodes[solution.value(series.configs[i + 1])],
                solution.value(series.travels[i].start),
                solution.value(series.travels[i].end)))
        components[cid] = cp

    ovcs: dict[str, OvcResult] = {}
    for ov in instance.ovcs:
        cid = instance.component_ids[solution.value(ov.component)]
        slots = []
        for j in range(len(ov.spec.slots)):
            slots.append(SlotResult(
                instance.action_ids[solution.value(ov.actions[j])],
                instance.location_ids[solution.value(ov.locations[j])],
                solution.value(ov.intervals[j].start),
                solution.value(ov.intervals[j].end),
                solution.value(ov.connections[j])))
        ovcs[ov.spec.id] = OvcResult(cid, slots)

    return Plan(components, ovcs, solution.value(instance.makespan))
