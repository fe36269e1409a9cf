"""Finite-domain integer variables, domains with backtrackable state, and the model.

Domains are kept as [lo, hi] bounds plus a set of interior holes.  Every
mutation is recorded on a trail so that backtracking restores domains
bit-exactly.  Propagators subscribe to variables and are driven to a
fixpoint by the model's queue; a propagator that empties a domain signals
failure of the current branch.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional, Sequence


class ModelError(Exception):
    """Raised for malformed model construction (empty domains, foreign vars)."""


class IntVar:
    __slots__ = ("model", "index", "name", "lo", "hi", "holes", "size", "watchers")

    def __init__(self, model: "Model", index: int, lo: int, hi: int,
                 holes: set[int], name: str = ""):
        self.model = model
        self.index = index
        self.name = name
        self.lo = lo
        self.hi = hi
        self.holes = holes          # values strictly inside (lo, hi) that are removed
        self.size = hi - lo + 1 - len(holes)
        self.watchers: list = []    # propagators woken on any domain change

    def __repr__(self):
        return f"IntVar({self.name or self.index}:{self.lo}..{self.hi}" + \
            (f"\\{sorted(self.holes)}" if self.holes else "") + ")"

    # -- queries ------------------------------------------------------------

    def is_fixed(self) -> bool:
        return self.lo == self.hi

    def value(self) -> int:
        if self.lo != self.hi:
            raise ModelError(f"variable {self.name or self.index} is not fixed")
        return self.lo

    def contains(self, v: int) -> bool:
        return self.lo <= v <= self.hi and v not in self.holes

    def domain_values(self):
        """Iterate current domain values in increasing order."""
        holes = self.holes
        if not holes:
            yield from range(self.lo, self.hi + 1)
        else:
            for v in range(self.lo, self.hi + 1):
                if v not in holes:
                    yield v

    def snapshot(self) -> tuple[int, int, frozenset[int]]:
        """Exact domain state, for restoration tests."""
        return (self.lo, self.hi, frozenset(v for v in self.holes if self.lo < v < self.hi))

    # -- mutations (trailled) -------------------------------------------------

    def set_min(self, v: int) -> bool:
        if v <= self.lo:
            return True
        holes = self.holes
        while v in holes:
            v += 1
        if v > self.hi:
            return False
        removed = v - self.lo
        if holes:
            removed -= sum(1 for h in holes if self.lo < h < v)
        m = self.model
        m._trail.append(("lo", self, self.lo, self.size))
        self.lo = v
        self.size -= removed
        m._on_change(self)
        return True

    def set_max(self, v: int) -> bool:
        if v >= self.hi:
            return True
        holes = self.holes
        while v in holes:
            v -= 1
        if v < self.lo:
            return False
        removed = self.hi - v
        if holes:
            removed -= sum(1 for h in holes if v < h < self.hi)
        m = self.model
        m._trail.append(("hi", self, self.hi, self.size))
        self.hi = v
        self.size -= removed
        m._on_change(self)
        return True

    def fix(self, v: int) -> bool:
        return self.set_min(v) and self.set_max(v)

    def remove_value(self, v: int) -> bool:
        if v < self.lo or v > self.hi or v in self.holes:
            return True
        if v == self.lo:
            return self.set_min(v + 1)
        if v == self.hi:
            return self.set_max(v - 1)
        m = self.model
        m._trail.append(("hole", self, v))
        self.holes.add(v)
        self.size -= 1
        m._on_change(self)
        return True

    # -- helpers --------------------------------------------------------------

    def random_value(self, rng) -> int:
        """Uniform draw from the current domain."""
        if not self.holes:
            return rng.randint(self.lo, self.hi)
        if self.size <= 4096:
            vals = list(self.domain_values())
            return vals[rng.randrange(len(vals))]
        while True:
            v = rng.randint(self.lo, self.hi)
            if v not in self.holes:
                return v


class IntervalVar:
    """A time interval: three integer variables tied by start + duration = end."""

    __slots__ = ("start", "duration", "end", "name")

    def __init__(self, start: IntVar, duration: IntVar, end: IntVar, name: str = ""):
        self.start = start
        self.duration = duration
        self.end = end
        self.name = name

    def __repr__(self):
        return f"IntervalVar({self.name}: s={self.start.lo}..{self.start.hi}, " \
               f"d={self.duration.lo}..{self.duration.hi}, e={self.end.lo}..{self.end.hi})"


class Constraint:
    """Record of a posted constraint: its kind, variable scope, and parameters."""

    __slots__ = ("kind", "scope", "params")

    def __init__(self, kind: str, scope: Sequence[IntVar], params=None):
        self.kind = kind
        self.scope = list(scope)
        self.params = params

    def __repr__(self):
        return f"Constraint({self.kind}/{len(self.scope)})"


class Propagator:
    """Base class for filtering algorithms attached to a set of variables."""

    __slots__ = ("queued", "active")

    def __init__(self):
        self.queued = False
        self.active = True

    def propagate(self) -> bool:
        raise NotImplementedError

    def deactivate(self, model: "Model"):
        """Stop waking this propagator on the current branch (undone on backtrack)."""
        if self.active:
            model._trail.append(("act", self))
            self.active = False


class Model:
    """A finite-domain CP model: variables, posted constraints, trail."""

    def __init__(self, name: str = ""):
        self.name = name
        self.vars: list[IntVar] = []
        self.intervals: list[IntervalVar] = []
        self.constraints: list[Constraint] = []
        self.propagators: list[Propagator] = []
        self.inconsistent = False
        self._trail: list = []
        self._marks: list[int] = []
        self._queue: deque = deque()
        self._running: Optional[Propagator] = None

    # -- variable creation -----------------------------------------------------

    def new_int_var(self, domain: Iterable[int] | range, name: str = "") -> IntVar:
        """Create a variable with exactly the given finite domain."""
        if isinstance(domain, range):
            if len(domain) == 0:
                raise ModelError(f"empty domain for variable {name!r}")
            if domain.step == 1:
                v = IntVar(self, len(self.vars), domain.start, domain.stop - 1, set(), name)
                self.vars.append(v)
                return v
            domain = list(domain)
        values = sorted(set(domain))
        if not values:
            raise ModelError(f"empty domain for variable {name!r}")
        lo, hi = values[0], values[-1]
        holes = set(range(lo, hi + 1)) - set(values)
        v = IntVar(self, len(self.vars), lo, hi, holes, name)
        self.vars.append(v)
        return v

    def new_fixed(self, value: int, name: str = "") -> IntVar:
        return self.new_int_var((value,), name)

    def new_interval_var(self, start, duration, end=None, name: str = "",
                         post_sum: bool = True) -> IntervalVar:
        """Build an interval; start/duration/end may be IntVars or (lo, hi) bounds.

        Missing end bounds are derived from start and duration.  Posts
        start + duration = end unless the caller channels the chain itself.
        """
        sv = start if isinstance(start, IntVar) else \
            self.new_int_var(range(start[0], start[1] + 1), f"{name}.start")
        dv = duration if isinstance(duration, IntVar) else \
            self.new_int_var(range(duration[0], duration[1] + 1), f"{name}.dur")
        if end is None:
            ev = self.new_int_var(range(sv.lo + dv.lo, sv.hi + dv.hi + 1), f"{name}.end")
        elif isinstance(end, IntVar):
            ev = end
        else:
            ev = self.new_int_var(range(end[0], end[1] + 1), f"{name}.end")
        iv = IntervalVar(sv, dv, ev, name)
        self.intervals.append(iv)
        if post_sum:
            self.add_sum_eq(sv, dv, ev)
        return iv

    def add_timeline(self, intervals: Sequence[IntervalVar]) -> bool:
        """One sweep propagator for a chain of intervals sharing boundary
        variables (start + duration = end for each)."""
        from . import propagators as P
        triples = [(iv.start, iv.duration, iv.end) for iv in intervals]
        scope = []
        for s, d, e in triples:
            scope.extend((s, d, e))
        # dedupe aliased boundary vars while keeping order
        seen, watch = set(), []
        for v in scope:
            if id(v) not in seen:
                seen.add(id(v))
                watch.append(v)
        return self.post(P.TimelineSweep(triples), "equality", watch, watch=watch)

    # -- trail / backtracking ----------------------------------------------------

    def push_level(self):
        self._marks.append(len(self._trail))

    def pop_level(self):
        mark = self._marks.pop()
        trail = self._trail
        while len(trail) > mark:
            rec = trail.pop()
            tag = rec[0]
            if tag == "lo":
                _, var, old, size = rec
                var.lo = old
                var.size = size
            elif tag == "hi":
                _, var, old, size = rec
                var.hi = old
                var.size = size
            elif tag == "hole":
                _, var, v = rec
                var.holes.discard(v)
                var.size += 1
            else:  # "act"
                rec[1].active = True

    @property
    def depth(self) -> int:
        return len(self._marks)

    # -- propagation ---------------------------------------------------------------

    def _on_change(self, var: IntVar):
        # propagators reach their own fixpoint internally, so the one
        # currently running never needs a wake-up from its own changes
        queue = self._queue
        running = self._running
        for p in var.watchers:
            if not p.queued and p.active and p is not running:
                p.queued = True
                queue.append(p)

    def enqueue(self, prop: Propagator):
        if not prop.queued and prop.active:
            prop.queued = True
            self._queue.append(prop)

    def propagate(self) -> bool:
        """Run the propagation queue to fixpoint.  False on domain wipe-out."""
        queue = self._queue
        while queue:
            p = queue.popleft()
            p.queued = False
            if not p.active:
                continue
            self._running = p
            ok = p.propagate()
            self._running = None
            if not ok:
                while queue:
                    queue.popleft().queued = False
                return False
        return True

    # -- posting ---------------------------------------------------------------------

    def _check_owned(self, *vars_: IntVar):
        for v in vars_:
            if v.model is not self:
                raise ModelError(f"variable {v.name or v.index} belongs to another model")

    def post(self, prop: Propagator, kind: str, scope: Sequence[IntVar],
             params=None, watch: Optional[Sequence[IntVar]] = None) -> bool:
        """Register a propagator, wire its watchers, and propagate at the root.

        Returns False (and marks the model inconsistent) if root propagation
        wipes out a domain; True otherwise.
        """
        self._check_owned(*scope)
        self.propagators.append(prop)
        self.constraints.append(Constraint(kind, scope, params))
        for v in (watch if watch is not None else scope):
            v.watchers.append(prop)
        self.enqueue(prop)
        if self.depth == 0:
            if not self.propagate():
                self.inconsistent = True
                return False
        return True

    # convenience posting API (imported lazily to avoid a cycle)

    def add_sum_eq(self, x: IntVar, y: IntVar, z: IntVar) -> bool:
        from . import propagators as P
        return self.post(P.SumEq(x, y, z), "equality", [x, y, z])

    def add_eq(self, x: IntVar, y: IntVar) -> bool:
        from . import propagators as P
        return self.post(P.EqVar(x, y), "equality", [x, y])

    def add_le_offset(self, x: IntVar, c: int, y: IntVar) -> bool:
        """x + c <= y."""
        from . import propagators as P
        return self.post(P.LeOffset(x, c, y), "linear-inequality", [x, y], params=c)

    def add_element(self, index: IntVar, values: Sequence[int], target: IntVar) -> bool:
        """target == values[index] over a constant array (0-based index)."""
        from . import propagators as P
        self._check_owned(index, target)
        if not index.set_min(0) or not index.set_max(len(values) - 1):
            self.inconsistent = True
            return False
        return self.post(P.ElementConst(index, list(values), target),
                         "element", [index, target], params=list(values))

    def add_element_var(self, index: IntVar, array: Sequence[IntVar], target: IntVar) -> bool:
        """target == array[index] over an array of variables (0-based index)."""
        from . import propagators as P
        self._check_owned(index, target, *array)
        if not index.set_min(0) or not index.set_max(len(array) - 1):
            self.inconsistent = True
            return False
        prop = P.ElementVar(index, list(array), target)
        return self.post(prop, "element", [index, target, *array],
                         watch=[index, target])

    def add_table(self, vars_: Sequence[IntVar], tuples: Iterable[tuple]) -> bool:
        from . import propagators as P
        return self.post(P.Table(list(vars_), [tuple(t) for t in tuples]),
                         "table", vars_)

    def add_strictly_increasing(self, vars_: Sequence[IntVar]) -> bool:
        from . import propagators as P
        return self.post(P.StrictlyIncreasing(list(vars_)),
                         "strictly-increasing-chain", vars_)

    def add_all_different(self, vars_: Sequence[IntVar]) -> bool:
        from . import propagators as P
        return self.post(P.AllDifferent(list(vars_)), "all-different", vars_)

    def add_no_overlap_vars(self, s1: IntVar, e1: IntVar,
                            s2: IntVar, e2: IntVar) -> bool:
        """[s1, e1) and [s2, e2) must not overlap."""
        from . import propagators as P
        prop = P.NoOverlapPair(s1, e1, s2, e2)
        return self.post(prop, "no-overlap", [s1, e1, s2, e2])

    def add_no_overlap_pair(self, u: IntervalVar, v: IntervalVar) -> bool:
        return self.add_no_overlap_vars(u.start, u.end, v.start, v.end)

    def add_no_overlap(self, intervals: Sequence[IntervalVar]) -> bool:
        ok = True
        for i in range(len(intervals)):
            for j in range(i + 1, len(intervals)):
                ok = self.add_no_overlap_pair(intervals[i], intervals[j]) and ok
        return ok

    def add_conditional_no_overlap(self, p: IntVar, q: IntVar,
                                   conflicts: set[tuple[int, int]],
                                   u_start: IntVar, u_end: IntVar,
                                   v_start: IntVar, v_end: IntVar) -> bool:
        """Once p and q are fixed to a conflicting pair, [u) and [v) must not overlap."""
        from . import propagators as P
        prop = P.ConditionalNoOverlap(p, q, conflicts, u_start, u_end, v_start, v_end)
        return self.post(prop, "conditional-no-overlap",
                         [p, q, u_start, u_end, v_start, v_end],
                         params=conflicts, watch=[p, q])

    def add_max_eq(self, target: IntVar, xs: Sequence[IntVar]) -> bool:
        from . import propagators as P
        return self.post(P.MaxEq(target, list(xs)), "max-of", [target, *xs])

    def add_tail_freeze(self, horizon: IntVar, position: int,
                        c_prev: IntVar, c_cur: IntVar,
                        zero_durations: Sequence[IntVar]) -> bool:
        """If horizon < position, freeze c_cur to c_prev and zero the durations."""
        from . import propagators as P
        prop = P.TailFreeze(horizon, position, c_prev, c_cur, list(zero_durations))
        return self.post(prop, "tail-freeze",
                         [horizon, c_prev, c_cur, *zero_durations], params=position)

    def add_travel_channel(self, u: IntVar, v: IntVar, duration: IntVar,
                           matrix: Sequence[Sequence[int]]) -> bool:
        """duration == matrix[u][v] over a constant square matrix."""
        from . import propagators as P
        prop = P.TravelChannel(u, v, duration, matrix)
        hi = max(max(row) for row in matrix)
        if not duration.set_max(hi):
            self.inconsistent = True
            return False
        return self.post(prop, "element", [u, v, duration], params=matrix)

    # temporal relations expand to the linear catalog

    def add_before(self, first: IntervalVar, second: IntervalVar) -> bool:
        return self.add_le_offset(first.end, 0, second.start)

    def add_during(self, inner: IntervalVar, outer: IntervalVar) -> bool:
        ok = self.add_le_offset(outer.start, 0, inner.start)
        return self.add_le_offset(inner.end, 0, outer.end) and ok

    def add_starts_together(self, a: IntervalVar, b: IntervalVar) -> bool:
        return self.add_eq(a.start, b.start)

    def add_ends_together(self, a: IntervalVar, b: IntervalVar) -> bool:
        return self.add_eq(a.end, b.end)

    def add_min_gap(self, first: IntervalVar, second: IntervalVar, gap: int) -> bool:
        return self.add_le_offset(first.end, gap, second.start)
