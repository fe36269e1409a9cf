"""Propagator catalog for the finite-domain engine.

Each propagator filters the domains of its scope and returns False exactly
when some domain would become empty.  None of them removes a value that
still participates in a solution of its own constraint.
"""

from __future__ import annotations

from .model import IntVar, Propagator

# exact-domain syncs are only attempted below this size
_SMALL = 64


def _fixpoint(model, body) -> bool:
    """Re-run `body` until it stops changing domains (trail stays put)."""
    trail = model._trail
    while True:
        mark = len(trail)
        if not body():
            return False
        if len(trail) == mark:
            return True


def _sync_small(x: IntVar, y: IntVar) -> bool:
    """Remove values of x/y unsupported by the other side of an equality."""
    if x.size <= _SMALL and y.size <= _SMALL and (x.holes or y.holes):
        for v in list(x.domain_values()):
            if not y.contains(v) and not x.remove_value(v):
                return False
        for v in list(y.domain_values()):
            if not x.contains(v) and not y.remove_value(v):
                return False
    return True


def _eq_bounds_pass(x: IntVar, y: IntVar) -> bool:
    return (x.set_min(y.lo) and x.set_max(y.hi) and
            y.set_min(x.lo) and y.set_max(x.hi) and _sync_small(x, y))


def _eq_bounds(x: IntVar, y: IntVar) -> bool:
    return _fixpoint(x.model, lambda: _eq_bounds_pass(x, y))


class SumEq(Propagator):
    """x + y == z with bounds reasoning; exact value sync once one operand
    fixes and the other two are small (keeps holes aligned across offsets)."""

    __slots__ = ("x", "y", "z")

    def __init__(self, x, y, z):
        super().__init__()
        self.x, self.y, self.z = x, y, z

    @staticmethod
    def _offset_sync(free: IntVar, c: int, z: IntVar) -> bool:
        # free + c == z
        if free.size > _SMALL * 2 or z.size > _SMALL * 2 or not (free.holes or z.holes):
            return True
        for v in list(free.domain_values()):
            if not z.contains(v + c) and not free.remove_value(v):
                return False
        for v in list(z.domain_values()):
            if not free.contains(v - c) and not z.remove_value(v):
                return False
        return True

    def _pass(self) -> bool:
        x, y, z = self.x, self.y, self.z
        if not (z.set_min(x.lo + y.lo) and z.set_max(x.hi + y.hi) and
                x.set_min(z.lo - y.hi) and x.set_max(z.hi - y.lo) and
                y.set_min(z.lo - x.hi) and y.set_max(z.hi - x.lo)):
            return False
        if x.lo == x.hi:
            return self._offset_sync(y, x.lo, z)
        if y.lo == y.hi:
            return self._offset_sync(x, y.lo, z)
        return True

    def propagate(self) -> bool:
        return _fixpoint(self.x.model, self._pass)


class EqVar(Propagator):
    __slots__ = ("x", "y")

    def __init__(self, x, y):
        super().__init__()
        self.x, self.y = x, y

    def propagate(self) -> bool:
        return _eq_bounds(self.x, self.y)


class LeOffset(Propagator):
    """x + c <= y."""

    __slots__ = ("x", "c", "y")

    def __init__(self, x, c, y):
        super().__init__()
        self.x, self.c, self.y = x, c, y

    def propagate(self) -> bool:
        return self.y.set_min(self.x.lo + self.c) and self.x.set_max(self.y.hi - self.c)


class ElementConst(Propagator):
    """target == values[index] for a constant array."""

    __slots__ = ("index", "values", "target")

    def __init__(self, index, values, target):
        super().__init__()
        self.index, self.values, self.target = index, values, target

    def propagate(self) -> bool:
        return _fixpoint(self.index.model, self._pass)

    def _pass(self) -> bool:
        index, values, target = self.index, self.values, self.target
        feas = []
        for i in list(index.domain_values()):
            if target.contains(values[i]):
                feas.append(values[i])
            elif not index.remove_value(i):
                return False
        if not feas:
            return False
        if not target.set_min(min(feas)) or not target.set_max(max(feas)):
            return False
        if target.size <= _SMALL and len(feas) <= _SMALL:
            support = set(feas)
            for v in list(target.domain_values()):
                if v not in support and not target.remove_value(v):
                    return False
        return True


class ElementVar(Propagator):
    """target == array[index] for an array of variables.

    Watches only index and target up front; once the index fixes, the chosen
    entry is watched too (the watch persists over backtracking and is
    filtered on wake-up, which keeps queue churn low for wide arrays).
    Until then only the index is filtered; bound updates are not forwarded
    into the target, which stops oscillation across wide time domains.
    """

    __slots__ = ("index", "array", "target", "_watched")

    def __init__(self, index, array, target):
        super().__init__()
        self.index, self.array, self.target = index, array, target
        self._watched: set[int] = set()

    def propagate(self) -> bool:
        return _fixpoint(self.index.model, self._pass)

    def _pass(self) -> bool:
        index, array, target = self.index, self.array, self.target
        if index.is_fixed():
            i = index.lo
            if i not in self._watched:
                self._watched.add(i)
                array[i].watchers.append(self)
            return _eq_bounds(array[i], target)
        for i in list(index.domain_values()):
            a = array[i]
            if a.hi < target.lo or a.lo > target.hi:
                if not index.remove_value(i):
                    return False
        return True


class Table(Propagator):
    """Positive table: the scope tuple must match one of the allowed rows."""

    __slots__ = ("vars", "tuples")

    def __init__(self, vars_, tuples):
        super().__init__()
        self.vars = vars_
        self.tuples = tuples

    def propagate(self) -> bool:
        return _fixpoint(self.vars[0].model, self._pass)

    def _pass(self) -> bool:
        vars_ = self.vars
        supported = [set() for _ in vars_]
        alive = 0
        for row in self.tuples:
            ok = True
            for k, v in enumerate(row):
                if not vars_[k].contains(v):
                    ok = False
                    break
            if ok:
                alive += 1
                for k, v in enumerate(row):
                    supported[k].add(v)
        if alive == 0:
            return False
        for k, var in enumerate(vars_):
            sup = supported[k]
            for v in list(var.domain_values()):
                if v not in sup and not var.remove_value(v):
                    return False
        return True


class StrictlyIncreasing(Propagator):
    __slots__ = ("vars",)

    def __init__(self, vars_):
        super().__init__()
        self.vars = vars_

    def propagate(self) -> bool:
        vs = self.vars
        for i in range(1, len(vs)):
            if not vs[i].set_min(vs[i - 1].lo + 1):
                return False
        for i in range(len(vs) - 2, -1, -1):
            if not vs[i].set_max(vs[i + 1].hi - 1):
                return False
        return True


class AllDifferent(Propagator):
    """Value elimination: fixed values are removed from all other domains."""

    __slots__ = ("vars",)

    def __init__(self, vars_):
        super().__init__()
        self.vars = vars_

    def propagate(self) -> bool:
        return _fixpoint(self.vars[0].model, self._pass)

    def _pass(self) -> bool:
        fixed = {}
        for v in self.vars:
            if v.lo == v.hi:
                if v.lo in fixed and fixed[v.lo] is not v:
                    return False
                fixed[v.lo] = v
        if not fixed:
            return True
        for v in self.vars:
            if v.lo != v.hi:
                for val, owner in fixed.items():
                    if not v.remove_value(val):
                        return False
        return True


def _disjoint_pair(s1, e1, s2, e2, model) -> tuple[bool, bool]:
    """Prune the disjunction end1 <= start2 OR end2 <= start1.

    Returns (ok, entailed).
    """
    first_possible = e1.lo <= s2.hi
    second_possible = e2.lo <= s1.hi
    if not first_possible and not second_possible:
        return False, False
    if first_possible and second_possible:
        entailed = e1.hi <= s2.lo or e2.hi <= s1.lo
        return True, entailed
    if first_possible:
        ok = e1.set_max(s2.hi) and s2.set_min(e1.lo)
    else:
        ok = e2.set_max(s1.hi) and s1.set_min(e2.lo)
    return ok, False


class NoOverlapPair(Propagator):
    """Two intervals on one exclusive resource: one ends before the other starts."""

    __slots__ = ("s1", "e1", "s2", "e2")

    def __init__(self, s1, e1, s2, e2):
        super().__init__()
        self.s1, self.e1, self.s2, self.e2 = s1, e1, s2, e2

    def propagate(self) -> bool:
        ok, entailed = _disjoint_pair(self.s1, self.e1, self.s2, self.e2,
                                      self.s1.model)
        if ok and entailed:
            self.deactivate(self.s1.model)
        return ok


class ConditionalNoOverlap(Propagator):
    """Collision guard: two occupancy windows must not overlap once their
    configuration variables are fixed to a conflicting pair.

    Before both are fixed it prunes only when every remaining combination
    conflicts.  Time variables are watched lazily, from first activation.
    """

    __slots__ = ("p", "q", "conflicts", "s1", "e1", "s2", "e2", "_time_watched")

    def __init__(self, p, q, conflicts, s1, e1, s2, e2):
        super().__init__()
        self.p, self.q = p, q
        self.conflicts = conflicts
        self.s1, self.e1, self.s2, self.e2 = s1, e1, s2, e2
        self._time_watched = False

    def _watch_times(self):
        if not self._time_watched:
            self._time_watched = True
            for v in (self.s1, self.e1, self.s2, self.e2):
                v.watchers.append(self)

    def propagate(self) -> bool:
        p, q = self.p, self.q
        model = p.model
        if p.lo == p.hi and q.lo == q.hi:
            if (p.lo, q.lo) in self.conflicts:
                self._watch_times()
                ok, entailed = _disjoint_pair(self.s1, self.e1, self.s2, self.e2, model)
                if ok and entailed:
                    self.deactivate(model)
                return ok
            self.deactivate(model)
            return True
        if p.size * q.size <= 16:
            conflicts = self.conflicts
            for u in p.domain_values():
                for v in q.domain_values():
                    if (u, v) not in conflicts:
                        return True
            self._watch_times()
            ok, _ = _disjoint_pair(self.s1, self.e1, self.s2, self.e2, model)
            return ok
        return True


class MaxEq(Propagator):
    """target == max(xs)."""

    __slots__ = ("target", "xs")

    def __init__(self, target, xs):
        super().__init__()
        self.target, self.xs = target, xs

    def propagate(self) -> bool:
        return _fixpoint(self.target.model, self._pass)

    def _pass(self) -> bool:
        t, xs = self.target, self.xs
        if not t.set_min(max(x.lo for x in xs)):
            return False
        if not t.set_max(max(x.hi for x in xs)):
            return False
        support = None
        n_support = 0
        for x in xs:
            if not x.set_max(t.hi):
                return False
            if x.hi >= t.lo:
                support = x
                n_support += 1
        if n_support == 1 and not support.set_min(t.lo):
            return False
        return True


class TailFreeze(Propagator):
    """Positions beyond the horizon repeat the previous configuration and take
    zero time; conversely any activity at this position lifts the horizon."""

    __slots__ = ("horizon", "position", "c_prev", "c_cur", "zero_durations")

    def __init__(self, horizon, position, c_prev, c_cur, zero_durations):
        super().__init__()
        self.horizon = horizon
        self.position = position
        self.c_prev, self.c_cur = c_prev, c_cur
        self.zero_durations = zero_durations

    def propagate(self) -> bool:
        h, pos = self.horizon, self.position
        if h.lo >= pos:
            self.deactivate(h.model)
            return True
        if h.hi < pos:
            if not _eq_bounds(self.c_prev, self.c_cur):
                return False
            for z in self.zero_durations:
                if not z.set_max(0):
                    return False
            return True
        # horizon still open: look for evidence that this position is active
        for z in self.zero_durations:
            if z.lo > 0:
                return h.set_min(pos)
        a, b = self.c_prev, self.c_cur
        if a.hi < b.lo or b.hi < a.lo:
            return h.set_min(pos)
        if a.size <= _SMALL and b.size <= _SMALL and (a.holes or b.holes):
            if all(not b.contains(v) for v in a.domain_values()):
                return h.set_min(pos)
        return True


class TravelChannel(Propagator):
    """duration == matrix[u][v] for a constant all-pairs duration matrix.

    Filters lazily: full pair reasoning only once one endpoint is fixed.
    """

    __slots__ = ("u", "v", "duration", "matrix")

    def __init__(self, u, v, duration, matrix):
        super().__init__()
        self.u, self.v, self.duration = u, v, duration
        self.matrix = matrix

    def propagate(self) -> bool:
        return _fixpoint(self.u.model, self._pass)

    def _one_fixed(self, fixed_val: int, free: IntVar, by_row: bool) -> bool:
        matrix, dur = self.matrix, self.duration
        lo, hi = None, None
        for w in list(free.domain_values()):
            d = matrix[fixed_val][w] if by_row else matrix[w][fixed_val]
            if d < dur.lo or d > dur.hi:
                if not free.remove_value(w):
                    return False
                continue
            lo = d if lo is None else min(lo, d)
            hi = d if hi is None else max(hi, d)
        if lo is None:
            return False
        return dur.set_min(lo) and dur.set_max(hi)

    def _pass(self) -> bool:
        u, v = self.u, self.v
        u_fixed, v_fixed = u.lo == u.hi, v.lo == v.hi
        if u_fixed and v_fixed:
            d = self.matrix[u.lo][v.lo]
            return self.duration.set_min(d) and self.duration.set_max(d)
        if u_fixed:
            return self._one_fixed(u.lo, v, True)
        if v_fixed:
            return self._one_fixed(v.lo, u, False)
        return True


class TimelineSweep(Propagator):
    """Bounds fixpoint over one alternating wait/travel chain.

    The chain shares variables (a travel starts at the previous wait's end
    and ends at the next wait's start), so a forward and a backward sweep
    per round replace a long cascade of three-variable sum propagators.
    """

    __slots__ = ("triples",)

    def __init__(self, triples):
        # [(start, duration, end)] in chain order: w1, t1, w2, t2, ...
        super().__init__()
        self.triples = triples

    def propagate(self) -> bool:
        triples = self.triples
        trail = triples[0][0].model._trail
        while True:
            mark = len(trail)
            for s, d, e in triples:
                if not (e.set_min(s.lo + d.lo) and e.set_max(s.hi + d.hi)):
                    return False
            for i in range(len(triples) - 1, -1, -1):
                s, d, e = triples[i]
                if not (s.set_max(e.hi - d.lo) and s.set_min(e.lo - d.hi) and
                        d.set_max(e.hi - s.lo) and d.set_min(e.lo - s.hi)):
                    return False
            if len(trail) == mark:
                return True


class HorizonCount(Propagator):
    """Lower-bounds a series horizon: home plus one position per slot whose
    visiting constraint is already fixed to this component."""

    __slots__ = ("horizon", "assignments", "code")

    def __init__(self, horizon, assignments, code):
        super().__init__()
        self.horizon = horizon
        self.assignments = assignments  # list of (component var, slot count)
        self.code = code

    def propagate(self) -> bool:
        count = 0
        for a, slots in self.assignments:
            if a.lo == a.hi and a.lo == self.code:
                count += slots
        return self.horizon.set_min(1 + count)
