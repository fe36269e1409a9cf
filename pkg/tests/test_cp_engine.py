"""Engine-level tests: domains, propagators, search, restarts."""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from staams.cp import (
    LubyRestarts,
    Model,
    ModelError,
    Phase,
    SearchStrategy,
    SolveBudget,
    SolveStatus,
    ValueOrder,
    VarOrder,
    luby_restart_length,
    solve,
)


def single_phase(vars_, value_order=ValueOrder.MIN):
    return SearchStrategy(phases=[Phase("all", list(vars_), VarOrder.FIRST_UNBOUND, value_order)])


class TestVariables:
    def test_range_domain(self):
        m = Model()
        x = m.new_int_var(range(0, 6))
        assert (x.lo, x.hi, x.size) == (0, 5, 6)

    def test_singleton(self):
        m = Model()
        x = m.new_int_var([3])
        assert x.is_fixed() and x.value() == 3

    def test_holes_preserved(self):
        m = Model()
        x = m.new_int_var([1, 4, 9])
        assert list(x.domain_values()) == [1, 4, 9]
        for v in (2, 3, 5, 6, 7, 8):
            assert not x.contains(v)

    def test_empty_domain_rejected(self):
        m = Model()
        with pytest.raises(ModelError):
            m.new_int_var([])

    def test_foreign_variable_rejected(self):
        m1, m2 = Model(), Model()
        x = m1.new_int_var(range(3))
        y = m2.new_int_var(range(3))
        with pytest.raises(ModelError):
            m2.add_eq(x, y)


class TestPropagationExamples:
    def test_element_var_channels_index(self):
        m = Model()
        i = m.new_int_var(range(0, 3))
        arr = [m.new_fixed(7), m.new_fixed(8), m.new_fixed(9)]
        t = m.new_int_var([8])
        assert m.add_element_var(i, arr, t)
        assert i.is_fixed() and i.value() == 1

    def test_strictly_increasing_bounds(self):
        m = Model()
        x1 = m.new_int_var(range(1, 6))
        x2 = m.new_int_var(range(1, 6))
        assert m.add_strictly_increasing([x1, x2])
        assert x1.hi == 4 and x2.lo == 2

    def test_no_overlap_pushes_start(self):
        # independent oracle: enumerate feasible starts of B given A = [0, 5)
        feasible = [bs for bs in range(0, 11) if 5 <= bs or bs + 5 <= 0]
        expected_min = min(feasible)

        m = Model()
        a = m.new_interval_var((0, 10), (5, 5), name="a")
        b = m.new_interval_var((0, 10), (5, 5), name="b")
        assert m.add_no_overlap([a, b])
        assert a.start.fix(0) and m.propagate()
        assert b.start.lo == expected_min == 5

    def test_element_const(self):
        m = Model()
        i = m.new_int_var(range(0, 4))
        t = m.new_int_var(range(0, 100))
        assert m.add_element(i, [10, 20, 30, 40], t)
        assert (t.lo, t.hi) == (10, 40)
        assert t.set_max(25) and m.propagate()
        assert list(i.domain_values()) == [0, 1]


class TestLuby:
    def test_first_seven(self):
        assert [luby_restart_length(k, 1) for k in range(1, 8)] == [1, 1, 2, 1, 1, 2, 4]

    def test_k15(self):
        assert luby_restart_length(15, 1) == 8

    def test_scaling(self):
        assert luby_restart_length(3, 100) == 200

    def test_bad_args(self):
        with pytest.raises(ValueError):
            luby_restart_length(0, 1)


class TestSearch:
    def test_minimize_single_var(self):
        m = Model()
        x = m.new_int_var(range(2, 5))
        res = solve(m, single_phase([x]), SolveBudget(failures=1000), objective=x)
        assert res.status is SolveStatus.OPTIMAL
        assert res.best.value(x) == 2

    def test_cyclic_inequality_infeasible(self):
        m = Model()
        x = m.new_int_var(range(0, 5))
        y = m.new_int_var(range(0, 5))
        m.add_le_offset(x, 1, y)  # x < y
        m.add_le_offset(y, 1, x)  # y < x
        res = solve(m, single_phase([x, y]), SolveBudget(failures=1000))
        assert res.status is SolveStatus.INFEASIBLE
        assert not res.solutions

    def test_budget_exhausted_is_unknown(self):
        m = Model()
        xs = [m.new_int_var(range(0, 30)) for _ in range(12)]
        m.add_all_different(xs)
        # an unsatisfiable pigeonhole-ish tail to keep searching
        for v in xs:
            v.set_max(9)
        res = solve(m, single_phase(xs), SolveBudget(failures=3))
        assert res.status in (SolveStatus.UNKNOWN, SolveStatus.INFEASIBLE)
        if res.status is SolveStatus.UNKNOWN:
            assert not res.solutions

    def test_incumbents_strictly_decreasing(self):
        m = Model()
        x = m.new_int_var(range(0, 8))
        y = m.new_int_var(range(0, 8))
        s = m.new_int_var(range(0, 20))
        m.add_sum_eq(x, y, s)
        m.add_le_offset(x, 1, y)
        strat = single_phase([y, x], ValueOrder.RANDOM)
        strat.seed = 7
        res = solve(m, strat, SolveBudget(failures=10_000), objective=s)
        values = [sol.objective for sol in res.solutions]
        assert values == sorted(set(values), reverse=False) or \
            all(a > b for a, b in zip(values, values[1:]))
        assert res.status is SolveStatus.OPTIMAL
        assert res.best.objective == 1

    def test_determinism_same_seed(self):
        def run():
            m = Model()
            xs = [m.new_int_var(range(0, 6)) for _ in range(5)]
            m.add_all_different(xs)
            s = m.new_int_var(range(0, 40))
            # sum of first three as a crude objective
            t = m.new_int_var(range(0, 12))
            m.add_sum_eq(xs[0], xs[1], t)
            m.add_sum_eq(t, xs[2], s)
            strat = single_phase(xs, ValueOrder.RANDOM)
            strat.seed = 99
            res = solve(m, strat, SolveBudget(failures=200), objective=s)
            return [(sol.objective, sol.failures) for sol in res.solutions]

        assert run() == run()

    def test_solution_limit(self):
        m = Model()
        x = m.new_int_var(range(0, 10))
        res = solve(m, single_phase([x]), SolveBudget(solutions=1))
        assert len(res.solutions) == 1


class TestRestoration:
    def test_push_pop_restores_bit_exact(self):
        rng = random.Random(42)
        m = Model()
        xs = [m.new_int_var(range(0, 20)) for _ in range(6)]
        m.add_all_different(xs)
        m.add_strictly_increasing(xs[:3])
        assert m.propagate()
        snapshot = [v.snapshot() for v in m.vars]
        for _ in range(50):
            depth = rng.randint(1, 4)
            for _ in range(depth):
                m.push_level()
                v = xs[rng.randrange(len(xs))]
                if v.is_fixed():
                    continue
                op = rng.randrange(3)
                if op == 0:
                    v.set_min(rng.randint(v.lo, v.hi))
                elif op == 1:
                    v.set_max(rng.randint(v.lo, v.hi))
                else:
                    v.remove_value(rng.randint(v.lo, v.hi))
                m.propagate()
            for _ in range(depth):
                m.pop_level()
            assert [v.snapshot() for v in m.vars] == snapshot


def supported_values(domains, predicate):
    """Brute-force support filter: values that occur in a satisfying tuple."""
    support = [set() for _ in domains]
    for combo in itertools.product(*domains):
        if predicate(combo):
            for k, v in enumerate(combo):
                support[k].add(v)
    return support


small_domain = st.lists(st.integers(0, 5), min_size=1, max_size=6).map(lambda v: sorted(set(v)))


class TestPropagatorSoundness:
    """No propagator may remove a value supported by its own constraint."""

    def check(self, domains, post, predicate):
        support = supported_values(domains, predicate)
        m = Model()
        vars_ = [m.new_int_var(d) for d in domains]
        ok = post(m, vars_)
        if not ok:
            # root wipe-out is only allowed when nothing is satisfiable
            assert all(not s for s in support)
            return
        for var, sup in zip(vars_, support):
            for v in sup:
                assert var.contains(v), f"{var} lost supported value {v}"

    @given(small_domain, small_domain, small_domain)
    @settings(max_examples=60, deadline=None)
    def test_sum_eq(self, d1, d2, d3):
        self.check([d1, d2, d3],
                   lambda m, vs: m.add_sum_eq(*vs),
                   lambda t: t[0] + t[1] == t[2])

    @given(small_domain, small_domain)
    @settings(max_examples=60, deadline=None)
    def test_eq(self, d1, d2):
        self.check([d1, d2],
                   lambda m, vs: m.add_eq(*vs),
                   lambda t: t[0] == t[1])

    @given(small_domain, small_domain, st.integers(-3, 3))
    @settings(max_examples=60, deadline=None)
    def test_le_offset(self, d1, d2, c):
        self.check([d1, d2],
                   lambda m, vs: m.add_le_offset(vs[0], c, vs[1]),
                   lambda t: t[0] + c <= t[1])

    @given(st.lists(small_domain, min_size=2, max_size=4))
    @settings(max_examples=60, deadline=None)
    def test_strictly_increasing(self, ds):
        self.check(ds,
                   lambda m, vs: m.add_strictly_increasing(vs),
                   lambda t: all(a < b for a, b in zip(t, t[1:])))

    @given(st.lists(small_domain, min_size=2, max_size=4))
    @settings(max_examples=60, deadline=None)
    def test_all_different(self, ds):
        self.check(ds,
                   lambda m, vs: m.add_all_different(vs),
                   lambda t: len(set(t)) == len(t))

    @given(small_domain, small_domain,
           st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)),
                    min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_table(self, d1, d2, rows):
        self.check([d1, d2],
                   lambda m, vs: m.add_table(vs, rows),
                   lambda t: tuple(t) in {tuple(r) for r in rows})

    @given(small_domain, st.lists(st.integers(0, 9), min_size=1, max_size=5),
           small_domain)
    @settings(max_examples=60, deadline=None)
    def test_element_const(self, di, values, dt):
        di = [v for v in di if v < len(values)]
        if not di:
            return
        self.check([di, dt],
                   lambda m, vs: m.add_element(vs[0], values, vs[1]),
                   lambda t: values[t[0]] == t[1])

    @given(small_domain, small_domain, small_domain, small_domain)
    @settings(max_examples=40, deadline=None)
    def test_max_eq(self, dt, d1, d2, d3):
        self.check([dt, d1, d2, d3],
                   lambda m, vs: m.add_max_eq(vs[0], vs[1:]),
                   lambda t: t[0] == max(t[1:]))

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_no_overlap(self, data):
        s1 = data.draw(small_domain)
        d1 = data.draw(small_domain)
        s2 = data.draw(small_domain)
        d2 = data.draw(small_domain)

        def post(m, vs):
            a = m.new_interval_var(vs[0], vs[1], name="a")
            b = m.new_interval_var(vs[2], vs[3], name="b")
            return m.add_no_overlap([a, b])

        def pred(t):
            e1, e2 = t[0] + t[1], t[2] + t[3]
            return e1 <= t[2] or e2 <= t[0]

        self.check([s1, d1, s2, d2], post, pred)


class TestRestarts:
    def _pigeonhole(self):
        m = Model()
        xs = [m.new_int_var(range(0, 3)) for _ in range(4)]
        m.add_all_different(xs)
        return m, xs

    def test_unsat_proved_despite_restarts(self):
        m, xs = self._pigeonhole()
        strat = SearchStrategy(
            phases=[Phase("all", xs, VarOrder.FIRST_UNBOUND, ValueOrder.RANDOM)],
            restarts=LubyRestarts(scale=1), seed=3)
        res = solve(m, strat, SolveBudget(failures=100_000))
        assert res.status is SolveStatus.INFEASIBLE

    def test_optimal_preserved_with_restarts(self):
        m = Model()
        xs = [m.new_int_var(range(0, 6)) for _ in range(4)]
        m.add_all_different(xs)
        obj = m.new_int_var(range(0, 24))
        t1 = m.new_int_var(range(0, 12))
        t2 = m.new_int_var(range(0, 18))
        m.add_sum_eq(xs[0], xs[1], t1)
        m.add_sum_eq(t1, xs[2], t2)
        m.add_sum_eq(t2, xs[3], obj)
        strat = SearchStrategy(
            phases=[Phase("all", xs, VarOrder.FIRST_UNBOUND, ValueOrder.RANDOM)],
            restarts=LubyRestarts(scale=2), seed=11)
        res = solve(m, strat, SolveBudget(failures=100_000), objective=obj)
        assert res.status is SolveStatus.OPTIMAL
        assert res.best.objective == 0 + 1 + 2 + 3
        assert res.restarts > 0

    def test_min_domain_ordering(self):
        m = Model()
        a = m.new_int_var(range(0, 4), "a")   # size 4
        b = m.new_int_var(range(0, 2), "b")   # size 2
        c = m.new_int_var(range(0, 9), "c")   # size 9
        picked = []
        strat = SearchStrategy(
            phases=[Phase("all", [a, b, c], VarOrder.MIN_DOMAIN, ValueOrder.MIN)])
        solve(m, strat, SolveBudget(solutions=1),
              on_decision=lambda v, val, ph: picked.append(v.name))
        assert picked[0] == "b"

    def test_min_domain_tie_breaks_by_order(self):
        m = Model()
        a = m.new_int_var(range(0, 2), "a")
        b = m.new_int_var(range(0, 2), "b")
        picked = []
        strat = SearchStrategy(
            phases=[Phase("all", [a, b], VarOrder.MIN_DOMAIN, ValueOrder.MIN)])
        solve(m, strat, SolveBudget(solutions=1),
              on_decision=lambda v, val, ph: picked.append(v.name))
        assert picked[0] == "a"
