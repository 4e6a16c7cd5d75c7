import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

import popcolor.lp as lpmod
from oracles import chromatic_number
from popcolor.families import complete, cycle, myciel, petersen, random_connected
from popcolor.models import G, IlpModel, LinCon, ModelKind, Variable, VarRef, build_model
from popcolor.lp import (
    CompiledLp,
    LpMagnitudeError,
    LpStatus,
    LpTimeout,
    lp_value,
    relax,
    solve_lp,
    verify_solution,
)
from popcolor.preprocess import dsatur_upper_bound
from popcolor.verify import default_q, nu

F = Fraction
KINDS = [k.value for k in ModelKind]

# Exact optima of the relaxations, H = DSATUR bound (K4 uses H=4), q = default_q.
# Frozen from the exact solver; test_float_cross_check re-derives them with HiGHS.
FROZEN = {
    "K3": {"ASS": F(2), "ASSQ": F(2), "POP": F(3, 2), "POP1": F(5, 2), "POP2": F(5, 2)},
    "K4": {"ASS": F(2), "ASSQ": F(2), "POP": F(3, 2), "POP1": F(12, 5), "POP2": F(5, 2)},
    "C5": {"ASS": F(2), "ASSQ": F(2), "POP": F(3, 2), "POP1": F(7, 3), "POP2": F(7, 3)},
    "C7": {"ASS": F(2), "ASSQ": F(2), "POP": F(3, 2), "POP1": F(9, 4), "POP2": F(9, 4)},
    "petersen": {"ASS": F(2), "ASSQ": F(2), "POP": F(3, 2), "POP1": F(7, 3), "POP2": F(7, 3)},
    "myciel3": {"ASS": F(2), "ASSQ": F(2), "POP": F(3, 2), "POP1": F(7, 3), "POP2": F(7, 3)},
}
GRAPHS = {"K3": complete(3), "K4": complete(4), "C5": cycle(5), "C7": cycle(7), "petersen": petersen(), "myciel3": myciel(3)}
HYBRID = {"POP": "POPH", "POP1": "POPH1", "POP2": "POPH2"}


def model_for(name, kind):
    g = GRAPHS[name]
    H = 4 if name == "K4" else dsatur_upper_bound(g)[0]
    return build_model(g, kind, H, default_q(g) if ModelKind(kind).needs_q else None)


def highs_value(m: IlpModel) -> float:
    """Independent floating-point optimum via scipy's HiGHS."""
    idx = m.index
    c = np.zeros(len(m.variables))
    for r, a in m.objective:
        c[idx[r]] = float(a)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for con in m.constraints:
        row = np.zeros(len(m.variables))
        for r, a in con.coefs:
            row[idx[r]] = float(a)
        if con.sense == "=":
            A_eq.append(row)
            b_eq.append(float(con.rhs))
        elif con.sense == "<=":
            A_ub.append(row)
            b_ub.append(float(con.rhs))
        else:
            A_ub.append(-row)
            b_ub.append(-float(con.rhs))
    bounds = [(float(v.lo), None if v.hi is None else float(v.hi)) for v in m.variables]
    res = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None, b_eq=b_eq or None,
                  bounds=bounds, method="highs")
    assert res.status == 0, res.message
    return res.fun + float(m.obj_constant)


def lp_model(n, rows, obj, lo=None, hi=None, const=0):
    """Generic continuous model over variables g_1_1..g_n_1."""
    refs = [G(j + 1, 1) for j in range(n)]
    lo = lo or [0] * n
    hi = hi or [None] * n
    vs = tuple(Variable(r, F(a), None if b is None else F(b), False) for r, a, b in zip(refs, lo, hi))
    cons = tuple(
        LinCon(tuple((refs[j], F(a)) for j, a in enumerate(coefs) if a), sense, F(rhs), f"r{k}")
        for k, (coefs, sense, rhs) in enumerate(rows)
    )
    objective = tuple((refs[j], F(a)) for j, a in enumerate(obj) if a)
    return IlpModel(None, vs, cons, objective, F(const))


class TestRelax:
    def test_ass_k3(self):
        m = relax(build_model(complete(3), "ASS", 3))
        assert len(m.variables) == 12
        assert all(not v.integer and (v.lo, v.hi) == (0, 1) for v in m.variables)

    def test_idempotent_and_shape_preserving(self):
        m = build_model(cycle(5), "POP2", 3, 1)
        r = relax(m)
        assert relax(r) is r
        assert r.constraints == m.constraints

    def test_integer_model_refused(self):
        with pytest.raises(ValueError, match="relax"):
            solve_lp(build_model(complete(3), "ASS", 3))


class TestColoringRelaxations:
    @pytest.mark.parametrize("name", list(FROZEN))
    @pytest.mark.parametrize("kind", list(FROZEN["K3"]))
    def test_frozen_values(self, name, kind):
        m = relax(model_for(name, kind))
        sol = solve_lp(m)
        assert sol.optimal and sol.value == FROZEN[name][kind]
        assert verify_solution(m, sol)
        if kind in HYBRID:
            assert solve_lp(relax(model_for(name, HYBRID[kind]))).value == sol.value

    @pytest.mark.parametrize("name", list(FROZEN))
    @pytest.mark.parametrize("kind", KINDS)
    def test_float_cross_check(self, name, kind):
        want = FROZEN[name].get(kind) or FROZEN[name][{v: k for k, v in HYBRID.items()}[kind]]
        assert highs_value(relax(model_for(name, kind))) == pytest.approx(float(want), abs=1e-7)

    def test_known_bounds(self):
        assert nu(complete(3), "POP", 3) == F(3, 2)
        assert F(7, 3) <= nu(complete(4), "POP1", 4) <= F(12, 5)
        assert nu(complete(3), "POP2", 3) >= F(5, 2)
        assert nu(complete(3), "ASSQ", 3) == 2

    def test_k4_fractional_point(self):
        m = build_model(complete(4), "POP1", 4, 1)
        gq = [F(4, 5), F(2, 5), F(1, 5), F(0)]
        gv = [F(3, 5), F(1, 5), F(0), F(0)]
        vals = {G(i + 1, v): (gq if v == 1 else gv)[i] for v in range(1, 5) for i in range(4)}
        assert all(c.satisfied(vals) for c in m.constraints)
        assert m.objective_value(vals) == F(12, 5)

    def test_strictness_witnesses(self):
        assert nu(complete(4), "POP2", 4) > nu(complete(4), "POP1", 4)
        assert nu(cycle(5), "POP1") > nu(cycle(5), "ASS")
        assert nu(complete(2), "ASS") > nu(complete(2), "POP", q=1)


def random_graphs(count, seed):
    rng = random.Random(seed)
    return [random_connected(rng.randint(3, 9), (0.3, 0.5)[k % 2], rng) for k in range(count)]


class TestRelaxationOrdering:
    def test_pop1_floor_on_non_bipartite(self):
        seen = 0
        for g in random_graphs(80, 21):
            if chromatic_number(g.n, g.edges) <= 2:
                continue
            seen += 1
            assert nu(g, "POP1") >= 2 + F(1, g.n), g.sorted_edges()
            if seen == 30:
                break
        assert seen == 30

    @pytest.mark.parametrize("g", random_graphs(12, 22), ids=lambda g: f"n{g.n}m{g.m}")
    def test_chain_pure_hybrid_and_weak_duality(self, g):
        H, _ = dsatur_upper_bound(g)
        q = default_q(g)
        v = {k: nu(g, k, H, q) for k in KINDS}
        chi = chromatic_number(g.n, g.edges)
        assert v["POP2"] >= v["POP1"] >= v["ASS"] >= v["POP"]
        for pure, hyb in HYBRID.items():
            assert v[pure] == v[hyb]
        assert all(x <= chi for x in v.values())


class TestGenericLp:
    def test_simple_optimum(self):
        # max x + y s.t. x + 2y <= 4, 3x + y <= 6  -> min -(x+y) = -14/5
        m = lp_model(2, [([1, 2], "<=", 4), ([3, 1], "<=", 6)], [-1, -1])
        sol = solve_lp(m)
        assert sol.value == F(-14, 5)
        assert verify_solution(m, sol)

    def test_infeasible(self):
        m = lp_model(1, [([1], ">=", 2)], [1], hi=[1])
        assert solve_lp(m).status is LpStatus.INFEASIBLE

    def test_infeasible_equalities(self):
        m = lp_model(2, [([1, 1], "=", 1), ([1, 1], "=", 2)], [0, 0])
        assert solve_lp(m).status is LpStatus.INFEASIBLE

    def test_unbounded(self):
        m = lp_model(2, [([1, -1], "<=", 1)], [0, -1])
        assert solve_lp(m).status is LpStatus.UNBOUNDED

    def test_fixed_variables_are_substituted(self):
        m = lp_model(3, [([1, 1, 1], ">=", 2)], [1, 2, 3], lo=[0, 1, 0], hi=[1, 1, 1], const=5)
        sol = solve_lp(m)
        assert sol.value == 5 + 2 + 1
        assert verify_solution(m, sol)

    def test_beale_cycling_example_terminates(self):
        # classic example on which textbook Dantzig pivoting cycles
        rows = [
            ([F(1, 4), -8, -1, 9], "<=", 0),
            ([F(1, 2), -12, F(-1, 2), 3], "<=", 0),
            ([0, 0, 1, 0], "<=", 1),
        ]
        m = lp_model(4, rows, [F(-3, 4), 20, F(-1, 2), 6])
        for rule in ("bland", "dantzig"):
            sol = CompiledLp(m).solve(rule=rule)
            assert sol.value == F(-5, 4)

    def test_rules_agree_on_coloring_models(self):
        m = relax(build_model(petersen(), "POPH1", 3, 1))
        a = CompiledLp(m).solve(rule="bland")
        b = CompiledLp(m).solve(rule="dantzig")
        assert a.value == b.value

    def test_unknown_rule(self):
        with pytest.raises(ValueError, match="pivot rule"):
            CompiledLp(lp_model(1, [], [1])).solve(rule="steepest")

    def test_magnitude_guard(self, monkeypatch):
        monkeypatch.setattr(lpmod, "MAX_BITS", 1)
        m = lp_model(2, [([3, 7], "<=", 5), ([5, 2], "<=", 7)], [-1, -1])
        with pytest.raises(LpMagnitudeError, match="exceeds 1 bits"):
            solve_lp(m)

    def test_deadline(self):
        m = relax(build_model(petersen(), "POP2", 3, 1))
        with pytest.raises(LpTimeout):
            CompiledLp(m).solve(deadline=0.0)

    def test_json_form(self):
        d = solve_lp(relax(build_model(complete(3), "POP", 3, 1))).to_dict()
        assert d["status"] == "Optimal" and d["value"] == "3/2" and d["value_decimal"] == 1.5
        assert all("/" in v or v.lstrip("-").isdigit() for v in d["assignment"].values())

    def test_lp_value_with_bounds(self):
        m = build_model(complete(3), "POP1", 3, 1)
        assert lp_value(m) == F(5, 2)
        assert lp_value(m, {G(1, 1): (F(0), F(0))}) is None  # q below color 2 cannot host a triangle

    @given(st.integers(0, 10**9))
    @settings(max_examples=80, deadline=None)
    def test_random_lps_match_highs(self, seed):
        rng = random.Random(seed)
        n, k = rng.randint(1, 5), rng.randint(1, 5)
        rows = []
        for _ in range(k):
            coefs = [rng.randint(-3, 3) for _ in range(n)]
            rows.append((coefs, rng.choice(["<=", ">=", "="]), rng.randint(-3, 6)))
        hi = [rng.choice([1, 2, 5]) for _ in range(n)]
        m = lp_model(n, rows, [rng.randint(-4, 4) for _ in range(n)], hi=hi)
        sol = solve_lp(m)
        A = [[float(a) for a in r[0]] for r in rows]
        A_ub = [a if s == "<=" else [-x for x in a] for a, (_, s, _) in zip(A, rows) if s != "="]
        b_ub = [float(b if s == "<=" else -b) for _, s, b in rows if s != "="]
        A_eq = [a for a, (_, s, _) in zip(A, rows) if s == "="]
        b_eq = [float(b) for _, s, b in rows if s == "="]
        c = [float(a) for a in [dict(m.objective).get(v.ref, 0) for v in m.variables]]
        res = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None, b_eq=b_eq or None,
                      bounds=[(0, h) for h in hi], method="highs")
        if res.status == 2:
            assert sol.status is LpStatus.INFEASIBLE
        else:
            assert res.status == 0
            assert sol.optimal and verify_solution(m, sol)
            assert float(sol.value) == pytest.approx(res.fun, abs=1e-7)
