import itertools
import math

import numpy as np
import pytest

from sphpack.sdp import (
    FiniteGraph,
    SdpProblem,
    finite_kappa,
    finite_theta,
    finite_theta_prime,
    solve,
)


def test_scalar_problem():
    # minimize x subject to x = 2, x >= 0 (1x1 PSD block).
    prob = SdpProblem(
        blocks=[("sym", 1)],
        constraints=[{0: [(0, 0, 1.0)]}],
        rhs=[2.0],
        objective={0: [(0, 0, 1.0)]},
        sense="min",
    )
    sol = solve(prob)
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(2.0, abs=1e-8)


def test_trace_with_offdiagonal_pin():
    # minimize trace X s.t. X_12 = 1, X PSD 2x2; optimum X = [[1,1],[1,1]].
    # The off-diagonal constraint <A, X> = 2 X_12 = 2 with the symmetric
    # convention, so pin the rhs at 2.
    prob = SdpProblem(
        blocks=[("sym", 2)],
        constraints=[{0: [(0, 1, 1.0)]}],
        rhs=[2.0],
        objective={0: [(0, 0, 1.0), (1, 1, 1.0)]},
        sense="min",
    )
    sol = solve(prob)
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(2.0, abs=1e-7)
    x = sol.primal_blocks[0]
    assert np.allclose(x, np.ones((2, 2)), atol=1e-5)


def test_diag_block_lp():
    # maximize x1 + 2 x2, x1 + x2 <= 1 via slack, x >= 0.
    prob = SdpProblem(
        blocks=[("diag", 2), ("diag", 1)],
        constraints=[{0: [(0, 0, 1.0), (1, 1, 1.0)], 1: [(0, 0, 1.0)]}],
        rhs=[1.0],
        objective={0: [(0, 0, 1.0), (1, 1, 2.0)]},
        sense="max",
    )
    sol = solve(prob)
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(2.0, abs=1e-8)


def test_solution_invariants_and_duality():
    prob = SdpProblem(
        blocks=[("sym", 3)],
        constraints=[
            {0: [(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]},
            {0: [(0, 1, 1.0)]},
        ],
        rhs=[1.0, 0.4],
        objective={0: [(0, 2, 1.0), (1, 1, 0.5)]},
        sense="min",
    )
    sol = solve(prob)
    assert sol.status == "optimal"
    assert np.linalg.eigvalsh(sol.primal_blocks[0]).min() > -1e-9
    assert abs(sol.primal_objective - sol.dual_objective) <= sol.gap + 1e-12
    assert sol.dual_objective <= sol.primal_objective + 1e-7


def test_objective_scaling():
    base = SdpProblem(
        blocks=[("sym", 2)],
        constraints=[{0: [(0, 0, 1.0), (1, 1, 1.0)]}, {0: [(0, 1, 1.0)]}],
        rhs=[1.0, 0.5],
        objective={0: [(0, 0, 1.0), (0, 1, -1.0)]},
        sense="min",
    )
    sol1 = solve(base)
    scaled = SdpProblem(
        base.blocks,
        base.constraints,
        base.rhs,
        {0: [(i, j, 7.0 * v) for i, j, v in base.objective[0]]},
        "min",
    )
    sol7 = solve(scaled)
    assert sol7.primal_objective == pytest.approx(7 * sol1.primal_objective, rel=1e-6)
    assert np.allclose(sol7.primal_blocks[0], sol1.primal_blocks[0], atol=1e-5)


def test_determinism():
    prob = _random_sdp(np.random.default_rng(0))
    s1 = solve(prob)
    s2 = solve(prob)
    assert s1.primal_objective == s2.primal_objective
    assert np.array_equal(s1.y, s2.y)
    for a, b in zip(s1.primal_blocks, s2.primal_blocks):
        assert np.array_equal(a, b)


def _random_sdp(rng, n=5, m=4):
    # Bounded instance: PSD objective, strictly feasible rhs witness.
    c = rng.standard_normal((n, n))
    c = c @ c.T + 0.1 * np.eye(n)
    ents_c = [(i, j, c[i, j]) for i in range(n) for j in range(i, n)]
    constraints = []
    for _ in range(m):
        a = rng.standard_normal((n, n))
        a = a + a.T
        constraints.append({0: [(i, j, a[i, j]) for i in range(n) for j in range(i, n)]})
    rhs = []
    x0 = rng.standard_normal((n, n))
    x0 = x0 @ x0.T + np.eye(n)
    for con in constraints:
        acc = 0.0
        for i, j, v in con[0]:
            acc += v * x0[i, j] * (2.0 if i != j else 1.0)
        rhs.append(acc)
    return SdpProblem([("sym", n)], constraints, rhs, {0: ents_c}, "min")


def test_zero_row_infeasible():
    prob = SdpProblem(
        blocks=[("sym", 1)],
        constraints=[{}],
        rhs=[1.0],
        objective={0: [(0, 0, 1.0)]},
        sense="min",
    )
    sol = solve(prob)
    assert sol.status == "infeasible"


def test_serialization_roundtrip_bit_exact():
    prob = _random_sdp(np.random.default_rng(1))
    text = prob.dumps()
    back = SdpProblem.loads(text)
    assert back.dumps() == text
    assert solve(back).primal_objective == solve(prob).primal_objective


def test_sdpa_export_format():
    prob = SdpProblem(
        blocks=[("sym", 2), ("diag", 3)],
        constraints=[{0: [(0, 1, 1.0)], 1: [(2, 2, -1.0)]}],
        rhs=[1.0],
        objective={0: [(0, 0, 1.0)]},
        sense="min",
    )
    txt = prob.to_sdpa()
    lines = txt.splitlines()
    assert lines[0].startswith("1")
    assert lines[2] == "2 -3"
    assert any(line.startswith("0 1 1 1") for line in lines)
    assert any(line.startswith("1 2 3 3") for line in lines)


# -- finite graphs ----------------------------------------------------------

def test_theta_complete_and_empty():
    for n in (3, 5):
        assert finite_theta(FiniteGraph.complete(n)) == pytest.approx(1.0, abs=1e-7)
        empty = FiniteGraph.from_edges(n, [])
        assert finite_theta(empty) == pytest.approx(n, abs=1e-7)
        assert finite_theta_prime(empty) == pytest.approx(n, abs=1e-7)


def test_theta_c5():
    c5 = FiniteGraph.cycle(5)
    assert finite_theta(c5) == pytest.approx(math.sqrt(5.0), abs=1e-6)
    assert finite_theta_prime(c5) == pytest.approx(math.sqrt(5.0), abs=1e-6)
    assert c5.independence_number() == 2


def test_kappa_values():
    c5 = FiniteGraph.cycle(5)
    assert finite_kappa(c5) == 2.5  # exact via rational reconstruction
    for n in (3, 4, 6):
        assert finite_kappa(FiniteGraph.complete(n)) == pytest.approx(1.0, abs=1e-8)


def test_maximal_cliques():
    g = FiniteGraph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    cliques = set(g.maximal_cliques())
    assert cliques == {(0, 1, 2), (2, 3)}


def test_sandwich_chain_random_graphs():
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(4, 9))
        edges = [
            (u, v)
            for u, v in itertools.combinations(range(n), 2)
            if rng.random() < 0.45
        ]
        g = FiniteGraph.from_edges(n, edges)
        alpha = g.independence_number()
        tp = finite_theta_prime(g)
        th = finite_theta(g)
        kp = finite_kappa(g)
        assert alpha <= tp + 1e-6
        assert tp <= th + 1e-6
        assert th <= kp + 1e-6


def test_extended_precision_small():
    prob = SdpProblem(
        blocks=[("sym", 2), ("diag", 1)],
        constraints=[
            {0: [(0, 0, 1.0), (1, 1, 1.0)], 1: [(0, 0, 1.0)]},
            {0: [(0, 1, 1.0)]},
        ],
        rhs=[1.0, 0.5],
        objective={0: [(0, 0, 1.0), (0, 1, -1.0)]},
        sense="min",
    )
    ref = solve(prob, tol=1e-10)
    ext = solve(prob, tol=1e-20, precision="extended")
    assert ext.status == "optimal"
    assert ext.primal_objective == pytest.approx(ref.primal_objective, abs=1e-8)
    assert ext.gap < 1e-18


def test_extended_precision_theta_c5():
    c5 = FiniteGraph.cycle(5)
    from sphpack.sdp import _theta_problem

    sol = solve(_theta_problem(c5, nonneg=False), tol=1e-20, precision="extended")
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(math.sqrt(5.0), abs=1e-12)
