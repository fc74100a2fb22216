"""Dense block-diagonal semidefinite programming.

Primal form: optimize <C, X> subject to <A_i, X> = b_i and X PSD, where X is
block diagonal with dense symmetric blocks ("sym") and nonnegative vectors
("diag").  The solver is an infeasible-start primal-dual path-following
method with Nesterov-Todd scaling and a Mehrotra-style centering heuristic;
given identical input it produces identical iterates.

Also hosts the finite-graph theta, theta-prime and kappa utilities used for
validation.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse

DEFAULT_TOL = 1e-9


class SdpError(Exception):
    pass


@dataclass
class SdpProblem:
    """Block-diagonal SDP data.

    blocks: list of ("sym"|"diag", size).
    constraints: one dict per constraint mapping block index -> list of
        (i, j, value) entries; off-diagonal entries are stored once with
        i < j and count twice in <A, X> (A is symmetric).
    objective: same entry format.
    """

    blocks: list
    constraints: list
    rhs: list
    objective: dict
    sense: str = "min"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise SdpError("sense must be min or max")
        if len(self.constraints) != len(self.rhs):
            raise SdpError("constraint/rhs length mismatch")

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def block_size(self, b: int) -> int:
        return self.blocks[b][1]

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "schema": "sphpack/sdp-problem-v1",
            "blocks": [[kind, size] for kind, size in self.blocks],
            "constraints": [
                {str(b): [[i, j, v] for i, j, v in ents] for b, ents in con.items()}
                for con in self.constraints
            ],
            "rhs": list(self.rhs),
            "objective": {
                str(b): [[i, j, v] for i, j, v in ents]
                for b, ents in self.objective.items()
            },
            "sense": self.sense,
        }

    @staticmethod
    def from_dict(d: dict) -> "SdpProblem":
        return SdpProblem(
            blocks=[(kind, size) for kind, size in d["blocks"]],
            constraints=[
                {int(b): [tuple(e) for e in ents] for b, ents in con.items()}
                for con in d["constraints"]
            ],
            rhs=list(d["rhs"]),
            objective={int(b): [tuple(e) for e in ents] for b, ents in d["objective"].items()},
            sense=d["sense"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def loads(text: str) -> "SdpProblem":
        return SdpProblem.from_dict(json.loads(text))

    def to_sdpa(self) -> str:
        """Plain-text dump in SDPA sparse convention (diag blocks negative)."""
        lines = [f"{self.n_constraints} =mdim", f"{len(self.blocks)} =nblocks"]
        lines.append(
            " ".join(
                str(size if kind == "sym" else -size) for kind, size in self.blocks
            )
        )
        sign = 1.0 if self.sense == "max" else -1.0
        lines.append(" ".join(repr(float(v)) for v in self.rhs))
        for b, ents in sorted(self.objective.items()):
            for i, j, v in ents:
                lines.append(f"0 {b + 1} {i + 1} {j + 1} {repr(sign * float(v))}")
        for ci, con in enumerate(self.constraints):
            for b, ents in sorted(con.items()):
                for i, j, v in ents:
                    lines.append(f"{ci + 1} {b + 1} {i + 1} {j + 1} {repr(float(v))}")
        return "\n".join(lines) + "\n"


@dataclass
class SdpSolution:
    status: str
    primal_blocks: list
    y: np.ndarray
    dual_blocks: list
    primal_objective: float
    dual_objective: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int

    @property
    def value(self) -> float:
        return self.primal_objective


# ---------------------------------------------------------------------------
# Solver internals (double precision).
# ---------------------------------------------------------------------------

def _entries_to_matrix(size: int, ents, kind: str):
    if kind == "diag":
        v = np.zeros(size)
        for i, j, val in ents:
            if i != j:
                raise SdpError("diag block entries must be diagonal")
            v[i] += val
        return v
    m = np.zeros((size, size))
    for i, j, val in ents:
        m[i, j] += val
        if i != j:
            m[j, i] += val
    return m


def _vec_index_maps(problem: SdpProblem):
    """Sparse per-block matrices V_b with rows vec(A_i); <A_i, X_b> = V_b @ vec(X_b)."""
    maps = []
    m = problem.n_constraints
    for b, (kind, size) in enumerate(problem.blocks):
        rows, cols, vals = [], [], []
        for ci, con in enumerate(problem.constraints):
            for i, j, v in con.get(b, ()):
                if kind == "diag":
                    rows.append(ci)
                    cols.append(i)
                    vals.append(v)
                else:
                    rows.append(ci)
                    cols.append(i * size + j)
                    vals.append(v)
                    if i != j:
                        rows.append(ci)
                        cols.append(j * size + i)
                        vals.append(v)
        dim = size if kind == "diag" else size * size
        maps.append(
            sparse.csr_matrix((vals, (rows, cols)), shape=(m, dim))
        )
    return maps


def _nt_scaling_sym(x: np.ndarray, z: np.ndarray):
    """NT scaling W with W Z W = X, plus Z^{-1}."""
    lam_z, q_z = np.linalg.eigh(z)
    lam_z = np.maximum(lam_z, 1e-300)
    z_half = (q_z * np.sqrt(lam_z)) @ q_z.T
    z_ihalf = (q_z / np.sqrt(lam_z)) @ q_z.T
    mmat = z_half @ x @ z_half
    lam_m, q_m = np.linalg.eigh(0.5 * (mmat + mmat.T))
    lam_m = np.maximum(lam_m, 1e-300)
    m_half = (q_m * np.sqrt(lam_m)) @ q_m.T
    w = z_ihalf @ m_half @ z_ihalf
    z_inv = (q_z / lam_z) @ q_z.T
    return 0.5 * (w + w.T), 0.5 * (z_inv + z_inv.T)


def _max_step_sym(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha dx PSD (x PD), via generalized eigenvalues."""
    try:
        l = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        l = np.linalg.cholesky(x + 1e-12 * np.trace(x) * np.eye(len(x)))
    li = np.linalg.inv(l)
    s = li @ dx @ li.T
    lam = np.linalg.eigvalsh(0.5 * (s + s.T)).min()
    if lam >= -1e-300:
        return 1.0
    return min(1.0, -1.0 / lam)


def solve(problem: SdpProblem, tol: float = DEFAULT_TOL, max_iterations: int = 200,
          precision: str = "double", verbose: bool = False) -> SdpSolution:
    """Solve the block SDP; returns an eps-optimal pair or a failure status."""
    if precision == "extended":
        from . import _sdpext

        return _sdpext.solve_extended(problem, tol=tol, max_iterations=max_iterations)
    if precision != "double":
        raise SdpError(f"unknown precision mode {precision!r}")

    m = problem.n_constraints
    sign = 1.0 if problem.sense == "min" else -1.0
    b_vec = np.asarray(problem.rhs, dtype=float)

    kinds = [kind for kind, _ in problem.blocks]
    sizes = [size for _, size in problem.blocks]
    c_blocks = [
        _entries_to_matrix(sizes[i], problem.objective.get(i, ()), kinds[i]) * sign
        for i in range(len(sizes))
    ]
    vmaps = _vec_index_maps(problem)

    # Row scaling for conditioning.
    row_scale = np.ones(m)
    for ci, con in enumerate(problem.constraints):
        mx = max((abs(v) for ents in con.values() for _, _, v in ents), default=0.0)
        if mx == 0.0:
            if abs(b_vec[ci]) > tol:
                return SdpSolution(
                    "infeasible", [], np.zeros(m), [], math.nan, math.nan,
                    math.nan, math.inf, math.inf, 0,
                )
            mx = 1.0
        row_scale[ci] = mx
    b_scaled = b_vec / row_scale
    scaled_vmaps = [sparse.diags(1.0 / row_scale) @ v for v in vmaps]

    total_dim = sum(sizes)
    norm_b = max(1.0, float(np.abs(b_scaled).max(initial=0.0)))
    norm_c = max(
        1.0, max((float(np.abs(c).max(initial=0.0)) for c in c_blocks), default=0.0)
    )
    xi_p = max(10.0, math.sqrt(total_dim) * norm_b)
    xi_d = max(10.0, math.sqrt(total_dim), norm_c)

    x_blocks, z_blocks = [], []
    for kind, size in problem.blocks:
        if kind == "diag":
            x_blocks.append(np.full(size, xi_p))
            z_blocks.append(np.full(size, xi_d))
        else:
            x_blocks.append(np.eye(size) * xi_p)
            z_blocks.append(np.eye(size) * xi_d)
    y = np.zeros(m)

    def a_of(blocks_list):
        out = np.zeros(m)
        for vb, blk, kind in zip(scaled_vmaps, blocks_list, kinds):
            out += vb @ (blk.ravel() if kind == "sym" else blk)
        return out

    def at_of(yvec):
        out = []
        for vb, kind, size in zip(scaled_vmaps, kinds, sizes):
            flat = vb.T @ yvec
            out.append(flat if kind == "diag" else flat.reshape(size, size))
        return out

    def inner(bl1, bl2):
        return float(sum(np.sum(a * b) for a, b in zip(bl1, bl2)))

    chunk = 256
    status = "max_iterations"
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        gap = inner(x_blocks, z_blocks)
        if not math.isfinite(gap) or gap > 1e100:
            status = "numerical_failure"
            break
        mu = gap / total_dim
        at_y = at_of(y)
        rd_blocks = [c - z - aty for c, z, aty in zip(c_blocks, z_blocks, at_y)]
        rp = b_scaled - a_of(x_blocks)
        pobj = inner(c_blocks, x_blocks)
        dobj = float(b_scaled @ y)
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(b_scaled)))
        dinf = max(
            float(np.max(np.abs(r)) if r.size else 0.0) for r in rd_blocks
        ) / (1.0 + norm_c)
        if verbose:
            print(
                f"iter {iteration:3d} pobj {pobj:+.9e} dobj {dobj:+.9e} "
                f"gap {rel_gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e}"
            )
        if rel_gap <= tol and pinf <= tol * 10 and dinf <= tol * 10:
            status = "optimal"
            break

        # NT scalings and Z^{-1}.
        w_blocks, zinv_blocks = [], []
        for kind, xb, zb in zip(kinds, x_blocks, z_blocks):
            if kind == "diag":
                w_blocks.append(np.sqrt(xb / zb))
                zinv_blocks.append(1.0 / zb)
            else:
                w, zinv = _nt_scaling_sym(xb, zb)
                w_blocks.append(w)
                zinv_blocks.append(zinv)

        # Schur complement H_ij = sum_blocks <A_i, W A_j W>.
        h = np.zeros((m, m))
        for bi, (kind, size) in enumerate(problem.blocks):
            vb = scaled_vmaps[bi]
            if vb.nnz == 0:
                continue
            active = np.unique(vb.nonzero()[0])
            if kind == "diag":
                w2 = w_blocks[bi] ** 2
                h += (vb @ sparse.diags(w2) @ vb.T).toarray()
                continue
            w = w_blocks[bi]
            for start in range(0, len(active), chunk):
                rows = active[start : start + chunk]
                t = np.empty((len(rows), size * size))
                for r_i, ci in enumerate(rows):
                    a_mat = vb[ci].toarray().reshape(size, size)
                    t[r_i] = (w @ a_mat @ w).ravel()
                h[:, rows] += vb @ t.T
        h = 0.5 * (h + h.T)

        ridge = 0.0
        for attempt in range(6):
            try:
                chol = np.linalg.cholesky(h + ridge * np.eye(m))
                break
            except np.linalg.LinAlgError:
                ridge = max(1e-13 * np.trace(h) / m, ridge * 100.0) if ridge else max(
                    1e-13 * np.trace(h) / m, 1e-14
                )
        else:
            status = "numerical_failure"
            break

        def solve_h(rhs):
            return np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))

        def directions(rc_blocks):
            rhs = rp.copy()
            for vb, kind, rc, rd, w in zip(
                scaled_vmaps, kinds, rc_blocks, rd_blocks, w_blocks
            ):
                if kind == "diag":
                    contrib = w * w * rd - rc
                else:
                    contrib = w @ rd @ w - rc
                rhs += vb @ contrib.ravel()
            dy = solve_h(rhs)
            at_dy = at_of(dy)
            dz = [rd - atdy for rd, atdy in zip(rd_blocks, at_dy)]
            dx = []
            for kind, rc, dzb, w in zip(kinds, rc_blocks, dz, w_blocks):
                if kind == "diag":
                    dx.append(rc - w * w * dzb)
                else:
                    dx.append(rc - w @ dzb @ w)
            return dx, dy, dz

        def step_lengths(dx, dz):
            ap = ad = 1.0
            for kind, xb, zb, dxb, dzb in zip(kinds, x_blocks, z_blocks, dx, dz):
                if kind == "diag":
                    neg = dxb < 0
                    if np.any(neg):
                        ap = min(ap, float((-xb[neg] / dxb[neg]).min()))
                    neg = dzb < 0
                    if np.any(neg):
                        ad = min(ad, float((-zb[neg] / dzb[neg]).min()))
                else:
                    ap = min(ap, _max_step_sym(xb, dxb))
                    ad = min(ad, _max_step_sym(zb, dzb))
            return ap, ad

        # Predictor (affine scaling).
        rc_aff = [-x if kind == "diag" else -x for kind, x in zip(kinds, x_blocks)]
        dx_a, dy_a, dz_a = directions(rc_aff)
        ap, ad = step_lengths(dx_a, dz_a)
        gap_aff = inner(
            [x + 0.98 * ap * d for x, d in zip(x_blocks, dx_a)],
            [z + 0.98 * ad * d for z, d in zip(z_blocks, dz_a)],
        )
        sigma = min(1.0, max((max(gap_aff, 0.0) / gap) ** 3, 1e-10))

        # Corrector with centering.
        target = sigma * mu
        rc = []
        for kind, xb, zinv in zip(kinds, x_blocks, zinv_blocks):
            if kind == "diag":
                rc.append(target * zinv - xb)
            else:
                rc.append(target * zinv - xb)
        dx, dy, dz = directions(rc)
        ap, ad = step_lengths(dx, dz)
        scale = 0.98 if rel_gap > 1e2 * tol else 0.99
        ap *= scale
        ad *= scale

        x_blocks = [x + ap * d for x, d in zip(x_blocks, dx)]
        z_blocks = [z + ad * d for z, d in zip(z_blocks, dz)]
        for bi, kind in enumerate(kinds):
            if kind == "sym":
                x_blocks[bi] = 0.5 * (x_blocks[bi] + x_blocks[bi].T)
                z_blocks[bi] = 0.5 * (z_blocks[bi] + z_blocks[bi].T)
        y = y + ad * dy

    pobj = inner(c_blocks, x_blocks)
    dobj = float(b_scaled @ y)
    rp = b_scaled - a_of(x_blocks)
    at_y = at_of(y)
    dinf = max(
        float(np.max(np.abs(c - z - aty)) if np.size(c) else 0.0)
        for c, z, aty in zip(c_blocks, z_blocks, at_y)
    ) / (1.0 + norm_c)

    y_unscaled = y / row_scale
    primal_value = sign * pobj
    dual_value = sign * dobj
    if status == "optimal" and problem.sense == "min":
        assert dobj <= pobj + 1e-6 * (1 + abs(pobj)), "weak duality violated"
    if status == "optimal" and problem.sense == "max":
        assert primal_value <= dual_value + 1e-6 * (1 + abs(pobj)), "weak duality violated"
    return SdpSolution(
        status=status,
        primal_blocks=x_blocks,
        y=y_unscaled,
        dual_blocks=z_blocks,
        primal_objective=primal_value,
        dual_objective=dual_value,
        gap=abs(pobj - dobj),
        primal_infeasibility=float(np.linalg.norm(rp)),
        dual_infeasibility=float(dinf),
        iterations=iteration,
    )


# ---------------------------------------------------------------------------
# Finite graphs: theta, theta-prime, kappa.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteGraph:
    """Simple undirected graph on vertices 0..n-1."""

    n_vertices: int
    edges: frozenset

    @staticmethod
    def from_edges(n_vertices: int, edges) -> "FiniteGraph":
        norm = set()
        for u, v in edges:
            if u == v or not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValueError("invalid edge")
            norm.add((min(u, v), max(u, v)))
        return FiniteGraph(n_vertices, frozenset(norm))

    @staticmethod
    def cycle(n: int) -> "FiniteGraph":
        return FiniteGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @staticmethod
    def complete(n: int) -> "FiniteGraph":
        return FiniteGraph.from_edges(n, itertools.combinations(range(n), 2))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def non_edges(self):
        return [
            (u, v)
            for u, v in itertools.combinations(range(self.n_vertices), 2)
            if (u, v) not in self.edges
        ]

    def independence_number(self) -> int:
        """Exhaustive search; for small validation graphs only."""
        best = 0
        verts = range(self.n_vertices)
        for size in range(self.n_vertices, 0, -1):
            if size <= best:
                break
            for subset in itertools.combinations(verts, size):
                if all(
                    not self.has_edge(u, v)
                    for u, v in itertools.combinations(subset, 2)
                ):
                    best = size
                    break
            if best:
                break
        return best

    def maximal_cliques(self) -> list:
        """All maximal cliques by subset enumeration; small graphs only."""
        n = self.n_vertices
        cliques = []
        for size in range(1, n + 1):
            for subset in itertools.combinations(range(n), size):
                if all(
                    self.has_edge(u, v) for u, v in itertools.combinations(subset, 2)
                ):
                    cliques.append(set(subset))
        maximal = [
            c for c in cliques if not any(c < other for other in cliques)
        ]
        return [tuple(sorted(c)) for c in maximal]


def _theta_problem(g: FiniteGraph, nonneg: bool) -> SdpProblem:
    n = g.n_vertices
    blocks = [("sym", n)]
    constraints = [{0: [(i, i, 1.0) for i in range(n)]}]
    rhs = [1.0]
    for u, v in sorted(g.edges):
        constraints.append({0: [(u, v, 1.0)]})
        rhs.append(0.0)
    if nonneg:
        non_edges = g.non_edges()
        blocks.append(("diag", max(1, len(non_edges))))
        for idx, (u, v) in enumerate(non_edges):
            constraints.append({0: [(u, v, 1.0)], 1: [(idx, idx, -1.0)]})
            rhs.append(0.0)
    objective = {0: [(i, j, 1.0) for i in range(n) for j in range(i, n)]}
    return SdpProblem(blocks, constraints, rhs, objective, sense="max")


def finite_theta(g: FiniteGraph, tol: float = 1e-10) -> float:
    """Lovasz theta via max <J, A>, tr A = 1, A_uv = 0 on edges, A PSD."""
    sol = solve(_theta_problem(g, nonneg=False), tol=tol)
    if sol.status != "optimal":
        raise SdpError(f"theta solve failed: {sol.status}")
    return sol.primal_objective


def finite_theta_prime(g: FiniteGraph, tol: float = 1e-10) -> float:
    """Schrijver theta-prime: theta with entrywise nonnegativity."""
    sol = solve(_theta_problem(g, nonneg=True), tol=tol)
    if sol.status != "optimal":
        raise SdpError(f"theta-prime solve failed: {sol.status}")
    return sol.primal_objective


def finite_kappa(g: FiniteGraph, cliques=None, tol: float = 1e-10) -> float:
    """Fractional clique-cover bound: max 1'a, sum_{v in C} a_v <= 1, a >= 0.

    Solved as a diagonal-block SDP.  When the numerical optimum rounds to a
    nearby rational vertex that verifies exactly, the exact value is returned
    (LP optima are rational), e.g. kappa(C_5) = 5/2 exactly.
    """
    if cliques is None:
        cliques = g.maximal_cliques()
    n = g.n_vertices
    ncl = len(cliques)
    blocks = [("diag", n), ("diag", ncl)]
    constraints = []
    rhs = []
    for ci, clique in enumerate(cliques):
        constraints.append(
            {0: [(v, v, 1.0) for v in clique], 1: [(ci, ci, 1.0)]}
        )
        rhs.append(1.0)
    objective = {0: [(v, v, 1.0) for v in range(n)]}
    prob = SdpProblem(blocks, constraints, rhs, objective, sense="max")
    sol = solve(prob, tol=tol)
    if sol.status != "optimal":
        raise SdpError(f"kappa solve failed: {sol.status}")
    value = sol.primal_objective

    # Rational reconstruction of the optimal vertex.
    a = [Fraction(float(v)).limit_denominator(n * n) for v in sol.primal_blocks[0]]
    feasible = all(
        sum(a[v] for v in clique) <= 1 for clique in cliques
    ) and all(av >= 0 for av in a)
    if feasible:
        exact = sum(a)
        if float(exact) >= value - 1e-6:
            return float(exact)
    return value
