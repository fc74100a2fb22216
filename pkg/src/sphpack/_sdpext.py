"""Extended-precision SDP path following backed by mpmath.

Same primal-dual NT iteration as the double-precision solver but with all
linear algebra done at mpmath working precision (default 50 digits, i.e. a
significand well beyond 128 bits).  Dense and unoptimized: intended for
small problems (finite graphs, low-degree certificates) where the double
path's 1e-9 gaps are not enough.
"""

from __future__ import annotations

import math
import os

import mpmath as mp
import numpy as np


def _to_mp_matrix(blocks, problem):
    from .sdp import _entries_to_matrix

    mats = []
    for b, (kind, size) in enumerate(problem.blocks):
        ents = blocks.get(b, ())
        mats.append(_entries_to_matrix(size, ents, kind))
    return mats


def _mp_eigsy(a: mp.matrix):
    e, q = mp.eigsy(a)
    return e, q


def _scal_mat(q, d):
    """q @ diag(d) @ q.T for mp matrices."""
    n = q.rows
    out = mp.zeros(n)
    for i in range(n):
        for j in range(n):
            acc = mp.mpf(0)
            for k in range(n):
                acc += q[i, k] * d[k] * q[j, k]
            out[i, j] = acc
    return out


def _symmetrize(a: mp.matrix):
    n = a.rows
    for i in range(n):
        for j in range(i + 1, n):
            v = (a[i, j] + a[j, i]) / 2
            a[i, j] = v
            a[j, i] = v
    return a


def _nt_scaling(x: mp.matrix, z: mp.matrix):
    ez, qz = _mp_eigsy(z)
    z_half = _scal_mat(qz, [mp.sqrt(v) for v in ez])
    z_ihalf = _scal_mat(qz, [1 / mp.sqrt(v) for v in ez])
    mmat = _symmetrize(z_half * x * z_half)
    em, qm = _mp_eigsy(mmat)
    m_half = _scal_mat(qm, [mp.sqrt(v) for v in em])
    w = _symmetrize(z_ihalf * m_half * z_ihalf)
    z_inv = _scal_mat(qz, [1 / v for v in ez])
    return w, z_inv


def _max_step(x: mp.matrix, dx: mp.matrix):
    l = mp.cholesky(x)
    n = x.rows
    li = mp.inverse(l)
    s = _symmetrize(li * dx * li.T)
    ev, _ = _mp_eigsy(s)
    lam = min(ev)
    if lam >= 0:
        return mp.mpf(1)
    return min(mp.mpf(1), -1 / lam)


def solve_extended(problem, tol: float = 1e-12, max_iterations: int = 200):
    from .sdp import SdpSolution

    dps = int(os.environ.get("SPHPACK_MP_DPS", "50"))
    with mp.workdps(dps):
        m = problem.n_constraints
        sign = mp.mpf(1) if problem.sense == "min" else mp.mpf(-1)
        sizes = [size for _, size in problem.blocks]
        kinds = [kind for kind, _ in problem.blocks]
        nblocks = len(sizes)

        def to_mp_block(arr, kind):
            if kind == "diag":
                return mp.matrix([[mp.mpf(float(v))] for v in arr])
            return mp.matrix([[mp.mpf(float(v)) for v in row] for row in arr])

        from .sdp import _entries_to_matrix

        a_mats = [
            [
                to_mp_block(
                    _entries_to_matrix(sizes[b], con.get(b, ()), kinds[b]), kinds[b]
                )
                for b in range(nblocks)
            ]
            for con in problem.constraints
        ]
        c_mats = [
            to_mp_block(
                _entries_to_matrix(sizes[b], problem.objective.get(b, ()), kinds[b]),
                kinds[b],
            )
            * sign
            for b in range(nblocks)
        ]
        b_vec = [mp.mpf(float(v)) for v in problem.rhs]

        def binner(p, q, kind):
            if kind == "diag":
                return sum(p[i, 0] * q[i, 0] for i in range(p.rows))
            return sum(
                p[i, j] * q[i, j] for i in range(p.rows) for j in range(p.cols)
            )

        def inner_all(ps, qs):
            return sum(binner(p, q, k) for p, q, k in zip(ps, qs, kinds))

        total_dim = sum(sizes)
        x_blocks = [
            mp.ones(size, 1) * 10 if kind == "diag" else mp.eye(size) * 10
            for kind, size in problem.blocks
        ]
        z_blocks = [
            mp.ones(size, 1) * 10 if kind == "diag" else mp.eye(size) * 10
            for kind, size in problem.blocks
        ]
        y = mp.zeros(m, 1)

        status = "max_iterations"
        iteration = 0
        for iteration in range(1, max_iterations + 1):
            gap = inner_all(x_blocks, z_blocks)
            mu = gap / total_dim
            rd = []
            for b in range(nblocks):
                acc = c_mats[b] - z_blocks[b]
                for i in range(m):
                    acc -= a_mats[i][b] * y[i, 0]
                rd.append(acc)
            rp = mp.matrix(
                [
                    b_vec[i]
                    - inner_all(a_mats[i], x_blocks)
                    for i in range(m)
                ]
            )
            pobj = inner_all(c_mats, x_blocks)
            dobj = sum(b_vec[i] * y[i, 0] for i in range(m))
            rel_gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
            pinf = mp.norm(rp) / (1 + mp.norm(mp.matrix(b_vec)))
            dinf = max(max(abs(v) for v in r) if r.rows else mp.mpf(0) for r in rd)
            if rel_gap <= tol and pinf <= tol * 10 and dinf <= tol * 10:
                status = "optimal"
                break

            w_blocks, zinv_blocks = [], []
            for kind, xb, zb in zip(kinds, x_blocks, z_blocks):
                if kind == "diag":
                    w_blocks.append(
                        mp.matrix([[mp.sqrt(xb[i, 0] / zb[i, 0])] for i in range(xb.rows)])
                    )
                    zinv_blocks.append(
                        mp.matrix([[1 / zb[i, 0]] for i in range(zb.rows)])
                    )
                else:
                    w, zinv = _nt_scaling(xb, zb)
                    w_blocks.append(w)
                    zinv_blocks.append(zinv)

            def waw(b, mat):
                if kinds[b] == "diag":
                    return mp.matrix(
                        [[w_blocks[b][i, 0] ** 2 * mat[i, 0]] for i in range(mat.rows)]
                    )
                return w_blocks[b] * mat * w_blocks[b]

            h = mp.zeros(m)
            waw_cache = [[waw(b, a_mats[j][b]) for b in range(nblocks)] for j in range(m)]
            for i in range(m):
                for j in range(i, m):
                    acc = mp.mpf(0)
                    for b in range(nblocks):
                        acc += binner(a_mats[i][b], waw_cache[j][b], kinds[b])
                    h[i, j] = acc
                    h[j, i] = acc

            def solve_h(rhs):
                return mp.lu_solve(h, rhs)

            def directions(rc_blocks):
                rhs = rp.copy()
                for i in range(m):
                    acc = mp.mpf(0)
                    for b in range(nblocks):
                        term = waw(b, rd[b]) - rc_blocks[b]
                        acc += binner(a_mats[i][b], term, kinds[b])
                    rhs[i, 0] += acc
                dy = solve_h(rhs)
                dz = []
                for b in range(nblocks):
                    acc = rd[b].copy()
                    for i in range(m):
                        acc -= a_mats[i][b] * dy[i, 0]
                    dz.append(acc)
                dx = [rc_blocks[b] - waw(b, dz[b]) for b in range(nblocks)]
                return dx, dy, dz

            def step_len(dxs, dzs):
                ap = ad = mp.mpf(1)
                for b, kind in enumerate(kinds):
                    if kind == "diag":
                        for i in range(dxs[b].rows):
                            if dxs[b][i, 0] < 0:
                                ap = min(ap, -x_blocks[b][i, 0] / dxs[b][i, 0])
                            if dzs[b][i, 0] < 0:
                                ad = min(ad, -z_blocks[b][i, 0] / dzs[b][i, 0])
                    else:
                        ap = min(ap, _max_step(x_blocks[b], dxs[b]))
                        ad = min(ad, _max_step(z_blocks[b], dzs[b]))
                return ap, ad

            dx_a, dy_a, dz_a = directions([-x for x in x_blocks])
            ap, ad = step_len(dx_a, dz_a)
            x_try = [x_blocks[b] + dx_a[b] * (ap * mp.mpf("0.98")) for b in range(nblocks)]
            z_try = [z_blocks[b] + dz_a[b] * (ad * mp.mpf("0.98")) for b in range(nblocks)]
            gap_aff = inner_all(x_try, z_try)
            sigma = min(mp.mpf(1), max((max(gap_aff, mp.mpf(0)) / gap) ** 3, mp.mpf("1e-12")))

            rc = []
            for b, kind in enumerate(kinds):
                if kind == "diag":
                    rc.append(
                        mp.matrix(
                            [
                                [sigma * mu * zinv_blocks[b][i, 0] - x_blocks[b][i, 0]]
                                for i in range(sizes[b])
                            ]
                        )
                    )
                else:
                    rc.append(sigma * mu * zinv_blocks[b] - x_blocks[b])
            dx, dy, dz = directions(rc)
            ap, ad = step_len(dx, dz)
            ap *= mp.mpf("0.98")
            ad *= mp.mpf("0.98")
            for b in range(nblocks):
                x_blocks[b] = x_blocks[b] + dx[b] * ap
                z_blocks[b] = z_blocks[b] + dz[b] * ad
                if kinds[b] == "sym":
                    _symmetrize(x_blocks[b])
                    _symmetrize(z_blocks[b])
            y = y + dy * ad

        pobj = inner_all(c_mats, x_blocks)
        dobj = sum(b_vec[i] * y[i, 0] for i in range(m))
        sgn = 1.0 if problem.sense == "min" else -1.0

        def back(blk, kind):
            if kind == "diag":
                return np.array([float(blk[i, 0]) for i in range(blk.rows)])
            return np.array(
                [[float(blk[i, j]) for j in range(blk.cols)] for i in range(blk.rows)]
            )

        return SdpSolution(
            status=status,
            primal_blocks=[back(b, k) for b, k in zip(x_blocks, kinds)],
            y=np.array([float(y[i, 0]) for i in range(m)]),
            dual_blocks=[back(b, k) for b, k in zip(z_blocks, kinds)],
            primal_objective=float(sgn * pobj),
            dual_objective=float(sgn * dobj),
            gap=float(abs(pobj - dobj)),
            primal_infeasibility=float(mp.norm(rp)),
            dual_infeasibility=float(dinf),
            iterations=iteration,
        )
