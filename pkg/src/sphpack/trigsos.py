"""Hermitian trigonometric Laurent polynomials and invariant SOS machinery.

TrigPoly is a finite Laurent series in e^{i theta_j} stored as a map from
integer exponent vectors to complex coefficients.  On top of it live the
finite group actions used for symmetry reduction, projection operators onto
character eigenspaces, symmetry-adapted monomial bases, the invariant domain
polynomials s_k, and the assembly of the theta-prime SOS identities into
block SDP data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

DROP_TOL = 1e-14  # coefficients below this are treated as structural zeros


class TrigPoly:
    """A Laurent polynomial sum_kappa a_kappa e^{i kappa . theta}."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.coeffs = {}
        if coeffs:
            for k, v in coeffs.items():
                v = complex(v)
                if abs(v) > DROP_TOL:
                    self.coeffs[tuple(int(x) for x in k)] = v

    # -- constructors -----------------------------------------------------
    @staticmethod
    def constant(nvars: int, value: complex) -> "TrigPoly":
        return TrigPoly(nvars, {(0,) * nvars: value})

    @staticmethod
    def monomial(nvars: int, kappa: Sequence[int], value: complex = 1.0) -> "TrigPoly":
        return TrigPoly(nvars, {tuple(kappa): value})

    @staticmethod
    def cos(nvars: int, var: int) -> "TrigPoly":
        e = [0] * nvars
        e[var] = 1
        return TrigPoly(nvars, {tuple(e): 0.5, tuple(-x for x in e): 0.5})

    @staticmethod
    def sin(nvars: int, var: int) -> "TrigPoly":
        e = [0] * nvars
        e[var] = 1
        return TrigPoly(nvars, {tuple(-x for x in e): 0.5j, tuple(e): -0.5j})

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return TrigPoly(self.nvars, out)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + other.scale(-1.0)

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")
        out: dict = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0.0) + v1 * v2
        return TrigPoly(self.nvars, out)

    def scale(self, c: complex) -> "TrigPoly":
        return TrigPoly(self.nvars, {k: v * c for k, v in self.coeffs.items()})

    def conjugate(self) -> "TrigPoly":
        """Pointwise complex conjugate of the function."""
        return TrigPoly(
            self.nvars,
            {tuple(-x for x in k): v.conjugate() for k, v in self.coeffs.items()},
        )

    def evaluate(self, angles: Sequence[float]) -> complex:
        if len(angles) != self.nvars:
            raise ValueError("angle count mismatch")
        total = 0.0 + 0.0j
        for k, v in self.coeffs.items():
            total += v * np.exp(1j * float(np.dot(k, angles)))
        return total

    def evaluate_batch(self, angle_arrays: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate at many angle tuples; angle_arrays has one array per variable."""
        total = np.zeros(np.broadcast(*angle_arrays).shape, dtype=complex)
        for k, v in self.coeffs.items():
            phase = sum(ki * arr for ki, arr in zip(k, angle_arrays))
            total += v * np.exp(1j * phase)
        return total

    # -- structure ---------------------------------------------------------
    def is_hermitian(self, tol: float = 1e-12) -> bool:
        for k, v in self.coeffs.items():
            w = self.coeffs.get(tuple(-x for x in k), 0.0)
            if abs(v - w.conjugate()) > tol:
                return False
        return True

    def hermitize(self) -> "TrigPoly":
        """Average with the Hermitian reflection, killing float asymmetry."""
        keys = set(self.coeffs)
        keys |= {tuple(-x for x in k) for k in keys}
        out: dict = {}
        for k in keys:
            mk = tuple(-x for x in k)
            out[k] = 0.5 * (
                self.coeffs.get(k, 0.0) + complex(self.coeffs.get(mk, 0.0)).conjugate()
            )
        return TrigPoly(self.nvars, out)

    def degree(self, var: int) -> int:
        return max((abs(k[var]) for k in self.coeffs), default=0)

    def degrees(self) -> tuple:
        return tuple(self.degree(i) for i in range(self.nvars))

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        terms = sorted(self.coeffs.items())[:6]
        body = ", ".join(f"{k}: {v:.4g}" for k, v in terms)
        more = "..." if len(self.coeffs) > 6 else ""
        return f"TrigPoly({self.nvars}, {{{body}{more}}})"


# ---------------------------------------------------------------------------
# Group actions.  An action maps a (kappa, coeff) pair to its image; elements
# of the acting group are bit tuples, the action of a tuple composes the
# generator actions.
# ---------------------------------------------------------------------------

def _act_z23(g: tuple, kappa: tuple, coeff: complex):
    """Action of Z_2^3 on trig polys in (alpha, beta, gamma).

    Generators: (alpha,beta,gamma) -> (-alpha,beta,-gamma); -> (-gamma,-beta,-alpha);
    -> (pi-gamma, beta, pi-alpha), the last one contributing (-1)^(k1+k3).
    """
    a, b, c = kappa
    if g[0]:
        a, b, c = -a, b, -c
    if g[1]:
        a, b, c = -c, -b, -a
    if g[2]:
        coeff = coeff * (-1) ** ((a + c) % 2)
        a, b, c = -c, b, -a
    return (a, b, c), coeff


def _act_z22(g: tuple, kappa: tuple, coeff: complex):
    """Action of Z_2^2: (-alpha,beta,-gamma) and (alpha-pi,-beta,gamma-pi)."""
    a, b, c = kappa
    if g[0]:
        a, b, c = -a, b, -c
    if g[1]:
        coeff = coeff * (-1) ** ((a + c) % 2)
        b = -b
    return (a, b, c), coeff


GROUPS = {
    "z2^3": ([(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)], _act_z23),
    "z2^2": ([(i, j) for i in (0, 1) for j in (0, 1)], _act_z22),
}


def act(group: str, g: tuple, p: TrigPoly) -> TrigPoly:
    """Apply one group element to a polynomial."""
    _, action = GROUPS[group]
    out: dict = {}
    for k, v in p.coeffs.items():
        nk, nv = action(g, k, v)
        out[nk] = out.get(nk, 0.0) + nv
    return TrigPoly(p.nvars, out)


def character(z: tuple, g: tuple) -> int:
    return -1 if sum(zi * gi for zi, gi in zip(z, g)) % 2 else 1


def project(group: str, z: tuple, p: TrigPoly) -> TrigPoly:
    """Projection Pi_z p = |G|^-1 sum_g conj(chi_z(g)) (g . p)."""
    elements, _ = GROUPS[group]
    out = TrigPoly(p.nvars)
    for g in elements:
        out = out + act(group, g, p).scale(character(z, g) / len(elements))
    return out


@dataclass(frozen=True)
class CharacterBasis:
    """Basis of one character eigenspace of the projected monomial span."""

    group: str
    character: tuple
    elements: tuple  # tuple of TrigPoly


def _orbit(group: str, kappa: tuple):
    elements, action = GROUPS[group]
    seen = set()
    for g in elements:
        nk, _ = action(g, kappa, 1.0)
        seen.add(nk)
    return seen


def symmetry_adapted_basis(
    group: str, n_sides: int, d: int, half_degrees: tuple | None = None
) -> list:
    """Character-eigenspace bases of the invariant monomial span.

    The monomial grid follows the degree bookkeeping of the theta-prime
    assembly: for z2^3 frequencies (k1*N, k2, k3*N) with |k1|,|k3| <=
    floor(d/N)/2 and |k2| <= d/2; for z2^2 frequencies (k1*N, k2, k3) with
    |k3| <= N*floor(d/N)/2.  ``half_degrees`` overrides the grid's (a1, a2,
    a3) index bounds for reduced-degree SOS multipliers.
    """
    dn = d // n_sides
    if half_degrees is None:
        if group == "z2^3":
            half_degrees = (dn // 2, d // 2, dn // 2)
        else:
            half_degrees = (dn // 2, d // 2, (n_sides * dn) // 2)
    a1, a2, a3 = half_degrees

    monomials = []
    for k1 in range(-a1, a1 + 1):
        for k2 in range(-a2, a2 + 1):
            for k3 in range(-a3, a3 + 1):
                if group == "z2^3":
                    monomials.append((k1 * n_sides, k2, k3 * n_sides))
                else:
                    monomials.append((k1 * n_sides, k2, k3))
    monomials.sort(key=lambda k: (sum(abs(x) for x in k), k))

    elements, _ = GROUPS[group]
    bases = []
    for z in elements:
        basis = []
        used_orbits = set()
        for kappa in monomials:
            rep = max(_orbit(group, kappa))
            if rep in used_orbits:
                continue
            proj = project(group, z, TrigPoly.monomial(3, kappa))
            if len(proj) == 0:
                continue
            used_orbits.add(rep)
            # Normalize so the lexicographically largest exponent has coeff 1.
            lead = proj.coeffs[max(proj.coeffs)]
            proj = proj.scale(1.0 / lead)
            # Each projected monomial is a real-valued or purely imaginary
            # function (the full negation -kappa always lies in the orbit).
            # Rotating the imaginary ones by -i makes every basis element
            # real-valued, so Gram products are real and real symmetric PSD
            # coefficient matrices lose no generality.
            if not proj.is_hermitian():
                proj = proj.scale(-1.0j)
                if not proj.is_hermitian():
                    raise AssertionError("projected monomial is not of pure type")
            basis.append(proj)
        bases.append(CharacterBasis(group, z, tuple(basis)))
    return bases


def zn_univariate_exponent_classes(n: int, d: int) -> list:
    """Exponent labels of the Z_N residue blocks of a univariate Gram basis.

    Working with Z_N-invariant univariate trig polynomials splits the Gram
    matrix over monomials e^{ir theta}, |r| <= d, into blocks indexed by the
    residue of r mod N; block k >= 1 is a principal submatrix of block 0, so
    only block 0 is needed in computations.
    """
    return [
        [r for r in range(d, -d - 1, -1) if (r - k) % n == 0] for k in range(n)
    ]


# ---------------------------------------------------------------------------
# Rotation-entry polynomials and the invariant domain polynomials s_k.
# ---------------------------------------------------------------------------

def rotation_entry_polys() -> list:
    """The 3x3 matrix of R(alpha,beta,gamma) entries as exact trig polys.

    Variables ordered (alpha, beta, gamma); built by multiplying the matrices
    R_Z(gamma) R_X(beta) R_Z(alpha) entrywise.
    """
    zero = TrigPoly(3)
    one = TrigPoly.constant(3, 1.0)

    def rz(var):
        c, s = TrigPoly.cos(3, var), TrigPoly.sin(3, var)
        return [[c, s, zero], [s.scale(-1), c, zero], [zero, zero, one]]

    def rx(var):
        c, s = TrigPoly.cos(3, var), TrigPoly.sin(3, var)
        return [[one, zero, zero], [zero, c, s], [zero, s.scale(-1), c]]

    def matmul(x, y):
        return [
            [
                x[i][0] * y[0][j] + x[i][1] * y[1][j] + x[i][2] * y[2][j]
                for j in range(3)
            ]
            for i in range(3)
        ]

    return matmul(matmul(rz(2), rx(1)), rz(0))


def s_k_polynomials(spec) -> list:
    """Elementary symmetric functions of a_0 . R(alpha,beta,gamma) u_j.

    Returns [s_1, ..., s_N]; each is invariant under Z_N acting on alpha and
    under the Z_2^2 action, and s_k >= 0 for all k cuts out the facet domain
    Sigma_2'.
    """
    from .geometry import build_geometry

    geo = build_geometry(spec)
    n = spec.n_sides
    rentries = rotation_entry_polys()
    a0 = geo.facet_normals[0]
    hs = []
    for j in range(n):
        uj = geo.vertices[j]
        h = TrigPoly(3)
        for r in range(3):
            for c in range(3):
                w = a0[r] * uj[c]
                if abs(w) > DROP_TOL:
                    h = h + rentries[r][c].scale(w)
        hs.append(h)
    # e_k via the usual Newton-style expansion of prod_j (t + h_j).
    elem = [TrigPoly.constant(3, 1.0)]
    for h in hs:
        elem.append(TrigPoly(3))
        for k in range(len(elem) - 1, 0, -1):
            elem[k] = elem[k] + elem[k - 1] * h
    return [e.hermitize() for e in elem[1:]]


# ---------------------------------------------------------------------------
# Assembly of the theta-prime SOS identities into a block SDP.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SosConstraint:
    """Bookkeeping for one SOS identity: which domain it certifies and which
    Gram blocks (with their weight polynomials) enter it."""

    domain: str               # "sigma1" or "sigma2prime"
    weights: tuple            # weight TrigPoly per multiplier (constant 1 first)
    gram_blocks: tuple        # per multiplier: tuple of (character, block_index, basis)


@dataclass(frozen=True)
class FBlockInfo:
    k: int
    size: int                 # complex block size n_k
    block_index: int          # solver block (embedded) or the shared diag block
    offset: int               # slot within the shared diag block when size == 1


@dataclass(frozen=True)
class ThetaAssembly:
    problem: object           # SdpProblem
    spec: object
    d: int
    f_blocks: tuple           # FBlockInfo per k
    scalar_block: int         # index of the shared diag block for 1x1 F_k
    sos_constraints: tuple    # SosConstraint per identity
    equation_keys: tuple      # (kappa, part) per constraint row


def adjust_degree(n_sides: int, d: int) -> int:
    """Largest d' <= d with d' and floor(d'/N) both even."""
    dd = d
    while dd >= 2 and not (dd % 2 == 0 and (dd // n_sides) % 2 == 0):
        dd -= 1
    if dd < 2:
        raise ValueError(f"no admissible degree at or below {d}")
    return dd


def _canonical(kappa: tuple):
    """Return (canonical kappa, conjugated?) pairing kappa with -kappa."""
    neg = tuple(-x for x in kappa)
    if kappa >= neg:
        return kappa, False
    return neg, True


def _f_basis_polys(k: int, n_sides: int) -> list:
    """Real-parameter basis of Hermitian F_k with the trig poly <H, Ybar_k>.

    Returns a list of (label, poly) with label ("diag", p), ("re", p, q) or
    ("im", p, q); poly is the contribution of a unit parameter to f.
    """
    from .harmonic import block_indices, wigner_as_trig

    idx = block_indices(k, n_sides)
    sz = len(idx)
    y = {}
    for i, m in enumerate(idx):
        for j, n in enumerate(idx):
            y[i, j] = wigner_as_trig(k, m, n, n_sides)

    def ybar(i, j):
        # (1/4)(Y + Y* + Y' + Y'*) entrywise; Y' flips alpha and gamma signs.
        def flip(p):
            return TrigPoly(3, {(-a, b, -c): v for (a, b, c), v in p.coeffs.items()})

        return (
            y[i, j] + y[j, i].conjugate() + flip(y[i, j]) + flip(y[j, i]).conjugate()
        ).scale(0.25)

    out = []
    for p in range(sz):
        out.append((("diag", p), ybar(p, p).hermitize()))
    for p in range(sz):
        for q in range(p + 1, sz):
            # F_pq = x_re + i x_im contributes conj(F_pq) Ybar_pq + conj(F_qp) Ybar_qp.
            re_poly = (ybar(p, q) + ybar(q, p)).hermitize()
            im_poly = ((ybar(p, q) - ybar(q, p)).scale(-1.0j)).hermitize()
            out.append((("re", p, q), re_poly))
            out.append((("im", p, q), im_poly))
    return out


def assemble_theta_sdp(spec, d: int) -> ThetaAssembly:
    """Build the block SDP whose optimum is the degree-d theta-prime bound.

    Variables: Bochner blocks F_k (k = 0..d) plus real symmetric Gram blocks
    for the SOS multipliers sigma_0, sigma_1 on the circumcircle domain and
    sigma'_0..sigma'_N on the facet domain.  Constraints match every monomial
    coefficient of both identities against the constant -1; the objective
    minimizes 1 + f(identity) = 1 + sum_k tr F_k.
    """
    import math as _math

    from .geometry import build_geometry, is_admissible  # noqa: F401  (spec gate upstream)
    from .harmonic import block_indices
    from .sdp import SdpProblem

    n = spec.n_sides
    d = adjust_degree(n, d)
    dn = d // n
    if d < n:
        raise ValueError("degree too small for the facet-domain multipliers")

    blocks = []            # (kind, size)
    f_infos = []
    scalar_slots = []
    for k in range(d + 1):
        sz = len(block_indices(k, n))
        if sz == 1:
            f_infos.append(None)  # placeholder, patched after diag block exists
            scalar_slots.append(k)
        else:
            blocks.append(("sym", 2 * sz))
            f_infos.append(FBlockInfo(k, sz, len(blocks) - 1, -1))
    scalar_block = len(blocks)
    blocks.append(("diag", max(1, len(scalar_slots))))
    for off, k in enumerate(scalar_slots):
        f_infos[k] = FBlockInfo(k, 1, scalar_block, off)

    # Equations accumulate entries keyed by (kappa, part) -> {(block,i,j): val}.
    equations: dict = {}

    def add_entries(poly: TrigPoly, emit):
        """Scatter a Hermitian poly's canonical monomials via emit(key, re, im)."""
        for kappa, val in poly.coeffs.items():
            canon, conj = _canonical(kappa)
            if conj:
                continue
            emit(canon, val.real, val.imag)

    def add_to_equation(kappa, part, block, i, j, val):
        if abs(val) <= DROP_TOL:
            return
        key = (kappa, part)
        ent = equations.setdefault(key, {})
        ent[(block, i, j)] = ent.get((block, i, j), 0.0) + val

    # --- F_k contributions --------------------------------------------------
    for k in range(d + 1):
        info = f_infos[k]
        for label, poly in _f_basis_polys(k, n):
            if info.size == 1:

                def emit(kappa, re, im, _info=info):
                    add_to_equation(kappa, "re", _info.block_index, _info.offset, _info.offset, re)
                    add_to_equation(kappa, "im", _info.block_index, _info.offset, _info.offset, im)

                add_entries(poly, emit)
                continue
            s = info.size
            b = info.block_index
            kind = label[0]
            if kind == "diag":
                p = label[1]
                # A_pp = (X[p,p] + X[s+p,s+p])/2; diagonal entries count once.
                targets = [(p, p, 0.5), (s + p, s + p, 0.5)]
            elif kind == "re":
                _, p, q = label
                # A_pq = (X[p,q] + X[s+p,s+q])/2; stored entries count twice.
                targets = [(p, q, 0.25), (s + p, s + q, 0.25)]
            else:
                _, p, q = label
                # B_pq = (X[s+p,q] - X[p,s+q])/2 through the skew part.
                targets = [(q, s + p, 0.25), (p, s + q, -0.25)]

            def emit(kappa, re, im, _targets=targets, _b=b):
                for i, j, w in _targets:
                    ii, jj = min(i, j), max(i, j)
                    add_to_equation(kappa, "re", _b, ii, jj, re * w)
                    add_to_equation(kappa, "im", _b, ii, jj, im * w)

            add_entries(poly, emit)

    # --- SOS multiplier blocks ----------------------------------------------
    geo = build_geometry(spec)
    g_poly = TrigPoly(3, {(0, 0, 0): _math.cos(2.0 * spec.rho)}) - TrigPoly.cos(3, 1)
    sks = s_k_polynomials(spec)

    def multiplier_halfdeg(weight: TrigPoly):
        bound = (n * dn, d, n * dn)
        degs = weight.degrees()
        a1 = (bound[0] - degs[0]) // (2 * n)
        a2 = (bound[1] - degs[1]) // 2
        a3 = (bound[2] - degs[2]) // 2
        if a1 < 0 or a2 < 0 or a3 < 0:
            raise ValueError("multiplier degree would be negative; increase d")
        return a1, a2, a3

    sos_meta = []
    for domain, group, weights in (
        ("sigma1", "z2^3", [TrigPoly.constant(3, 1.0), g_poly]),
        ("sigma2prime", "z2^2", [TrigPoly.constant(3, 1.0)] + sks),
    ):
        gram_meta = []
        for weight in weights:
            if group == "z2^3":
                wdeg = weight.degrees()
                a1 = (n * dn - wdeg[0]) // (2 * n)
                a2 = (d - wdeg[1]) // 2
                a3 = (n * dn - wdeg[2]) // (2 * n)
                if min(a1, a2, a3) < 0:
                    raise ValueError("multiplier degree would be negative; increase d")
                half = (a1, a2, a3)
            else:
                half = multiplier_halfdeg(weight)
            bases = symmetry_adapted_basis(group, n, d, half_degrees=half)
            char_meta = []
            for cb in bases:
                if not cb.elements:
                    continue
                blocks.append(("sym", len(cb.elements)))
                bidx = len(blocks) - 1
                char_meta.append((cb.character, bidx, cb.elements))
                for r in range(len(cb.elements)):
                    for c in range(r, len(cb.elements)):
                        prod = (cb.elements[r] * cb.elements[c] * weight).hermitize()

                        def emit(kappa, re, im, _b=bidx, _r=r, _c=c):
                            add_to_equation(kappa, "re", _b, _r, _c, re)
                            add_to_equation(kappa, "im", _b, _r, _c, im)

                        add_entries(prod, emit)
            gram_meta.append(tuple(char_meta))
        sos_meta.append(
            SosConstraint(domain=domain, weights=tuple(weights), gram_blocks=tuple(gram_meta))
        )

    # --- flatten equations ----------------------------------------------------
    keys = sorted(
        equations.keys(),
        key=lambda kp: (sum(abs(x) for x in kp[0]), kp[0], kp[1]),
    )
    constraints = []
    rhs = []
    eqkeys = []
    for key in keys:
        ents = equations[key]
        if all(abs(v) <= DROP_TOL for v in ents.values()):
            continue
        con: dict = {}
        for (b, i, j), v in sorted(ents.items()):
            con.setdefault(b, []).append((i, j, v))
        constraints.append(con)
        rhs.append(-1.0 if (key[0] == (0, 0, 0) and key[1] == "re") else 0.0)
        eqkeys.append(key)

    objective: dict = {}
    for info in f_infos:
        if info.size == 1:
            objective.setdefault(info.block_index, []).append(
                (info.offset, info.offset, 1.0)
            )
        else:
            for i in range(2 * info.size):
                objective.setdefault(info.block_index, []).append((i, i, 0.5))

    problem = SdpProblem(blocks, constraints, rhs, objective, sense="min")
    return ThetaAssembly(
        problem=problem,
        spec=spec,
        d=d,
        f_blocks=tuple(f_infos),
        scalar_block=scalar_block,
        sos_constraints=tuple(sos_meta),
        equation_keys=tuple(eqkeys),
    )


def extract_bochner(assembly: ThetaAssembly, solution) -> object:
    """Recover Hermitian F_k blocks from the solved embedded real blocks."""
    from .harmonic import BochnerCoefficients

    blocks = []
    for info in assembly.f_blocks:
        if info.size == 1:
            val = float(solution.primal_blocks[info.block_index][info.offset])
            blocks.append(np.array([[complex(val)]]))
        else:
            s = info.size
            x = solution.primal_blocks[info.block_index]
            a = 0.5 * (x[:s, :s] + x[s:, s:])
            bsk = 0.5 * (x[s:, :s] - x[:s, s:])
            a = 0.5 * (a + a.T)
            bsk = 0.5 * (bsk - bsk.T)
            blocks.append(a + 1j * bsk)
    return BochnerCoefficients(assembly.d, assembly.spec.n_sides, tuple(blocks))


def reexpand_identity(assembly: ThetaAssembly, solution, which: str) -> TrigPoly:
    """Rebuild f + sigma terms from a solution; equals the constant -1 at a
    valid solution (assembly self-consistency check)."""
    coeffs = extract_bochner(assembly, solution)
    total = TrigPoly(3)
    n = assembly.spec.n_sides
    for k, blk in enumerate(coeffs.blocks):
        for (label, poly) in _f_basis_polys(k, n):
            kind = label[0]
            if kind == "diag":
                total = total + poly.scale(blk[label[1], label[1]].real)
            elif kind == "re":
                total = total + poly.scale(blk[label[1], label[2]].real)
            else:
                total = total + poly.scale(blk[label[1], label[2]].imag)
    meta = {c.domain: c for c in assembly.sos_constraints}
    cons = meta[which]
    for weight, char_blocks in zip(cons.weights, cons.gram_blocks):
        for _z, bidx, basis in char_blocks:
            q = solution.primal_blocks[bidx]
            for r in range(len(basis)):
                for c in range(len(basis)):
                    term = (basis[r] * basis[c] * weight).scale(q[r, c])
                    total = total + term
    return total.hermitize()
