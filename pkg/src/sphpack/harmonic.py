"""Irreducible representations of SO(3) in Euler coordinates.

Jacobi polynomials by stable three-term recurrence, the Wigner-type matrix
entries P^k_mn, the representation entries rho_k, the Z_N-restricted blocks
Y_k and their symmetrizations, and evaluation of positive-type functions
parametrized by Bochner coefficient blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .trigsos import TrigPoly


def jacobi(deg: int, a: int, b: int, w):
    """Jacobi polynomial P_deg^{(a,b)}(w), standard normalization.

    P_deg^{(a,b)}(1) = binom(deg+a, deg).  Accepts scalars or arrays in w.
    """
    if deg < 0 or a < 0 or b < 0:
        raise ValueError("deg, a, b must be nonnegative")
    w = np.asarray(w, dtype=float)
    p_prev = np.ones_like(w)
    if deg == 0:
        return p_prev if p_prev.shape else float(p_prev)
    p_cur = (a + 1) + (a + b + 2) * (w - 1.0) / 2.0
    for n in range(2, deg + 1):
        c1 = 2 * n * (n + a + b) * (2 * n + a + b - 2)
        c2 = 2 * n + a + b - 1
        c3 = (2 * n + a + b) * (2 * n + a + b - 2)
        c4 = a * a - b * b
        c5 = 2 * (n + a - 1) * (n + b - 1) * (2 * n + a + b)
        p_cur, p_prev = (c2 * (c3 * w + c4) * p_cur - c5 * p_prev) / c1, p_cur
    return p_cur if p_cur.shape else float(p_cur)


@lru_cache(maxsize=4096)
def _jacobi_coeffs(deg: int, a: int, b: int) -> tuple:
    """Exact monomial coefficients of P_deg^{(a,b)} as Fractions (low to high)."""
    if deg == 0:
        return (Fraction(1),)
    p_prev = [Fraction(1)]
    p_cur = [Fraction(a - b, 2), Fraction(a + b + 2, 2)]
    for n in range(2, deg + 1):
        c1 = Fraction(2 * n * (n + a + b) * (2 * n + a + b - 2))
        c2 = Fraction(2 * n + a + b - 1)
        c3 = Fraction((2 * n + a + b) * (2 * n + a + b - 2))
        c4 = Fraction(a * a - b * b)
        c5 = Fraction(2 * (n + a - 1) * (n + b - 1) * (2 * n + a + b))
        nxt = [Fraction(0)] * (n + 1)
        for i, coef in enumerate(p_cur):
            nxt[i + 1] += c2 * c3 * coef
            nxt[i] += c2 * c4 * coef
        for i, coef in enumerate(p_prev):
            nxt[i] -= c5 * coef
        p_cur, p_prev = [x / c1 for x in nxt], p_cur
    return tuple(p_cur)


def _reduce_mn(m: int, n: int):
    """Reduce (m, n) into the quadrant m >= |n| using the two symmetries.

    Returns (m', n', sign) with P^k_mn = sign * P^k_m'n' and m'-n', m'+n' >= 0.
    """
    sign = 1.0
    if m + n < 0:
        m, n = -m, -n
        sign *= (-1.0) ** ((m - n) % 2)
    if m - n < 0:
        m, n = n, m
        sign *= (-1.0) ** ((m - n) % 2)
    return m, n, sign


def wigner_p(k: int, m: int, n: int, w):
    """Wigner-type function P^k_mn(w) for integer k and m, n in [-k, k]."""
    if abs(m) > k or abs(n) > k:
        raise ValueError("indices must satisfy |m|, |n| <= k")
    w = np.asarray(w, dtype=float)
    m, n, sign = _reduce_mn(m, n)
    pref = math.sqrt(
        math.factorial(k - m) * math.factorial(k + m)
        / (math.factorial(k - n) * math.factorial(k + n))
    )
    val = (
        pref
        * 2.0 ** (-m)
        * (1.0 - w) ** ((m - n) / 2.0)
        * (1.0 + w) ** ((m + n) / 2.0)
        * jacobi(k - m, m - n, m + n, w)
    )
    out = sign * val
    return out if np.shape(out) else float(out)


def rho_entry(k: int, m: int, n: int, e) -> complex:
    """Matrix entry rho_k(R(alpha,beta,gamma))_mn = i^{m-n} e^{i(m gamma + n alpha)} P^k_mn(cos beta)."""
    return (
        1j ** ((m - n) % 4)
        * np.exp(1j * (m * e.gamma + n * e.alpha))
        * wigner_p(k, m, n, math.cos(e.beta))
    )


def rho_matrix(k: int, e) -> np.ndarray:
    """Full (2k+1)x(2k+1) representation matrix, rows/cols ordered m = -k..k."""
    out = np.empty((2 * k + 1, 2 * k + 1), dtype=complex)
    for i, m in enumerate(range(-k, k + 1)):
        for j, n in enumerate(range(-k, k + 1)):
            out[i, j] = rho_entry(k, m, n, e)
    return out


def block_indices(k: int, n_sides: int) -> list:
    """The multiples of N in [-k, k], the index set of the Y_k block."""
    top = (k // n_sides) * n_sides
    return list(range(-top, top + 1, n_sides))


def y_matrix(k: int, n_sides: int, e) -> np.ndarray:
    """Y_k block: rho_k entries restricted to row/column indices divisible by N."""
    idx = block_indices(k, n_sides)
    out = np.empty((len(idx), len(idx)), dtype=complex)
    for i, m in enumerate(idx):
        for j, n in enumerate(idx):
            out[i, j] = rho_entry(k, m, n, e)
    return out


def ybar_matrix(k: int, n_sides: int, e) -> np.ndarray:
    """Symmetrized block (1/4)(Y + Y* + Y' + Y'*) with Y' = Y(-alpha, beta, -gamma)."""
    from .so3 import EulerAngles

    y = y_matrix(k, n_sides, e)
    eneg = EulerAngles(
        (-e.alpha) % (2 * math.pi), e.beta, (-e.gamma) % (2 * math.pi)
    )
    yneg = y_matrix(k, n_sides, eneg)
    return 0.25 * (y + y.conj().T + yneg + yneg.conj().T)


@dataclass(frozen=True)
class BochnerCoefficients:
    """Hermitian PSD blocks F_k parametrizing a positive-type function.

    blocks[k] is indexed by the multiples of N in [-k, k]; the represented
    function is f = sum_k <F_k, Ybar_k>.
    """

    degree_cap: int
    n_sides: int
    blocks: tuple  # tuple of complex ndarrays

    def __post_init__(self):
        if len(self.blocks) != self.degree_cap + 1:
            raise ValueError("need one block per degree 0..d")
        for k, blk in enumerate(self.blocks):
            sz = len(block_indices(k, self.n_sides))
            if blk.shape != (sz, sz):
                raise ValueError(f"block {k} has wrong shape {blk.shape}")

    def validate(self, herm_tol: float = 1e-12, psd_tol: float = -1e-10) -> None:
        for blk in self.blocks:
            if np.max(np.abs(blk - blk.conj().T)) > herm_tol:
                raise ValueError("block is not Hermitian")
            if np.linalg.eigvalsh(blk).min() < psd_tol:
                raise ValueError("block is not PSD")

    def to_dict(self) -> dict:
        return {
            "d": self.degree_cap,
            "N": self.n_sides,
            "blocks": [
                {
                    "k": k,
                    "entries": [
                        [[float(v.real), float(v.imag)] for v in row] for row in blk
                    ],
                }
                for k, blk in enumerate(self.blocks)
            ],
        }

    @staticmethod
    def from_dict(d: dict) -> "BochnerCoefficients":
        blocks = []
        for item in d["blocks"]:
            blocks.append(
                np.array(
                    [[complex(re, im) for re, im in row] for row in item["entries"]]
                )
            )
        return BochnerCoefficients(d["d"], d["N"], tuple(blocks))


def evaluate_f(coeffs: BochnerCoefficients, e) -> float:
    """Evaluate f = sum_k <F_k, Ybar_k> at one rotation, asserting realness."""
    total = 0.0 + 0.0j
    for k, blk in enumerate(coeffs.blocks):
        yb = ybar_matrix(k, coeffs.n_sides, e)
        total += np.sum(blk.conj() * yb)
    if abs(total.imag) > 1e-10:
        raise ArithmeticError(f"imaginary residue {total.imag} exceeds tolerance")
    return float(total.real)


def evaluate_f_batch(coeffs: BochnerCoefficients, alpha, beta, gamma) -> np.ndarray:
    """Vectorized evaluation of f over arrays of Euler angles.

    For Hermitian F the symmetrized sum collapses to the manifestly real form
    <F, Ybar> = sum_mn Re(conj(F_mn) i^{m-n}) P^k_mn(cos beta) cos(m gamma + n alpha).
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    w = np.cos(beta)
    total = np.zeros(np.broadcast(alpha, beta, gamma).shape)
    nsides = coeffs.n_sides
    for k, blk in enumerate(coeffs.blocks):
        blk = 0.5 * (blk + blk.conj().T)
        idx = block_indices(k, nsides)
        for i, m in enumerate(idx):
            for j, n in enumerate(idx):
                c = (blk[i, j].conjugate() * 1j ** ((m - n) % 4)).real
                if abs(c) < 1e-16:
                    continue
                total += c * wigner_p(k, m, n, w) * np.cos(m * gamma + n * alpha)
    return total


# ---------------------------------------------------------------------------
# Exact Laurent expansion of Y_k entries, feeding the SOS assembly.
# ---------------------------------------------------------------------------

def _cos_power_laurent(power: int) -> dict:
    """cos^p(beta) as a univariate Laurent map {frequency: Fraction}."""
    out: dict = {}
    for i in range(power + 1):
        freq = 2 * i - power
        out[freq] = out.get(freq, Fraction(0)) + Fraction(math.comb(power, i), 2**power)
    return out


def wigner_as_trig(k: int, m: int, n: int, n_sides: int) -> TrigPoly:
    """The Y_k entry i^{m-n} e^{i(m gamma + n alpha)} P^k_mn(cos beta) as a TrigPoly.

    Requires m and n divisible by N.  m-n and m+n share parity, so the
    half-angle factors combine into integer-frequency terms: an even pair
    gives a polynomial in cos(beta), an odd pair the same times sin(beta).
    """
    if m % n_sides or n % n_sides:
        raise ValueError("m and n must be multiples of N")
    if abs(m) > k or abs(n) > k:
        raise ValueError("indices out of range")
    mr, nr, sign = _reduce_mn(m, n)
    pref = sign * math.sqrt(
        math.factorial(k - mr) * math.factorial(k + mr)
        / (math.factorial(k - nr) * math.factorial(k + nr))
    )
    p = (mr - nr) // 2
    q = (mr + nr) // 2
    odd = (mr - nr) % 2 == 1

    # ((1-cos)/2)^p ((1+cos)/2)^q [ * sin(beta)/2 if odd ] * P_{k-mr}^{(mr-nr, mr+nr)}(cos).
    jac = _jacobi_coeffs(k - mr, mr - nr, mr + nr)
    poly: dict = {0: Fraction(0)}
    for j_pow, j_coef in enumerate(jac):
        if j_coef == 0:
            continue
        for pi in range(p + 1):
            ci = Fraction(math.comb(p, pi) * (-1) ** pi, 2**p)
            for qi in range(q + 1):
                cq = Fraction(math.comb(q, qi), 2**q)
                power = j_pow + pi + qi
                base = j_coef * ci * cq
                for freq, cf in _cos_power_laurent(power).items():
                    poly[freq] = poly.get(freq, Fraction(0)) + base * cf

    beta_terms: dict = {}
    if odd:
        # multiply by sin(beta)/2 = (i/4) e^{-i beta} - (i/4) e^{i beta}
        for freq, cf in poly.items():
            beta_terms[freq - 1] = beta_terms.get(freq - 1, 0) + complex(cf) * 0.25j
            beta_terms[freq + 1] = beta_terms.get(freq + 1, 0) - complex(cf) * 0.25j
    else:
        beta_terms = {f: complex(cf) for f, cf in poly.items()}

    phase = 1j ** ((m - n) % 4)
    coeffs = {}
    for freq, cf in beta_terms.items():
        val = pref * phase * cf
        if abs(val) > 0:
            coeffs[(n, freq, m)] = val
    return TrigPoly(3, coeffs)
