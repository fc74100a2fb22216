"""Rotation-group primitives.

Euler parametrization of SO(3), composition, the SU(2) double cover, the
Cayley transform with exact-rational rounding, and Haar sampling.  All types
are immutable values and all operations are pure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

# Construction checks use 1e-12, round-trip checks 1e-10; every caller reuses
# these two constants instead of restating tolerances.
CONSTRUCTION_TOL = 1e-12
ROUNDTRIP_TOL = 1e-10

_DEGENERATE_BETA_TOL = 1e-12


class InvalidRotationError(ValueError):
    """Raised when a matrix fails the orthogonality/determinant invariants."""


def _wrap_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    out = math.fmod(theta, 2.0 * math.pi)
    if out < 0.0:
        out += 2.0 * math.pi
    if out >= 2.0 * math.pi:
        out = 0.0
    return out


@dataclass(frozen=True)
class EulerAngles:
    """Angles (alpha, beta, gamma) with R = R_Z(gamma) R_X(beta) R_Z(alpha)."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 2.0 * math.pi + 1e-15):
            raise ValueError(f"alpha out of range [0, 2pi): {self.alpha}")
        if not (-1e-15 <= self.beta <= math.pi + 1e-15):
            raise ValueError(f"beta out of range [0, pi]: {self.beta}")
        if not (0.0 <= self.gamma < 2.0 * math.pi + 1e-15):
            raise ValueError(f"gamma out of range [0, 2pi): {self.gamma}")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}

    @staticmethod
    def from_dict(d: dict) -> "EulerAngles":
        return EulerAngles(d["alpha"], d["beta"], d["gamma"])


class Rotation:
    """A 3x3 special orthogonal matrix.

    The constructor validates ``m^T m = I`` and ``det m = 1`` to 1e-12.
    Products skip validation (drift is ~1e-15 per multiply); renormalize
    after long chains of compositions with :meth:`renormalized`.
    """

    __slots__ = ("m",)

    def __init__(self, m, validate: bool = True):
        mat = np.asarray(m, dtype=float)
        if mat.shape != (3, 3):
            raise InvalidRotationError(f"expected 3x3 matrix, got shape {mat.shape}")
        if validate:
            if np.max(np.abs(mat.T @ mat - np.eye(3))) > CONSTRUCTION_TOL:
                raise InvalidRotationError("matrix is not orthogonal")
            if abs(np.linalg.det(mat) - 1.0) > CONSTRUCTION_TOL:
                raise InvalidRotationError("matrix determinant is not +1")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "m", mat)

    def __setattr__(self, *args):
        raise AttributeError("Rotation is immutable")

    def __matmul__(self, other: "Rotation") -> "Rotation":
        return Rotation(self.m @ other.m, validate=False)

    @property
    def T(self) -> "Rotation":
        return Rotation(self.m.T, validate=False)

    def apply(self, x) -> np.ndarray:
        return self.m @ np.asarray(x, dtype=float)

    def is_valid(self, tol: float = CONSTRUCTION_TOL) -> bool:
        return (
            np.max(np.abs(self.m.T @ self.m - np.eye(3))) <= tol
            and abs(np.linalg.det(self.m) - 1.0) <= tol
        )

    def renormalized(self) -> "Rotation":
        """Project back onto SO(3) via SVD (nearest rotation)."""
        u, _, vt = np.linalg.svd(self.m)
        r = u @ vt
        if np.linalg.det(r) < 0:
            u[:, -1] = -u[:, -1]
            r = u @ vt
        return Rotation(r, validate=False)

    def __repr__(self):
        return f"Rotation({self.m.tolist()!r})"

    def __eq__(self, other):
        return isinstance(other, Rotation) and np.array_equal(self.m, other.m)

    def isclose(self, other: "Rotation", tol: float = ROUNDTRIP_TOL) -> bool:
        return np.max(np.abs(self.m - other.m)) <= tol

    def to_list(self) -> list:
        """Row-major 9-element serialization."""
        return [float(v) for v in self.m.ravel()]

    @staticmethod
    def from_list(vals: Sequence[float]) -> "Rotation":
        return Rotation(np.asarray(vals, dtype=float).reshape(3, 3))

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(np.eye(3), validate=False)


@dataclass(frozen=True)
class UnitaryTwo:
    """An SU(2) element [[a, b], [-conj(b), conj(a)]] with |a|^2+|b|^2 = 1."""

    a: complex
    b: complex

    def __post_init__(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-9:
            raise ValueError("|a|^2 + |b|^2 must equal 1")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.a, self.b], [-self.b.conjugate(), self.a.conjugate()]],
            dtype=complex,
        )

    @staticmethod
    def from_euler(alpha: float, beta: float, gamma: float) -> "UnitaryTwo":
        """The product U_Z(gamma) U_X(beta) U_Z(alpha)."""
        a = cmath.exp(1j * (alpha + gamma) / 2.0) * math.cos(beta / 2.0)
        b = 1j * cmath.exp(1j * (gamma - alpha) / 2.0) * math.sin(beta / 2.0)
        return UnitaryTwo(a, b)


def rot_x(theta: float) -> Rotation:
    """Rotation fixing e1; note the -sin in the lower-left of the 2x2 block."""
    c, s = math.cos(theta), math.sin(theta)
    return Rotation(np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]]), validate=False)


def rot_z(theta: float) -> Rotation:
    """Rotation fixing e3."""
    c, s = math.cos(theta), math.sin(theta)
    return Rotation(np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]), validate=False)


def euler_to_rotation(e: EulerAngles) -> Rotation:
    """R(alpha, beta, gamma) = R_Z(gamma) R_X(beta) R_Z(alpha)."""
    return rot_z(e.gamma) @ rot_x(e.beta) @ rot_z(e.alpha)


def rotation_to_euler(r: Rotation) -> EulerAngles:
    """Extract Euler angles; round-trips through euler_to_rotation to 1e-10.

    When beta is 0 or pi the angles are not unique; the convention here is
    alpha = 0 with gamma carrying the full Z-rotation.  sin(beta) is read off
    the matrix entries directly (not through acos of m33, which saturates for
    beta below ~1e-8), so the round trip holds for all beta in (1e-9, pi-1e-9).
    """
    if not r.is_valid(tol=1e-9):
        raise InvalidRotationError("input does not satisfy rotation invariants")
    m = r.m
    s_beta = math.hypot(m[0, 2], m[1, 2])
    if s_beta < _DEGENERATE_BETA_TOL:
        if m[2, 2] > 0.0:
            # R = R_Z(gamma + alpha); take alpha = 0.
            gamma = math.atan2(m[0, 1], m[0, 0])
            beta = 0.0
        else:
            # R * R_X(pi)^-1 = R_Z(gamma); R_X(pi) = diag(1, -1, -1).
            gamma = math.atan2(-m[0, 1], m[0, 0])
            beta = math.pi
        return EulerAngles(0.0, beta, _wrap_angle(gamma))
    beta = math.atan2(s_beta, m[2, 2])
    alpha = math.atan2(m[2, 0], -m[2, 1])
    gamma = math.atan2(m[0, 2], m[1, 2])
    return EulerAngles(_wrap_angle(alpha), beta, _wrap_angle(gamma))


def cayley(r: Rotation) -> np.ndarray:
    """Cayley transform (I - R)(I + R)^-1; skew-symmetric for R in SO(3).

    Self-inverse on rotations without -1 eigenvalues.
    """
    m = r.m
    ipr = np.eye(3) + m
    if abs(np.linalg.det(ipr)) < 1e-14:
        raise ValueError("Cayley transform undefined: I + R is singular (-1 eigenvalue)")
    out = np.linalg.solve(ipr.T, (np.eye(3) - m).T).T
    return 0.5 * (out - out.T)


def cayley_inverse(s) -> Rotation:
    """Inverse Cayley transform of a skew-symmetric matrix, returning a Rotation."""
    a = np.asarray(s, dtype=float)
    if np.max(np.abs(a + a.T)) > 1e-9:
        raise ValueError("input must be skew-symmetric")
    ipa = np.eye(3) + a
    out = np.linalg.solve(ipa.T, (np.eye(3) - a).T).T
    return Rotation(out, validate=False)


def _fraction_matrix_inverse(m: list) -> list:
    """Invert a 3x3 matrix of Fractions exactly via the adjugate."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if det == 0:
        raise ValueError("singular rational matrix")
    adj = [
        [e * i - f * h, c * h - b * i, b * f - c * e],
        [f * g - d * i, a * i - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ]
    return [[adj[r][q] / det for q in range(3)] for r in range(3)]


def _fraction_matmul(x: list, y: list) -> list:
    return [[sum(x[r][k] * y[k][q] for k in range(3)) for q in range(3)] for r in range(3)]


class RationalRotation:
    """An exactly orthogonal 3x3 matrix of Fractions with determinant 1."""

    __slots__ = ("m",)

    def __init__(self, m: list):
        self.m = [[Fraction(v) for v in row] for row in m]

    def is_exactly_orthogonal(self) -> bool:
        mt_m = _fraction_matmul([list(col) for col in zip(*self.m)], self.m)
        ident = [[Fraction(int(r == q)) for q in range(3)] for r in range(3)]
        return mt_m == ident

    def det(self) -> Fraction:
        a, b, c = self.m[0]
        d, e, f = self.m[1]
        g, h, i = self.m[2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def to_float(self) -> Rotation:
        return Rotation(np.array([[float(v) for v in row] for row in self.m]), validate=False)

    def transpose(self) -> "RationalRotation":
        return RationalRotation([list(col) for col in zip(*self.m)])

    def __matmul__(self, other: "RationalRotation") -> "RationalRotation":
        return RationalRotation(_fraction_matmul(self.m, other.m))

    def to_pairs(self) -> list:
        """Serialize as row-major numerator/denominator pairs."""
        return [[v.numerator, v.denominator] for row in self.m for v in row]

    @staticmethod
    def from_pairs(pairs: Sequence[Sequence[int]]) -> "RationalRotation":
        vals = [Fraction(p[0], p[1]) for p in pairs]
        return RationalRotation([vals[0:3], vals[3:6], vals[6:9]])


def round_rational(r: Rotation, max_denominator: int) -> RationalRotation:
    """Round a rotation to an exactly orthogonal rational matrix.

    Approximates cayley(r) entrywise by continued-fraction best rational
    approximations, skew-symmetrizes as (A - A^T)/2, and maps back through
    the exact rational Cayley transform, which forces orthogonality.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be positive")
    s = cayley(r)
    x = Fraction(float(s[0, 1])).limit_denominator(max_denominator)
    y = Fraction(float(s[0, 2])).limit_denominator(max_denominator)
    z = Fraction(float(s[1, 2])).limit_denominator(max_denominator)
    a = [
        [Fraction(0), x, y],
        [-x, Fraction(0), z],
        [-y, -z, Fraction(0)],
    ]
    ident = [[Fraction(int(r_ == q)) for q in range(3)] for r_ in range(3)]
    i_plus = [[ident[r_][q] + a[r_][q] for q in range(3)] for r_ in range(3)]
    i_minus = [[ident[r_][q] - a[r_][q] for q in range(3)] for r_ in range(3)]
    return RationalRotation(_fraction_matmul(i_minus, _fraction_matrix_inverse(i_plus)))


def su2_to_so3(u: UnitaryTwo) -> Rotation:
    """The double-cover homomorphism Phi(U) x = xi^-1 (U xi(x) U*).

    xi identifies R^3 with Hermitian traceless 2x2 matrices via
    xi(x) = [[x3, x1 - i x2], [x1 + i x2, -x3]]; this orientation makes
    Phi(U_X(theta)) = R_X(theta) and Phi(U_Z(theta)) = R_Z(theta), which is
    what every representation-theoretic formula downstream relies on.
    """
    um = u.matrix()
    cols = []
    for x in np.eye(3):
        xi = np.array(
            [[x[2], x[0] - 1j * x[1]], [x[0] + 1j * x[1], -x[2]]], dtype=complex
        )
        m = um @ xi @ um.conj().T
        cols.append([m[1, 0].real, m[1, 0].imag, m[0, 0].real])
    return Rotation(np.array(cols).T, validate=False)


def haar_sample(rng: np.random.Generator) -> Rotation:
    """Haar-distributed rotation via a uniform unit quaternion on S^3."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    u = UnitaryTwo(complex(q[0], q[1]), complex(q[2], q[3]))
    return su2_to_so3(u)


def haar_samples(rng: np.random.Generator, count: int) -> np.ndarray:
    """Vectorized Haar sampling; returns an array of shape (count, 3, 3)."""
    q = rng.standard_normal((count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    out = np.empty((count, 3, 3))
    out[:, 0, 0] = 1 - 2 * (y * y + z * z)
    out[:, 0, 1] = 2 * (x * y - z * w)
    out[:, 0, 2] = 2 * (x * z + y * w)
    out[:, 1, 0] = 2 * (x * y + z * w)
    out[:, 1, 1] = 1 - 2 * (x * x + z * z)
    out[:, 1, 2] = 2 * (y * z - x * w)
    out[:, 2, 0] = 2 * (x * z - y * w)
    out[:, 2, 1] = 2 * (y * z + x * w)
    out[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def rotations_to_euler_arrays(mats: np.ndarray):
    """Vectorized Euler extraction for a (B, 3, 3) array of rotations.

    Returns (alpha, beta, gamma) arrays using the same degenerate-beta
    convention as rotation_to_euler.
    """
    m = np.asarray(mats, dtype=float)
    c_beta = np.clip(m[:, 2, 2], -1.0, 1.0)
    beta = np.arccos(c_beta)
    alpha = np.arctan2(m[:, 2, 0], -m[:, 2, 1])
    gamma = np.arctan2(m[:, 0, 2], m[:, 1, 2])
    degen = np.abs(m[:, 2, 2]) >= 1.0 - _DEGENERATE_BETA_TOL
    if np.any(degen):
        up = degen & (m[:, 2, 2] > 0)
        dn = degen & ~up
        alpha[degen] = 0.0
        beta[up] = 0.0
        beta[dn] = np.pi
        gamma[up] = np.arctan2(m[up, 0, 1], m[up, 0, 0])
        gamma[dn] = np.arctan2(-m[dn, 0, 1], m[dn, 0, 0])
    alpha = np.mod(alpha, 2.0 * np.pi)
    gamma = np.mod(gamma, 2.0 * np.pi)
    return alpha, beta, gamma
