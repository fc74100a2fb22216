"""Regular spherical polygons and interior-disjointness predicates.

A regular N-gon with angular radius rho is the cone over N equally spaced
points at angular distance rho from e3.  The fast disjointness predicate uses
the circumcircle / facet-inequality characterization valid for admissible
polygons; an independent convex-geometry oracle (vertex containment plus
transversal edge crossings) is provided for validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .so3 import Rotation

#: Disagreements closer than this to a constraint boundary are floating-point
#: tangencies and excluded from predicate/oracle equivalence checks.
MARGIN_BAND = 1e-9


@dataclass(frozen=True)
class PolygonSpec:
    """A regular spherical polygon: side count and circumradius in radians."""

    n_sides: int
    rho: float

    def __post_init__(self):
        if self.n_sides < 3:
            raise ValueError("a spherical polygon needs at least 3 sides")
        if not (0.0 < self.rho < math.pi / 2.0):
            raise ValueError("circumradius must lie in (0, pi/2)")

    def to_dict(self) -> dict:
        return {"n": self.n_sides, "rho": self.rho}

    @staticmethod
    def from_dict(d: dict) -> "PolygonSpec":
        return PolygonSpec(d["n"], d["rho"])


@dataclass(frozen=True)
class PolygonGeometry:
    """Derived measurements of a PolygonSpec; all arrays are read-only."""

    spec: PolygonSpec
    vertices: np.ndarray        # (N, 3) unit vectors u_i
    facet_normals: np.ndarray   # (N, 3) unit outward normals, a_i . e3 < 0
    inradius: float
    side_length: float
    inner_angle: float
    area: float

    def vertex_derivatives(self) -> np.ndarray:
        """d u_i / d rho, used by the packer's chain rule."""
        n = self.spec.n_sides
        rho = self.spec.rho
        base = np.array([0.0, math.cos(rho), -math.sin(rho)])
        ang = (2.0 * np.arange(n) - 1.0) * math.pi / n
        out = np.empty((n, 3))
        out[:, 0] = np.sin(ang) * base[1]
        out[:, 1] = np.cos(ang) * base[1]
        out[:, 2] = base[2]
        return out

    def normal_derivatives(self) -> np.ndarray:
        """d a_i / d rho for the unit outward facet normals."""
        u = self.vertices
        du = self.vertex_derivatives()
        n = self.spec.n_sides
        out = np.empty((n, 3))
        for i in range(n):
            j = (i + 1) % n
            c = np.cross(u[i], u[j])
            nc = np.linalg.norm(c)
            chat = c / nc
            sign = -1.0 if chat[2] > 0 else 1.0
            dc = np.cross(du[i], u[j]) + np.cross(u[i], du[j])
            out[i] = sign * (dc - chat * (chat @ dc)) / nc
        return out


@dataclass(frozen=True)
class PlacedPolygon:
    """A congruent copy of the standard polygon: spec plus pose."""

    spec: PolygonSpec
    pose: Rotation

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(), "pose": self.pose.to_list()}

    @staticmethod
    def from_dict(d: dict) -> "PlacedPolygon":
        return PlacedPolygon(PolygonSpec.from_dict(d["spec"]), Rotation.from_list(d["pose"]))


@lru_cache(maxsize=256)
def _build_geometry_cached(n_sides: int, rho: float) -> PolygonGeometry:
    n = n_sides
    ang = (2.0 * np.arange(n) - 1.0) * math.pi / n
    s, c = math.sin(rho), math.cos(rho)
    verts = np.empty((n, 3))
    verts[:, 0] = np.sin(ang) * s
    verts[:, 1] = np.cos(ang) * s
    verts[:, 2] = c

    normals = np.empty((n, 3))
    for i in range(n):
        j = (i + 1) % n
        cr = np.cross(verts[i], verts[j])
        cr /= np.linalg.norm(cr)
        if cr[2] > 0:
            cr = -cr
        normals[i] = cr

    alpha = 2.0 * math.pi / n
    mu_sq = 2.0 + 2.0 * math.cos(alpha) - 2.0 * math.cos(alpha) * c * c + 2.0 * c * c
    inradius = math.acos(2.0 * c / math.sqrt(mu_sq))
    side = math.acos(min(1.0, max(-1.0, float(verts[0] @ verts[1]))))
    inner = math.pi - math.acos(min(1.0, max(-1.0, float(normals[0] @ normals[1]))))
    area = n * inner - (n - 2) * math.pi

    verts.flags.writeable = False
    normals.flags.writeable = False
    return PolygonGeometry(
        spec=PolygonSpec(n_sides, rho),
        vertices=verts,
        facet_normals=normals,
        inradius=inradius,
        side_length=side,
        inner_angle=inner,
        area=area,
    )


def build_geometry(spec: PolygonSpec) -> PolygonGeometry:
    """Vertices, outward facet normals, inradius, side length, inner angle, area."""
    return _build_geometry_cached(spec.n_sides, spec.rho)


def polar_spec(spec: PolygonSpec) -> PolygonSpec:
    """Spec of the polar cone, a regular N-gon generated by the facet normals."""
    geo = build_geometry(spec)
    normals = geo.facet_normals
    bary = normals.sum(axis=0)
    bary /= np.linalg.norm(bary)
    rho_polar = math.acos(min(1.0, max(-1.0, float(normals[0] @ bary))))
    return PolygonSpec(spec.n_sides, rho_polar)


def is_admissible(spec: PolygonSpec) -> bool:
    """Sufficient admissibility test.

    Every N-gon with N >= 4 qualifies; a triangle qualifies when its polar
    has inner angle at least pi/2 and side length at least arccos(-1/4).
    Triangles failing this test may still be admissible (an open conjecture);
    callers tag bounds for them as conjecture-dependent rather than rejecting.
    """
    if spec.n_sides >= 4:
        return True
    polar = build_geometry(polar_spec(spec))
    return (
        polar.inner_angle >= math.pi / 2.0 - 1e-12
        and polar.side_length >= math.acos(-0.25) - 1e-12
    )


def sigma_values(spec: PolygonSpec, s: Rotation):
    """The circumcircle gap p and facet products q, q' for a relative pose.

    p = cos(2 rho) - S33, q_ij = a_i . (S u_j), q'_ij = a_i . (S^T u_j).
    """
    geo = build_geometry(spec)
    m = s.m
    p = math.cos(2.0 * spec.rho) - m[2, 2]
    q = geo.facet_normals @ m @ geo.vertices.T
    qp = geo.facet_normals @ m.T @ geo.vertices.T
    return p, q, qp


def _check_same_spec(a: PlacedPolygon, b: PlacedPolygon) -> None:
    if a.spec != b.spec:
        raise ValueError("placed polygons must share the same spec")


def interiors_disjoint(a: PlacedPolygon, b: PlacedPolygon) -> bool:
    """Admissibility-based disjointness predicate (touching counts as disjoint)."""
    _check_same_spec(a, b)
    s_rel = Rotation(a.pose.m.T @ b.pose.m, validate=False)
    p, q, qp = sigma_values(a.spec, s_rel)
    if p >= 0.0:
        return True
    if bool(np.any(np.all(q >= 0.0, axis=1))):
        return True
    return bool(np.any(np.all(qp >= 0.0, axis=1)))


def interiors_disjoint_batch(spec: PolygonSpec, s_rel: np.ndarray):
    """Vectorized predicate over a (B, 3, 3) array of relative poses.

    Returns (disjoint, margin): margin is the distance of the decisive
    quantities to their sign boundaries, for excluding tangency cases.
    """
    geo = build_geometry(spec)
    m = np.asarray(s_rel, dtype=float)
    p = math.cos(2.0 * spec.rho) - m[:, 2, 2]
    q = np.einsum("ia,bac,jc->bij", geo.facet_normals, m, geo.vertices, optimize=True)
    qp = np.einsum("ia,bca,jc->bij", geo.facet_normals, m, geo.vertices, optimize=True)
    cond1 = p >= 0.0
    cond2 = np.any(np.all(q >= 0.0, axis=2), axis=1)
    cond3 = np.any(np.all(qp >= 0.0, axis=2), axis=1)
    disjoint = cond1 | cond2 | cond3
    margin = np.minimum(
        np.abs(p),
        np.minimum(np.abs(q).min(axis=(1, 2)), np.abs(qp).min(axis=(1, 2))),
    )
    return disjoint, margin


def oracle_disjoint(a: PlacedPolygon, b: PlacedPolygon) -> bool:
    """Independent convex-geometry disjointness test; see oracle_disjoint_batch."""
    _check_same_spec(a, b)
    s_rel = a.pose.m.T @ b.pose.m
    disjoint, _ = oracle_disjoint_batch(a.spec, s_rel[None, :, :])
    return bool(disjoint[0])


def oracle_disjoint_batch(spec: PolygonSpec, s_rel: np.ndarray):
    """Exact convex test, vectorized: interiors intersect iff a barycenter or
    vertex of one cone lies strictly inside the other or two boundary arcs
    cross transversally.

    Returns (disjoint, margin) where margin measures distance to the nearest
    decision boundary of the quantities actually tested.
    """
    geo = build_geometry(spec)
    u = geo.vertices                      # (N, 3)
    a_n = geo.facet_normals               # (N, 3)
    m = np.asarray(s_rel, dtype=float)    # (B, 3, 3)
    nb = m.shape[0]
    n = spec.n_sides

    # Vertices/normals/barycenter of the second copy in the first copy's frame.
    v2 = np.einsum("bac,jc->bja", m, u)           # (B, N, 3) vertices of SK
    e3 = np.array([0.0, 0.0, 1.0])
    c2 = m @ e3                                    # (B, 3) barycenter of SK

    # Strict containment tests: x inside K iff max_i a_i . x < 0.
    def inside_margin(points):  # points (B, P, 3) -> (B, P)
        vals = np.einsum("ia,bpa->bpi", a_n, points, optimize=True)
        return vals.max(axis=2)

    m_v2_in_k = inside_margin(v2)                              # vertex of SK in K
    v1_in_frame2 = np.einsum("bca,jc->bja", m, u)              # S^T u_j
    m_v1_in_k2 = inside_margin(v1_in_frame2)                   # vertex of K in SK
    m_c2_in_k = inside_margin(c2[:, None, :])[:, 0]            # barycenter of SK in K
    m_c1_in_k2 = inside_margin(m[:, 2, :][:, None, :])[:, 0]   # S^T e3 = row 2 of S

    vertex_hit = (m_v2_in_k < 0.0).any(axis=1) | (m_v1_in_k2 < 0.0).any(axis=1)
    center_hit = (m_c2_in_k < 0.0) | (m_c1_in_k2 < 0.0)

    # Transversal crossings between boundary arcs.  Arc k of K runs from
    # u_k to u_{k+1} on the great circle with (unnormalized) normal u_k x u_{k+1};
    # the candidate crossing directions of two circles are +-(n1 x n2).
    nxt = (np.arange(n) + 1) % n
    p1 = u                                  # (N, 3)
    p2 = u[nxt]
    n1 = np.cross(p1, p2)                   # (N, 3)
    q1 = v2                                 # (B, N, 3)
    q2 = v2[:, nxt]
    n2 = np.cross(q1, q2)                   # (B, N, 3)

    w = np.cross(n1[None, :, None, :], n2[:, None, :, :])      # (B, N, N, 3)
    norm_w = np.linalg.norm(w, axis=3)
    safe = np.where(norm_w[..., None] > 1e-30, norm_w[..., None], 1.0)
    w = w / safe

    def arc_margin(wdir):
        # w strictly interior to arc [p, q] iff (p x w).n > 0 and (w x q).n > 0
        # with n = p x q; min over the four side tests is the margin.
        t1 = np.einsum("bika,ia->bik", np.cross(p1[None, :, None, :], wdir), n1, optimize=True)
        t2 = np.einsum("bika,ia->bik", np.cross(wdir, p2[None, :, None, :]), n1, optimize=True)
        t3 = np.einsum("bika,bka->bik", np.cross(q1[:, None, :, :], wdir), n2, optimize=True)
        t4 = np.einsum("bika,bka->bik", np.cross(wdir, q2[:, None, :, :]), n2, optimize=True)
        return np.minimum(np.minimum(t1, t2), np.minimum(t3, t4))

    cross_m = np.maximum(arc_margin(w), arc_margin(-w))        # (B, N, N)
    cross_m = np.where(norm_w > 1e-12, cross_m, -np.inf)       # parallel circles
    m_cross = cross_m.reshape(nb, -1).max(axis=1)
    crossing_hit = m_cross > 0.0

    intersect = vertex_hit | center_hit | crossing_hit
    margin = np.minimum(
        np.minimum(np.abs(m_v2_in_k).min(axis=1), np.abs(m_v1_in_k2).min(axis=1)),
        np.minimum(np.abs(m_c2_in_k), np.abs(m_c1_in_k2)),
    )
    finite_cross = np.where(np.isfinite(cross_m), np.abs(cross_m), np.inf)
    margin = np.minimum(margin, finite_cross.reshape(nb, -1).min(axis=1))
    return ~intersect, margin


def pair_margin(spec: PolygonSpec, s_rel: np.ndarray) -> np.ndarray:
    """Combined predicate+oracle boundary margin for a batch of relative poses."""
    _, m1 = interiors_disjoint_batch(spec, s_rel)
    _, m2 = oracle_disjoint_batch(spec, s_rel)
    return np.minimum(m1, m2)


# ---------------------------------------------------------------------------
# High-precision verification of rounded (rational) packings.
# ---------------------------------------------------------------------------

_HP_DPS = 60
_HP_MARGIN = mpmath.mpf("1e-40")


def _hp_polygon(n_sides: int, rho_rational: Fraction):
    """Vertices and unit facet normals at 60-digit precision."""
    with mpmath.workdps(_HP_DPS):
        rho = mpmath.mpf(rho_rational.numerator) / mpmath.mpf(rho_rational.denominator)
        s, c = mpmath.sin(rho), mpmath.cos(rho)
        verts = []
        for i in range(n_sides):
            ang = mpmath.pi * (2 * i - 1) / n_sides
            verts.append([mpmath.sin(ang) * s, mpmath.cos(ang) * s, c])
        normals = []
        for i in range(n_sides):
            j = (i + 1) % n_sides
            a, b = verts[i], verts[j]
            cr = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
            norm = mpmath.sqrt(cr[0] ** 2 + cr[1] ** 2 + cr[2] ** 2)
            cr = [x / norm for x in cr]
            if cr[2] > 0:
                cr = [-x for x in cr]
            normals.append(cr)
        return verts, normals


def verify_pair_disjoint_hp(n_sides, rho_rational: Fraction, s_rel_rows) -> bool:
    """Check interior-disjointness of a rounded pair at high precision.

    ``s_rel_rows`` is the exact rational relative pose as 9 Fractions
    (row-major).  Trigonometric constants are evaluated to 60 digits and each
    inequality must hold with margin 1e-40, far above the evaluation error,
    so a True answer certifies strict disjointness.  Pass n_sides=None for
    spherical caps (circumcircle condition only).
    """
    with mpmath.workdps(_HP_DPS):
        s = [mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator) for v in s_rel_rows]
        rho = mpmath.mpf(rho_rational.numerator) / mpmath.mpf(rho_rational.denominator)
        p = mpmath.cos(2 * rho) - s[8]
        if p >= _HP_MARGIN:
            return True
        if n_sides is None:
            return False
        verts, normals = _hp_polygon(n_sides, rho_rational)

        def mat_apply(transpose, v):
            if transpose:
                return [
                    s[0] * v[0] + s[3] * v[1] + s[6] * v[2],
                    s[1] * v[0] + s[4] * v[1] + s[7] * v[2],
                    s[2] * v[0] + s[5] * v[1] + s[8] * v[2],
                ]
            return [
                s[0] * v[0] + s[1] * v[1] + s[2] * v[2],
                s[3] * v[0] + s[4] * v[1] + s[5] * v[2],
                s[6] * v[0] + s[7] * v[1] + s[8] * v[2],
            ]

        for transpose in (False, True):
            moved = [mat_apply(transpose, u) for u in verts]
            for a in normals:
                if all(
                    a[0] * w[0] + a[1] * w[1] + a[2] * w[2] >= _HP_MARGIN for w in moved
                ):
                    return True
        return False


# ---------------------------------------------------------------------------
# Mesh export for figures.
# ---------------------------------------------------------------------------

def export_obj(placed: list, arc_steps: int = 16) -> str:
    """Convert placed polygons to a Wavefront OBJ string of vertex fans.

    Each polygon contributes its barycenter plus arc-subdivided boundary
    vertices, triangulated as a fan for rendering.
    """
    lines = ["# sphpack packing export"]
    vert_lines = []
    face_lines = []
    offset = 0
    for poly in placed:
        geo = build_geometry(poly.spec)
        pose = poly.pose.m
        center = pose @ np.array([0.0, 0.0, 1.0])
        ring = []
        n = poly.spec.n_sides
        for i in range(n):
            u0 = geo.vertices[i]
            u1 = geo.vertices[(i + 1) % n]
            for t in np.linspace(0.0, 1.0, arc_steps, endpoint=False):
                p = (1.0 - t) * u0 + t * u1
                p /= np.linalg.norm(p)
                ring.append(pose @ p)
        vert_lines.append(f"v {center[0]:.12f} {center[1]:.12f} {center[2]:.12f}")
        for p in ring:
            vert_lines.append(f"v {p[0]:.12f} {p[1]:.12f} {p[2]:.12f}")
        m = len(ring)
        for i in range(m):
            a = offset + 2 + i
            b = offset + 2 + ((i + 1) % m)
            face_lines.append(f"f {offset + 1} {a} {b}")
        offset += 1 + m
    return "\n".join(lines + vert_lines + face_lines) + "\n"
