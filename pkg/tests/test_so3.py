import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphpack import so3
from sphpack.so3 import (
    EulerAngles,
    InvalidRotationError,
    Rotation,
    UnitaryTwo,
    cayley,
    cayley_inverse,
    euler_to_rotation,
    haar_sample,
    haar_samples,
    rot_x,
    rot_z,
    rotation_to_euler,
    round_rational,
    su2_to_so3,
)


def test_rot_x_identity():
    assert np.allclose(rot_x(0.0).m, np.eye(3), atol=1e-15)


def test_rot_x_pi():
    # Printed matrix entries at theta = pi.
    assert np.allclose(rot_x(math.pi).m, np.diag([1.0, -1.0, -1.0]), atol=1e-15)


def test_rot_matrix_sign_convention():
    # -sin(theta) sits in the lower-left of each 2x2 block.
    t = 0.3
    assert rot_x(t).m[2, 1] == pytest.approx(-math.sin(t))
    assert rot_x(t).m[1, 2] == pytest.approx(math.sin(t))
    assert rot_z(t).m[1, 0] == pytest.approx(-math.sin(t))
    assert rot_z(t).m[0, 1] == pytest.approx(math.sin(t))


def test_rot_z_one_parameter_subgroup():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.uniform(-10, 10, size=2)
        lhs = (rot_z(a) @ rot_z(b)).m
        assert np.allclose(lhs, rot_z(a + b).m, atol=1e-12)


def test_euler_identity_and_degenerate_composition():
    assert np.allclose(euler_to_rotation(EulerAngles(0, 0, 0)).m, np.eye(3))
    a, g = 0.7, 2.1
    assert np.allclose(euler_to_rotation(EulerAngles(a, 0, g)).m, rot_z(a + g).m, atol=1e-14)


def test_euler_inverse_relation():
    # R(alpha, beta, gamma)^-1 = R(pi - gamma, beta, pi - alpha)
    rng = np.random.default_rng(1)
    for _ in range(50):
        alpha, gamma = rng.uniform(0, 2 * math.pi, size=2)
        beta = rng.uniform(0, math.pi)
        r = euler_to_rotation(EulerAngles(alpha, beta, gamma))
        rinv = euler_to_rotation(
            EulerAngles(
                (math.pi - gamma) % (2 * math.pi), beta, (math.pi - alpha) % (2 * math.pi)
            )
        )
        assert np.allclose(r.m.T, rinv.m, atol=1e-12)


def test_rotation_to_euler_simple_cases():
    e = rotation_to_euler(Rotation.identity())
    assert (e.alpha, e.beta, e.gamma) == (0.0, 0.0, 0.0)
    e = rotation_to_euler(rot_x(1.0))
    assert e.alpha == pytest.approx(0.0, abs=1e-12)
    assert e.beta == pytest.approx(1.0, abs=1e-12)
    assert e.gamma == pytest.approx(0.0, abs=1e-12)


def test_rotation_to_euler_roundtrip_haar():
    rng = np.random.default_rng(2)
    for _ in range(200):
        r = haar_sample(rng)
        e = rotation_to_euler(r)
        assert np.max(np.abs(euler_to_rotation(e).m - r.m)) < so3.ROUNDTRIP_TOL


def test_rotation_to_euler_degenerate_beta():
    for theta in (0.0, 1.0, 3.0, 5.0):
        r = rot_z(theta)
        e = rotation_to_euler(r)
        assert e.alpha == 0.0
        assert e.beta == 0.0
        assert np.allclose(euler_to_rotation(e).m, r.m, atol=1e-12)
        rdown = rot_z(theta) @ rot_x(math.pi)
        e = rotation_to_euler(rdown)
        assert e.alpha == 0.0
        assert e.beta == math.pi
        assert np.allclose(euler_to_rotation(e).m, rdown.m, atol=1e-12)


def test_rotation_rejects_non_orthogonal():
    with pytest.raises(InvalidRotationError):
        Rotation(np.eye(3) * 1.01)
    with pytest.raises(InvalidRotationError):
        Rotation(np.diag([1.0, 1.0, -1.0]))  # det = -1


def test_cayley_trivial_cases():
    assert np.allclose(cayley(Rotation.identity()), np.zeros((3, 3)))
    assert np.allclose(cayley_inverse(np.zeros((3, 3))).m, np.eye(3))


def test_cayley_roundtrip_haar():
    rng = np.random.default_rng(3)
    count = 0
    for _ in range(1000):
        r = haar_sample(rng)
        try:
            s = cayley(r)
        except ValueError:
            continue
        count += 1
        assert np.max(np.abs(s + s.T)) < 1e-12
        assert np.max(np.abs(cayley_inverse(s).m - r.m)) < so3.ROUNDTRIP_TOL
    assert count > 990


def test_cayley_rejects_half_turn():
    with pytest.raises(ValueError):
        cayley(rot_x(math.pi))


def test_round_rational_identity():
    rr = round_rational(Rotation.identity(), 1000)
    assert rr.to_float().isclose(Rotation.identity())
    assert rr.is_exactly_orthogonal()


def test_round_rational_quarter_turn():
    rr = round_rational(rot_z(math.pi / 2), 10**6)
    assert np.max(np.abs(rr.to_float().m - rot_z(math.pi / 2).m)) < 1e-6
    assert rr.is_exactly_orthogonal()
    assert rr.det() == Fraction(1)


def test_round_rational_exact_orthogonality_random():
    rng = np.random.default_rng(4)
    for _ in range(20):
        r = haar_sample(rng)
        rr = round_rational(r, 10**4)
        assert rr.is_exactly_orthogonal()
        assert rr.det() == Fraction(1)
        assert np.max(np.abs(rr.to_float().m - r.m)) < 1e-3


def test_rational_rotation_serialization_roundtrip():
    rng = np.random.default_rng(5)
    rr = round_rational(haar_sample(rng), 999)
    back = so3.RationalRotation.from_pairs(rr.to_pairs())
    assert back.m == rr.m


def test_haar_mean_and_cosbeta_distribution():
    from scipy import stats

    mats = haar_samples(np.random.default_rng(6), 100_000)
    m33 = mats[:, 2, 2]
    assert abs(m33.mean()) < 0.01
    # cos(beta) = m33 is uniform on [-1, 1] under Haar.
    res = stats.kstest(m33, stats.uniform(loc=-1.0, scale=2.0).cdf)
    assert res.pvalue > 0.01


def test_haar_samples_are_rotations():
    mats = haar_samples(np.random.default_rng(7), 500)
    eye = np.eye(3)
    for m in mats[:50]:
        assert np.max(np.abs(m.T @ m - eye)) < 1e-12
        assert abs(np.linalg.det(m) - 1.0) < 1e-12
    r = haar_sample(np.random.default_rng(8))
    assert r.is_valid()


def test_su2_kernel_and_axis_rotations():
    assert su2_to_so3(UnitaryTwo(1 + 0j, 0j)).isclose(Rotation.identity())
    assert su2_to_so3(UnitaryTwo(-1 + 0j, 0j)).isclose(Rotation.identity())
    rng = np.random.default_rng(9)
    for _ in range(20):
        t = rng.uniform(0, math.pi)
        ux = UnitaryTwo.from_euler(0.0, t, 0.0)
        assert np.allclose(su2_to_so3(ux).m, rot_x(t).m, atol=1e-12)
        uz = UnitaryTwo.from_euler(t, 0.0, 0.0)
        assert np.allclose(su2_to_so3(uz).m, rot_z(t).m, atol=1e-12)


def test_su2_homomorphism_and_double_cover():
    rng = np.random.default_rng(10)
    for _ in range(20):
        q = rng.standard_normal((2, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        u1 = UnitaryTwo(complex(q[0, 0], q[0, 1]), complex(q[0, 2], q[0, 3]))
        u2 = UnitaryTwo(complex(q[1, 0], q[1, 1]), complex(q[1, 2], q[1, 3]))
        prod = u1.matrix() @ u2.matrix()
        u12 = UnitaryTwo(prod[0, 0], prod[0, 1])
        assert np.allclose(
            su2_to_so3(u12).m, (su2_to_so3(u1) @ su2_to_so3(u2)).m, atol=1e-12
        )
        neg = UnitaryTwo(-u1.a, -u1.b)
        assert np.allclose(su2_to_so3(neg).m, su2_to_so3(u1).m, atol=1e-14)


def test_group_closure_with_renormalization():
    rng = np.random.default_rng(11)
    r = Rotation.identity()
    for _ in range(1000):
        r = r @ haar_sample(rng)
    # Drift stays tiny but renormalization restores the strict invariant.
    assert r.is_valid(tol=1e-11)
    assert r.renormalized().is_valid()


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.floats(0, 2 * math.pi - 1e-9),
    beta=st.floats(1e-6, math.pi - 1e-6),
    gamma=st.floats(0, 2 * math.pi - 1e-9),
)
def test_euler_roundtrip_property(alpha, beta, gamma):
    e = EulerAngles(alpha, beta, gamma)
    back = rotation_to_euler(euler_to_rotation(e))
    assert np.allclose(
        euler_to_rotation(back).m, euler_to_rotation(e).m, atol=so3.ROUNDTRIP_TOL
    )


def test_rotation_serialization():
    rng = np.random.default_rng(12)
    r = haar_sample(rng)
    assert Rotation.from_list(r.to_list()).isclose(r, tol=0)
    e = rotation_to_euler(r)
    assert EulerAngles.from_dict(e.to_dict()) == e
