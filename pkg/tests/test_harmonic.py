import math

import numpy as np
import pytest

from sphpack import harmonic as har
from sphpack.harmonic import (
    BochnerCoefficients,
    block_indices,
    evaluate_f,
    evaluate_f_batch,
    jacobi,
    rho_entry,
    rho_matrix,
    wigner_as_trig,
    wigner_p,
    y_matrix,
    ybar_matrix,
)
from sphpack.so3 import EulerAngles, UnitaryTwo, haar_sample, rotation_to_euler, su2_to_so3


def rand_euler(rng):
    return EulerAngles(
        rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
    )


def test_jacobi_base_cases():
    rng = np.random.default_rng(0)
    for w in rng.uniform(-1, 1, size=10):
        assert jacobi(0, 3, 2, w) == 1.0
        assert jacobi(1, 0, 0, w) == pytest.approx(w, abs=1e-15)


def test_jacobi_normalization_at_one():
    for deg in range(11):
        for a in range(4):
            for b in range(3):
                assert jacobi(deg, a, b, 1.0) == pytest.approx(
                    math.comb(deg + a, deg), rel=1e-13
                )


def test_jacobi_against_scipy():
    from scipy.special import eval_jacobi

    rng = np.random.default_rng(1)
    w = rng.uniform(-1, 1, size=50)
    for deg in (2, 5, 9, 14):
        for a, b in [(0, 0), (1, 3), (4, 2)]:
            assert np.allclose(jacobi(deg, a, b, w), eval_jacobi(deg, a, b, w), rtol=1e-12)


def test_jacobi_exact_coefficients():
    # Legendre P_2(w) = (3 w^2 - 1)/2 via the exact coefficient recurrence.
    from fractions import Fraction

    assert har._jacobi_coeffs(2, 0, 0) == (Fraction(-1, 2), Fraction(0), Fraction(3, 2))
    rng = np.random.default_rng(2)
    for deg, a, b in [(3, 1, 2), (6, 0, 4), (8, 2, 2)]:
        coefs = har._jacobi_coeffs(deg, a, b)
        for w in rng.uniform(-1, 1, size=5):
            direct = sum(float(c) * w**i for i, c in enumerate(coefs))
            assert direct == pytest.approx(jacobi(deg, a, b, w), rel=1e-10, abs=1e-12)


def test_wigner_p_base_and_legendre():
    rng = np.random.default_rng(3)
    for w in rng.uniform(-1, 1, size=10):
        assert wigner_p(0, 0, 0, w) == 1.0
        assert wigner_p(1, 0, 0, w) == pytest.approx(w, abs=1e-15)


def test_wigner_p_symmetries_exact():
    rng = np.random.default_rng(4)
    for _ in range(200):
        k = int(rng.integers(0, 9))
        m = int(rng.integers(-k, k + 1))
        n = int(rng.integers(-k, k + 1))
        w = rng.uniform(-1, 1)
        base = wigner_p(k, m, n, w)
        s = (-1.0) ** ((m - n) % 2)
        assert wigner_p(k, n, m, w) == pytest.approx(s * base, abs=1e-12)
        assert wigner_p(k, -m, -n, w) == pytest.approx(s * base, abs=1e-12)


def test_rho_unitary_and_identity():
    rng = np.random.default_rng(5)
    assert rho_entry(0, 0, 0, rand_euler(rng)) == pytest.approx(1.0)
    for k in range(1, 13):
        e = rand_euler(rng)
        u = rho_matrix(k, e)
        assert np.max(np.abs(u @ u.conj().T - np.eye(2 * k + 1))) < 1e-10
        assert np.max(np.abs(u.conj().T @ u - np.eye(2 * k + 1))) < 1e-10
    # Identity rotation maps to the identity matrix.
    for k in (1, 4, 7):
        assert np.allclose(rho_matrix(k, EulerAngles(0, 0, 0)), np.eye(2 * k + 1))


def test_rho_homomorphism():
    rng = np.random.default_rng(6)
    for k in (1, 2, 5, 12):
        for _ in range(3):
            r1, r2 = haar_sample(rng), haar_sample(rng)
            m1 = rho_matrix(k, rotation_to_euler(r1))
            m2 = rho_matrix(k, rotation_to_euler(r2))
            m12 = rho_matrix(k, rotation_to_euler(r1 @ r2))
            assert np.max(np.abs(m12 - m1 @ m2)) < 1e-9


def test_rho_su2_bridge():
    # rho entries computed through Euler angles of Phi(U) match the SU(2) path.
    rng = np.random.default_rng(7)
    for _ in range(10):
        alpha = rng.uniform(0, 2 * math.pi)
        beta = rng.uniform(0.05, math.pi - 0.05)
        gamma = rng.uniform(0, 2 * math.pi)
        u = UnitaryTwo.from_euler(alpha, beta, gamma)
        e = rotation_to_euler(su2_to_so3(u))
        for k in (1, 3):
            direct = rho_matrix(k, EulerAngles(alpha, beta, gamma))
            via_phi = rho_matrix(k, e)
            assert np.max(np.abs(direct - via_phi)) < 1e-9


def test_schur_orthogonality_quadrature():
    # Integrate products of entries over Euler angles with weight sin(beta);
    # distinct entries of (possibly equal) irreducibles are orthogonal.  The
    # beta integral uses Gauss-Legendre in cos(beta), exact for these degrees.
    n_grid = 24
    alphas = np.linspace(0, 2 * math.pi, n_grid, endpoint=False)
    nodes, gl_weights = np.polynomial.legendre.leggauss(n_grid)
    betas = np.arccos(nodes)
    gammas = np.linspace(0, 2 * math.pi, n_grid, endpoint=False)
    ag, bg, gg = np.meshgrid(alphas, betas, gammas, indexing="ij")
    weight = np.broadcast_to(gl_weights[None, :, None], ag.shape)
    norm = weight.sum()

    def entry(k, m, n):
        return (
            1j ** ((m - n) % 4)
            * np.exp(1j * (m * gg + n * ag))
            * wigner_p(k, m, n, np.cos(bg))
        )

    pairs = [((2, 1, 0), (2, 0, 1)), ((1, 0, 0), (2, 0, 0)), ((3, 2, -1), (3, 1, -1))]
    for (k1, m1, n1), (k2, m2, n2) in pairs:
        val = np.sum(entry(k1, m1, n1) * np.conj(entry(k2, m2, n2)) * weight) / norm
        assert abs(val) < 1e-6
    # Non-trivial sanity: the diagonal inner product is 1/(2k+1).
    val = np.sum(np.abs(entry(2, 1, 0)) ** 2 * weight) / norm
    assert val == pytest.approx(1 / 5, abs=1e-6)


def test_y_matrix_small_k_is_legendre():
    rng = np.random.default_rng(8)
    for k in (0, 1, 2, 3):
        e = rand_euler(rng)
        y = y_matrix(k, 4, e)
        assert y.shape == (1, 1)
        assert y[0, 0] == pytest.approx(wigner_p(k, 0, 0, math.cos(e.beta)))


def test_ybar_hermitian_and_symmetric():
    rng = np.random.default_rng(9)
    for _ in range(5):
        e = rand_euler(rng)
        for k, n in [(4, 4), (5, 5), (8, 4)]:
            yb = ybar_matrix(k, n, e)
            assert np.max(np.abs(yb - yb.conj().T)) < 1e-12
            eneg = EulerAngles(
                (-e.alpha) % (2 * math.pi), e.beta, (-e.gamma) % (2 * math.pi)
            )
            assert np.max(np.abs(yb - ybar_matrix(k, n, eneg))) < 1e-12


def random_bochner(rng, d, n_sides):
    blocks = []
    for k in range(d + 1):
        sz = len(block_indices(k, n_sides))
        g = rng.standard_normal((sz, sz)) + 1j * rng.standard_normal((sz, sz))
        blocks.append(g @ g.conj().T / (d + 1))
    return BochnerCoefficients(d, n_sides, tuple(blocks))


def test_evaluate_f_constant():
    blocks = [np.array([[1.0 + 0j]])] + [
        np.zeros((len(block_indices(k, 4)),) * 2, dtype=complex) for k in range(1, 5)
    ]
    coeffs = BochnerCoefficients(4, 4, tuple(blocks))
    rng = np.random.default_rng(10)
    for _ in range(5):
        assert evaluate_f(coeffs, rand_euler(rng)) == pytest.approx(1.0)


def test_evaluate_f_relations():
    # f(a,b,g) = f(a-pi,-b,g-pi) = f(-g,-b,-a) = f(pi-g,b,pi-a), plus the
    # mirror relation f(a,b,g) = f(-a,b,-g).
    rng = np.random.default_rng(11)
    coeffs = random_bochner(rng, 6, 4)
    coeffs.validate(herm_tol=1e-10)
    two_pi = 2 * math.pi
    for _ in range(5):
        a = rng.uniform(0, two_pi)
        b = rng.uniform(0.1, math.pi - 0.1)
        g = rng.uniform(0, two_pi)
        base = evaluate_f(coeffs, EulerAngles(a, b, g))
        variants = [
            ((-g) % two_pi, b, (-a) % two_pi),
            ((math.pi - g) % two_pi, b, (math.pi - a) % two_pi),
            ((-a) % two_pi, b, (-g) % two_pi),
        ]
        for aa, bb, gg in variants:
            assert evaluate_f(coeffs, EulerAngles(aa, bb, gg)) == pytest.approx(
                base, abs=1e-9
            )
        # R(alpha, beta, gamma) = R(alpha - pi, -beta, gamma - pi): fold the
        # negative beta back via the first relation composed twice.
        assert evaluate_f(
            coeffs,
            EulerAngles((math.pi - (g - math.pi)) % two_pi, b, (math.pi - (a - math.pi)) % two_pi),
        ) == pytest.approx(base, abs=1e-9)


def test_evaluate_f_batch_matches_scalar():
    rng = np.random.default_rng(12)
    for n_sides in (4, 5):
        coeffs = random_bochner(rng, 7, n_sides)
        es = [rand_euler(rng) for _ in range(20)]
        batch = evaluate_f_batch(
            coeffs,
            np.array([e.alpha for e in es]),
            np.array([e.beta for e in es]),
            np.array([e.gamma for e in es]),
        )
        direct = np.array([evaluate_f(coeffs, e) for e in es])
        assert np.max(np.abs(batch - direct)) < 1e-9


def test_positive_type_gram_psd():
    # Gram matrix (f(T^-1 S)) over Haar-random rotations is PSD.
    rng = np.random.default_rng(13)
    coeffs = random_bochner(rng, 5, 4)
    rots = [haar_sample(rng) for _ in range(20)]
    gram = np.empty((20, 20))
    for i, s in enumerate(rots):
        for j, t in enumerate(rots):
            gram[i, j] = evaluate_f(coeffs, rotation_to_euler(t.T @ s))
    assert np.linalg.eigvalsh(0.5 * (gram + gram.T)).min() > -1e-8


def test_wigner_as_trig_simple():
    p = wigner_as_trig(1, 0, 0, 4)
    assert p.coeffs == {(0, 1, 0): pytest.approx(0.5), (0, -1, 0): pytest.approx(0.5)}
    p2 = wigner_as_trig(2, 0, 0, 4)
    # (3cos^2 b - 1)/2 = 3/4 cos(2b)-part + 1/4 constant
    assert p2.coeffs[(0, 0, 0)] == pytest.approx(0.25)
    assert p2.coeffs[(0, 2, 0)] == pytest.approx(0.375)
    assert p2.coeffs[(0, -2, 0)] == pytest.approx(0.375)


def test_wigner_as_trig_matches_rho_entry():
    rng = np.random.default_rng(14)
    cases = []
    for n_sides in (4, 5):
        for k in range(0, 11):
            for m in block_indices(k, n_sides):
                for n in block_indices(k, n_sides):
                    cases.append((k, m, n, n_sides))
    rng.shuffle(cases)
    for k, m, n, n_sides in cases[:120]:
        poly = wigner_as_trig(k, m, n, n_sides)
        for _ in range(3):
            e = rand_euler(rng)
            direct = rho_entry(k, m, n, e)
            via_poly = poly.evaluate((e.alpha, e.beta, e.gamma))
            assert abs(direct - via_poly) < 1e-10


def test_wigner_as_trig_rejects_bad_indices():
    with pytest.raises(ValueError):
        wigner_as_trig(4, 2, 0, 4)
    with pytest.raises(ValueError):
        wigner_as_trig(2, 4, 0, 4)


def test_bochner_serialization_roundtrip():
    rng = np.random.default_rng(15)
    coeffs = random_bochner(rng, 4, 5)
    back = BochnerCoefficients.from_dict(coeffs.to_dict())
    assert back.degree_cap == coeffs.degree_cap
    for a, b in zip(back.blocks, coeffs.blocks):
        assert np.array_equal(a, b)
