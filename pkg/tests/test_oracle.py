import numpy as np
import pytest

from curvham import geometry as ge
from curvham import oracle
from curvham.errors import SingularPointError
from curvham.units import Constants

PI = np.pi
CYL = ge.SurfaceSpec.cylinder(1.0)
SPH = ge.SurfaceSpec.sphere(1.0)
TOR = ge.SurfaceSpec.torus(2.0, 0.5)


class TestRing:
    def test_free(self):
        np.testing.assert_allclose(oracle.ring_spectrum(1.0, 0.0, 2).values(3), [-0.125, 0.375, 0.375])

    def test_half_flux(self):
        levels = oracle.ring_spectrum(1.0, 0.5, 3).levels
        assert levels[0].energy == 0.0 and levels[0].degeneracy == 2

    def test_integer_shift(self):
        a = oracle.ring_spectrum(1.0, 0.3, 6).values(9)
        b = oracle.ring_spectrum(1.0, 1.3, 6).values(9)
        np.testing.assert_allclose(a, b, atol=1e-14)

    def test_constants(self):
        c = Constants(hbar=2.0, m=0.5)
        ev = oracle.ring_spectrum(2.0, 0.0, 1, c).values(2)
        np.testing.assert_allclose(ev, [-c.hbar**2 / (8 * c.m * 4), c.hbar**2 / (2 * c.m * 4) - c.hbar**2 / (8 * c.m * 4)])

    def test_naive_brute_force_agrees(self):
        naive = oracle.naive_ring_spectrum(1.0, 0.3, 512)[:4]
        np.testing.assert_allclose(naive, oracle.ring_spectrum(1.0, 0.3, 3).values(4), atol=5e-5)

    def test_lattice_formula_converges(self):
        ref = oracle.ring_spectrum(1.0, 0.25, 3).values(5)
        errs = [np.abs(oracle.ring_lattice_spectrum(1.0, 0.25, N)[:5] - ref).max() for N in (64, 128, 256)]
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


class TestCylinder:
    def test_lowest(self):
        lv = oracle.cylinder_spectrum(1.0, PI, 0.0, 2, 2).levels
        assert lv[0].energy == pytest.approx(0.375, rel=1e-15)
        assert lv[1].energy == pytest.approx(0.875, rel=1e-15) and lv[1].degeneracy == 2

    def test_long_cylinder_approaches_ring(self):
        cyl = oracle.cylinder_spectrum(1.0, 1e4, 0.2, 3, 1).values(5)
        ring = oracle.ring_spectrum(1.0, 0.2, 3).values(5)
        np.testing.assert_allclose(cyl, ring, atol=1e-7)
        assert np.all(cyl > ring)


class TestSphere:
    def test_levels(self):
        s = oracle.sphere_spectrum(1.0, 4)
        np.testing.assert_array_equal(s.energies(), [0, 1, 3, 6, 10])
        assert s.degeneracies() == [1, 3, 5, 7, 9]

    def test_scaling(self):
        np.testing.assert_allclose(oracle.sphere_spectrum(2.0, 4).energies(), np.array([0, 1, 3, 6, 10]) / 4)

    def test_state_count(self):
        assert sum(oracle.sphere_spectrum(1.0, 6).degeneracies()) == 49
        assert oracle.sphere_spectrum(1.0, 6).values().size == 49


class TestSphereFirstOrder:
    def test_m_zero(self):
        assert oracle.sphere_uniform_b_first_order(1.0, 0.01, 3, 0) == 0.0

    def test_frozen_value(self):
        assert oracle.sphere_uniform_b_first_order(1.0, 0.01, 1, 1) == pytest.approx(-0.005, rel=1e-12)

    @pytest.mark.parametrize("l,m", [(1, 1), (2, 1), (2, 2), (3, 2)])
    def test_odd_in_m(self, l, m):
        a = oracle.sphere_uniform_b_first_order(1.0, 0.02, l, m)
        b = oracle.sphere_uniform_b_first_order(1.0, 0.02, l, -m)
        assert a == pytest.approx(-b, rel=1e-12)

    def test_linear_in_B0(self):
        a = oracle.sphere_uniform_b_first_order(1.0, 0.01, 2, 1)
        b = oracle.sphere_uniform_b_first_order(1.0, 0.03, 2, 1)
        assert b == pytest.approx(3 * a, rel=1e-12)


class TestEmbeddingCurvatures:
    def test_values(self):
        M, K = oracle.embedding_curvatures(CYL, 0.4, 0.1)
        assert abs(float(M)) == pytest.approx(0.5, rel=1e-14) and float(K) == pytest.approx(0.0, abs=1e-15)
        M, K = oracle.embedding_curvatures(SPH, 1.0, 0.1)
        assert abs(float(M)) == pytest.approx(1.0, rel=1e-14) and float(K) == pytest.approx(1.0, rel=1e-14)
        _, K = oracle.embedding_curvatures(TOR, 0.0, 0.0)
        assert float(K) == pytest.approx(0.8, rel=1e-14)

    def test_sign_matches_closed_form(self):
        rng = np.random.default_rng(1)
        q1, q2 = rng.uniform(0.2, 2.9, 200), rng.uniform(0, 2 * PI, 200)
        for s in (CYL, SPH, TOR):
            M, K = oracle.embedding_curvatures(s, q1, q2)
            np.testing.assert_allclose(M, ge.mean_curvature(s, q1, q2), atol=1e-12)
            np.testing.assert_allclose(K, ge.gaussian_curvature(s, q1, q2), atol=1e-12)

    def test_pole(self):
        with pytest.raises(SingularPointError):
            oracle.embedding_curvatures(SPH, PI, 0.0)


class TestSOCIdentity:
    def test_zero(self):
        q = np.linspace(0.1, 3.0, 16)
        rep = oracle.soc_divergence_identity_residual(TOR, np.zeros((3, 3)), q, q)
        assert rep.max_residual == 0.0

    @pytest.mark.parametrize("s", [CYL, SPH, TOR], ids=["cylinder", "sphere", "torus"])
    def test_random_constant_W(self, s):
        rng = np.random.default_rng(8)
        N = 64
        q1 = (np.arange(N) + 0.5) * PI / N if s is SPH else np.arange(N) * 2 * PI / N
        q2 = np.arange(N) * 2 * PI / N if s is not CYL else np.linspace(-2, 2, N)
        Q1, Q2 = np.meshgrid(q1, q2, indexing="ij")
        rep = oracle.soc_divergence_identity_residual(s, rng.normal(size=(3, 3)), Q1, Q2)
        assert rep.evaluated == N * N
        assert rep.max_magnitude > 0.1
        assert rep.max_residual <= 1e-10

    def test_pole_points_skipped(self):
        q1 = np.array([0.0, PI / 2, PI])
        rep = oracle.soc_divergence_identity_residual(SPH, np.eye(3), q1, np.zeros(3))
        assert rep.skipped == 2 and rep.evaluated == 1
