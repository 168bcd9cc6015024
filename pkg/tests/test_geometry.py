import numpy as np
import pytest

from curvham import geometry as ge
from curvham import oracle
from curvham.errors import ConfigurationError, SingularPointError

PI = np.pi
CYL = ge.SurfaceSpec.cylinder(1.0)
SPH = ge.SurfaceSpec.sphere(1.0)
TOR = ge.SurfaceSpec.torus(2.0, 0.5)


def _points(s, n=1000, seed=7):
    rng = np.random.default_rng(seed)
    if s.kind is ge.SurfaceKind.SPHERE:
        q1 = rng.uniform(0.05, PI - 0.05, n)
    else:
        q1 = rng.uniform(0.0, 2 * PI, n)
    if s.kind is ge.SurfaceKind.CYLINDER:
        q2 = rng.uniform(-2.0, 2.0, n)
    else:
        q2 = rng.uniform(0.0, 2 * PI, n)
    return q1, q2


class TestSurfaceSpec:
    def test_torus_requires_R_greater_than_r(self):
        with pytest.raises(ConfigurationError):
            ge.SurfaceSpec.torus(0.5, 0.5)

    def test_radius_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            ge.SurfaceSpec.sphere(-1.0)

    def test_dict_round_trip(self):
        for s in (CYL, SPH, TOR, ge.SurfaceSpec.ring(2.0), ge.SurfaceSpec.cylinder(1.0, L=3.0)):
            assert ge.SurfaceSpec.from_dict(s.to_dict()) == s


class TestScaleFactors:
    def test_cylinder(self):
        h = ge.scale_factors(CYL, 0.3, 0.0, 0.0)
        assert (float(h.h1), float(h.h2), float(h.h3)) == (1.0, 1.0, 1.0)

    def test_sphere_equator(self):
        h = ge.scale_factors(SPH, PI / 2, 0.4, 0.0)
        np.testing.assert_allclose([h.h1, h.h2, h.h3], [1.0, 1.0, 1.0], atol=1e-15)

    def test_torus(self):
        h = ge.scale_factors(TOR, PI / 2, 0.0, 0.0)
        np.testing.assert_allclose([h.h1, h.h2, h.h3], [0.5, 2.0, 1.0], atol=1e-15)

    def test_offset_from_surface(self):
        h = ge.scale_factors(SPH, PI / 2, 0.0, 0.5)
        np.testing.assert_allclose([h.h1, h.h2], [1.5, 1.5], rtol=1e-15)


class TestCurvatures:
    def test_mean_curvature(self):
        assert ge.mean_curvature(CYL, 0.3, 0.0) == pytest.approx(-0.5, abs=1e-15)
        assert ge.mean_curvature(SPH, 1.0, 0.0) == pytest.approx(-1.0, abs=1e-15)
        assert ge.mean_curvature(TOR, PI / 2, 0.0) == pytest.approx(-1.0, abs=1e-15)

    def test_gaussian_curvature(self):
        assert ge.gaussian_curvature(CYL, 0.3, 1.0) == 0.0
        assert ge.gaussian_curvature(ge.SurfaceSpec.sphere(2.0), 1.0, 0.0) == pytest.approx(0.25, rel=1e-15)
        assert ge.gaussian_curvature(TOR, PI / 2, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert ge.gaussian_curvature(TOR, 0.0, 0.0) == pytest.approx(0.8, rel=1e-15)

    def test_geometric_potential(self):
        assert ge.geometric_potential(CYL, 0.1, 0.0) == pytest.approx(-0.125, rel=1e-15)
        assert ge.geometric_potential(SPH, 0.9, 2.0) == pytest.approx(0.0, abs=1e-15)
        assert ge.geometric_potential(TOR, PI / 2, 0.0) == pytest.approx(-0.5, rel=1e-14)

    def test_gke_is_consistent(self):
        for s in (CYL, SPH, TOR):
            q1, q2 = _points(s)
            c = ge.curvature(s, q1, q2)
            np.testing.assert_allclose(c.gke, -0.5 * (c.M**2 - c.K), rtol=1e-14, atol=1e-16)

    def test_sphere_umbilic(self):
        q1, q2 = _points(SPH)
        assert np.abs(ge.mean_curvature(SPH, q1, q2) ** 2 - ge.gaussian_curvature(SPH, q1, q2)).max() <= 1e-14

    def test_torus_gke_closed_form(self):
        q1, q2 = _points(TOR)
        R, r = 2.0, 0.5
        ref = -(R**2) / (8 * r**2 * (R + r * np.cos(q1)) ** 2)
        np.testing.assert_allclose(ge.geometric_potential(TOR, q1, q2), ref, rtol=1e-14)

    @pytest.mark.parametrize("s", [CYL, SPH, TOR], ids=["cylinder", "sphere", "torus"])
    def test_matches_embedding(self, s):
        q1, q2 = _points(s)
        assert np.abs(ge.geometric_potential(s, q1, q2) - oracle.embedding_gke(s, q1, q2)).max() <= 1e-10

    @pytest.mark.parametrize("s", [CYL, SPH, TOR, ge.SurfaceSpec.ring(1.3)], ids=["cylinder", "sphere", "torus", "ring"])
    def test_normal_momentum_is_minus_mean_curvature(self, s):
        q1, q2 = _points(s)
        diff = ge.normal_momentum_correction(s, q1, q2) + ge.mean_curvature(s, q1, q2)
        assert np.abs(diff).max() <= 1e-12

    def test_normal_momentum_values(self):
        assert ge.normal_momentum_correction(CYL, 0.0, 0.0) == pytest.approx(0.5, rel=1e-15)
        assert ge.normal_momentum_correction(SPH, 1.0, 0.0) == pytest.approx(1.0, rel=1e-15)
        assert ge.normal_momentum_correction(TOR, 0.0, 0.0) == pytest.approx(1.2, rel=1e-15)

    def test_pole_is_singular(self):
        for fn in (ge.mean_curvature, ge.geometric_potential, ge.normal_momentum_correction, ge.frame):
            with pytest.raises(SingularPointError):
                fn(SPH, 0.0, 0.3)


class TestEmbedding:
    def test_surface_points(self):
        np.testing.assert_allclose(ge.surface_point(CYL, 0.0, 0.0), [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(ge.surface_point(SPH, PI / 2, 0.0), [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(ge.surface_point(TOR, 0.0, 0.0), [2.5, 0, 0], atol=1e-15)

    def test_frames(self):
        f = ge.frame(CYL, 0.0, 0.0)
        np.testing.assert_allclose(np.array(f), [[0, 1, 0], [0, 0, 1], [1, 0, 0]], atol=1e-15)
        f = ge.frame(SPH, PI / 2, 0.0)
        np.testing.assert_allclose(np.array(f), [[0, 0, -1], [0, 1, 0], [1, 0, 0]], atol=1e-15)
        f = ge.frame(TOR, PI / 2, 0.0)
        np.testing.assert_allclose(np.array(f), [[-1, 0, 0], [0, 1, 0], [0, 0, 1]], atol=1e-15)

    @pytest.mark.parametrize("s", [CYL, SPH, TOR], ids=["cylinder", "sphere", "torus"])
    def test_frame_orthonormal_and_oriented(self, s):
        q1, q2 = _points(s)
        e1, e2, n = (np.asarray(v) for v in ge.frame(s, q1, q2))
        E = np.stack([e1, e2, n], axis=-2)
        gram = np.einsum("...ij,...kj->...ik", E, E)
        assert np.abs(gram - np.eye(3)).max() <= 1e-14
        cross = np.cross(e1, e2, axis=-1)
        np.testing.assert_allclose(cross, s.orientation * n, atol=1e-14)

    def test_frame_matches_embedding_derivative(self):
        q1, q2 = _points(TOR, n=50)
        d = oracle.embedding_derivatives(TOR, q1, q2)
        h = ge.scale_factors(TOR, q1, q2)
        e1, e2, _ = ge.frame(TOR, q1, q2)
        np.testing.assert_allclose(np.asarray(e1), d.r1 / np.asarray(h.h1)[..., None], atol=1e-14)
        np.testing.assert_allclose(np.asarray(e2), d.r2 / np.asarray(h.h2)[..., None], atol=1e-14)

    def test_areas(self):
        assert ge.area(TOR) == pytest.approx(4 * PI**2 * 0.5 * 2.0, rel=1e-15)
        assert ge.area(SPH) == pytest.approx(4 * PI, rel=1e-15)
