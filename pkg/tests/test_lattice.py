import numpy as np
import pytest
import scipy.sparse as sp

from curvham import fields as fl
from curvham import geometry as ge
from curvham import lattice as la
from curvham import oracle
from curvham.errors import DimensionError, SingularPointError
from curvham.spectra import eigen_lowest

PI = np.pi
RING = ge.SurfaceSpec.ring(1.0)
SPH = ge.SurfaceSpec.sphere(1.0)
TOR = ge.SurfaceSpec.torus(2.0, 0.5)
CYL = ge.SurfaceSpec.cylinder(1.0, L=PI)


def _ring_op(N, alpha=0.0, chi=None):
    g = la.build_grid(RING, N)
    links = la.link_phases(g, fl.FluxLine(alpha))
    if chi is not None:
        links = la.site_gauge_transform(links, chi)
    return la.assemble_spin0(g, links)


def _eigvalsh(op):
    return np.linalg.eigvalsh(op.toarray())


class TestGrid:
    def test_ring(self):
        g = la.build_grid(RING, 8)
        np.testing.assert_allclose(g.q1, 2 * PI * np.arange(8) / 8, rtol=1e-15)
        np.testing.assert_allclose(g.weights, 2 * PI / 8, rtol=1e-15)

    def test_sphere_staggered(self):
        g = la.build_grid(SPH, 4, 8)
        np.testing.assert_allclose(g.q1, [PI / 8, 3 * PI / 8, 5 * PI / 8, 7 * PI / 8], rtol=1e-15)
        assert g.top2 is la.Topology.PERIODIC

    def test_sphere_rejects_poles(self):
        with pytest.raises(SingularPointError):
            la.build_grid(SPH, 4, 8, stagger=False)

    def test_torus_area(self):
        g = la.build_grid(TOR, 4, 4)
        assert g.weights.sum() == pytest.approx(4 * PI**2 * 0.5 * 2.0, rel=1e-14)

    def test_cylinder_dirichlet_interior(self):
        g = la.build_grid(CYL, 8, 6)
        assert g.top1 is la.Topology.PERIODIC and g.top2 is la.Topology.DIRICHLET
        np.testing.assert_allclose(g.q2, PI * np.arange(1, 7) / 7, rtol=1e-15)

    @pytest.mark.parametrize("s,n", [(RING, (16, 1)), (CYL, (8, 6)), (SPH, (8, 16)), (TOR, (8, 8))])
    def test_weights_positive(self, s, n):
        assert np.all(la.build_grid(s, *n).weights > 0)


class TestLinks:
    def test_zero_potential(self):
        g = la.build_grid(TOR, 8, 8)
        L = la.link_phases(g, fl.zero_potential())
        assert np.all(L.U1 == 1) and np.all(L.U2 == 1)

    def test_ring_flux(self):
        g = la.build_grid(RING, 8)
        L = la.link_phases(g, fl.FluxLine(0.5))
        np.testing.assert_allclose(L.U1, np.exp(1j * PI / 8), atol=1e-15)
        assert np.prod(L.U1) == pytest.approx(-1.0, abs=1e-14)

    def test_flux_product(self):
        g = la.build_grid(RING, 64)
        for alpha in (0.1, 0.3, 0.77):
            L = la.link_phases(g, fl.FluxLine(alpha))
            assert np.prod(L.U1) == pytest.approx(np.exp(2j * PI * alpha), abs=1e-13)

    def test_unit_modulus(self):
        g = la.build_grid(TOR, 16, 16)
        L = la.link_phases(g, fl.UniformB.along((0.3, 0.4, np.sqrt(0.75)), 0.9))
        assert np.abs(np.abs(L.U1) - 1).max() <= 1e-15
        assert np.abs(np.abs(L.U2) - 1).max() <= 1e-15

    def test_uniform_flux_through_sphere_band(self):
        # The phase around a latitude circle equals the enclosed flux.
        g = la.build_grid(SPH, 8, 32)
        L = la.link_phases(g, fl.UniformB.along((0, 0, 1), 0.7))
        loop = np.prod(L.U2, axis=1)
        flux = 0.7 * PI * np.sin(g.q1) ** 2
        np.testing.assert_allclose(np.angle(loop), np.angle(np.exp(1j * flux)), atol=1e-13)


class TestSiteGauge:
    def test_trivial_phases(self):
        g = la.build_grid(TOR, 8, 8)
        L = la.link_phases(g, fl.UniformB.along((0, 0, 1), 0.5))
        for chi in (np.zeros(g.shape), np.full(g.shape, 1.3)):
            M = la.site_gauge_transform(L, chi)
            np.testing.assert_allclose(M.U1, L.U1, atol=1e-15)
            np.testing.assert_allclose(M.U2, L.U2, atol=1e-15)

    def test_random_ring(self):
        rng = np.random.default_rng(11)
        a = _eigvalsh(_ring_op(64, 0.3))
        b = _eigvalsh(_ring_op(64, 0.3, chi=rng.uniform(0, 2 * PI, (64, 1))))
        assert np.abs(a - b).max() <= 1e-12

    def test_operator_is_unitarily_conjugated(self):
        rng = np.random.default_rng(2)
        g = la.build_grid(TOR, 8, 8)
        L = la.link_phases(g, fl.UniformB.along((0, 0, 1), 0.5))
        chi = rng.uniform(0, 2 * PI, g.shape)
        H = la.assemble_spin0(g, L).toarray()
        Hc = la.assemble_spin0(g, la.site_gauge_transform(L, chi)).toarray()
        U = np.diag(np.exp(1j * chi.ravel()))
        np.testing.assert_allclose(Hc, U @ H @ U.conj().T, atol=1e-14)


class TestSpin0:
    def test_ring_matches_lattice_formula(self):
        for alpha in (0.0, 0.25, 0.5):
            ev = _eigvalsh(_ring_op(64, alpha))
            np.testing.assert_allclose(ev, oracle.ring_lattice_spectrum(1.0, alpha, 64), atol=1e-13)

    def test_ring_low_levels(self):
        ev = eigen_lowest(_ring_op(256), 3).eigenvalues
        assert ev[0] == pytest.approx(-0.125, abs=1e-5)
        np.testing.assert_allclose(ev[1:], 0.375, rtol=1e-4)
        assert ev[2] - ev[1] <= 1e-10

    def test_sphere_multiplets(self):
        g = la.build_grid(SPH, 64, 128)
        res = eigen_lowest(la.assemble_spin0(g), 16)
        levels = res.levels()
        assert [d for _, d in levels] == [1, 3, 5, 7]
        np.testing.assert_allclose([e for e, _ in levels], [0, 1, 3, 6], atol=2e-2)

    def test_cylinder_dirichlet(self):
        g = la.build_grid(CYL, 64, 64)
        ev = eigen_lowest(la.assemble_spin0(g), 1).eigenvalues
        assert ev[0] == pytest.approx(0.375, rel=1e-3)

    def test_scalar_potential_shift(self):
        g = la.build_grid(TOR, 8, 8)
        H0 = la.assemble_spin0(g).toarray()
        H1 = la.assemble_spin0(g, V=fl.ScalarPotential(0.75)).toarray()
        np.testing.assert_allclose(H1 - H0, 0.75 * np.eye(64), atol=1e-14)

    def test_zero_field_reduction(self):
        g = la.build_grid(TOR, 8, 8)
        a = la.assemble_spin0(g).matrix
        b = la.assemble_spin0(g, la.link_phases(g, fl.UniformB.along((0, 0, 1), 0.0))).matrix
        assert (a != b).nnz == 0

    @pytest.mark.parametrize("s,n", [(RING, (32, 1)), (CYL, (8, 6)), (SPH, (8, 16)), (TOR, (8, 8))])
    def test_hermitian(self, s, n):
        g = la.build_grid(s, *n)
        p = fl.FluxLine(0.3) if s.kind in (ge.SurfaceKind.RING, ge.SurfaceKind.CYLINDER) else fl.UniformB.along((1, 0, 1), 0.4)
        op = la.assemble_spin0(g, la.link_phases(g, p))
        assert op.hermiticity_residual() <= 1e-13 * op.scale

    def test_factor_reproduces_matrix(self):
        g = la.build_grid(TOR, 12, 12)
        op = la.assemble_spin0(g, la.link_phases(g, fl.UniformB.along((0, 1, 1), 0.6)))
        f = op.factor
        H = (f.tocsr().conj().T @ f.tocsr() + sp.diags(f.d)).toarray()
        assert np.abs(H - op.toarray()).max() <= 1e-14 * op.scale

    def test_dimension_guard(self):
        with pytest.raises(DimensionError):
            la.assemble_spin0(la.build_grid(TOR, 8, 8), max_dim=32)

    def test_export_coo(self, tmp_path):
        op = _ring_op(8, 0.2)
        path = tmp_path / "h.txt"
        op.export_coo(path)
        data = np.loadtxt(path, comments="#")
        H = np.zeros((8, 8), complex)
        H[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2] + 1j * data[:, 3]
        np.testing.assert_array_equal(H, op.toarray())


class TestPauli:
    def test_doubling(self):
        g = la.build_grid(TOR, 8, 8)
        L = la.link_phases(g, fl.UniformB.along((0, 0, 1), 0.0))
        H0 = la.assemble_spin0(g, L).toarray()
        H2 = la.assemble_pauli(g, L).toarray()
        n = H0.shape[0]
        # spin-major layout: index s * n + site
        np.testing.assert_array_equal(H2[:n, :n], H0)
        np.testing.assert_array_equal(H2[n:, n:], H0)
        assert not np.any(H2[:n, n:]) and not np.any(H2[n:, :n])

    def test_zeeman_splitting(self):
        g = la.build_grid(CYL, 16, 12)
        L = la.link_phases(g, fl.UniformB.along((0, 0, 1), 0.2))
        e0 = _eigvalsh(la.assemble_spin0(g, L))
        e2 = _eigvalsh(la.assemble_pauli(g, L, b=fl.MagneticFieldSpec.constant((0, 0, 0.2))))
        ref = np.sort(np.concatenate([e0 - 0.1, e0 + 0.1]))
        assert np.abs(e2 - ref).max() <= 1e-10

    @pytest.mark.parametrize("scheme", ["central", "links"])
    @pytest.mark.parametrize("s,n", [(CYL, (8, 6)), (SPH, (8, 16)), (TOR, (8, 8))])
    def test_soc_hermitian(self, s, n, scheme):
        rng = np.random.default_rng(4)
        g = la.build_grid(s, *n)
        p = fl.FluxLine(0.37) if s.kind is ge.SurfaceKind.CYLINDER else fl.UniformB.along((0, 0, 1), 0.3)
        op = la.assemble_pauli(g, la.link_phases(g, p), soc=fl.SOCVector(rng.normal(size=(3, 3))),
                               b=fl.magnetic_field(p), scheme=scheme)
        assert op.dim == 2 * g.n_sites
        assert op.hermiticity_residual() <= 1e-13 * op.scale

    def test_soc_gauge_invariance(self):
        rng = np.random.default_rng(6)
        g = la.build_grid(TOR, 8, 8)
        L = la.link_phases(g, fl.UniformB.along((0, 0, 1), 0.3))
        w = fl.SOCVector(0.4 * rng.normal(size=(3, 3)))
        a = _eigvalsh(la.assemble_pauli(g, L, soc=w))
        b = _eigvalsh(la.assemble_pauli(g, la.site_gauge_transform(L, rng.uniform(0, 2 * PI, g.shape)), soc=w))
        assert np.abs(a - b).max() <= 1e-12


class TestInnerProduct:
    def test_ground_state_normalized(self):
        op = _ring_op(64, 0.1)
        res = eigen_lowest(op, 3)
        g = op.grid
        v = res.eigenvectors
        assert la.inner_product(g, v[:, 0], v[:, 0]) == pytest.approx(1.0, abs=1e-12)
        assert abs(la.inner_product(g, v[:, 0], v[:, 1])) <= 1e-10

    def test_torus_area(self):
        g = la.build_grid(TOR, 16, 16)
        one = np.ones(g.n_sites)
        assert la.inner_product(g, one, one).real == pytest.approx(4 * PI**2, rel=1e-14)

    def test_dimension_mismatch(self):
        g = la.build_grid(RING, 8)
        with pytest.raises(DimensionError):
            la.inner_product(g, np.ones(8), np.ones(9))
