"""Structured-grid discretization of the surface Hamiltonians.

The kinetic term is written in divergence form with Peierls link phases,

    E[psi] = (hbar^2/2m) sum_edges c_e |conj(U_e) psi_b - psi_a|^2,
    c_e    = (h_other / h_along) * dq_other / dq_along   (at the edge midpoint),

so ``H = W^{-1} L`` with the node weights ``W = diag(h1 h2 dq1 dq2)``. The
stored matrix is the similarity transform ``W^{1/2} H W^{-1/2}``, which is
Hermitian under the flat inner product. States are converted back with
:meth:`SurfaceOperator.to_original`.

Node ``(i, j)`` has flat index ``i * N2 + j``. Pauli operators are
spin-major: index ``s * N + site`` with ``s = 0`` for spin up along z.

Link ``U1[i, j]`` lives on the edge ``(i, j) -> (i+1, j)`` and ``U2[i, j]``
on ``(i, j) -> (i, j+1)``, with ``U = exp(i (e/hbar) int A_k h_k dq_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

from . import fields as fl
from . import geometry as geo
from .errors import ConfigurationError, DimensionError, SingularPointError
from .geometry import SurfaceKind, SurfaceSpec
from .units import NATURAL, Constants

DEFAULT_MAX_DIM = 4_000_000


class Topology(str, Enum):
    PERIODIC = "periodic"
    # ghost node outside the axis carries psi = 0
    DIRICHLET = "dirichlet"
    # sphere colatitude: Dirichlet-like closure, no stencil crosses the pole
    POLE = "pole"
    # absent axis (the ring's q2)
    NONE = "none"


@dataclass(frozen=True, eq=False)
class LatticeGrid:
    surface: SurfaceSpec
    q1: NDArray[np.float64]
    q2: NDArray[np.float64]
    d1: float
    d2: float
    top1: Topology
    top2: Topology
    h1: NDArray[np.float64]
    h2: NDArray[np.float64]
    weights: NDArray[np.float64]

    @property
    def N1(self) -> int:
        return self.q1.size

    @property
    def N2(self) -> int:
        return self.q2.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N1, self.N2)

    @property
    def n_sites(self) -> int:
        return self.N1 * self.N2

    def mesh(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return np.meshgrid(self.q1, self.q2, indexing="ij")

    def flat_weights(self, spin: int = 1) -> NDArray[np.float64]:
        return np.tile(self.weights.ravel(), spin)

    def describe(self) -> dict:
        return {
            "N1": self.N1,
            "N2": self.N2,
            "top1": self.top1.value,
            "top2": self.top2.value,
            "d1": self.d1,
            "d2": self.d2,
        }


def build_grid(
    s: SurfaceSpec,
    N1: int,
    N2: int = 1,
    bc: Topology | str | None = None,
    stagger: bool = True,
) -> LatticeGrid:
    """Sample grid for surface ``s``.

    ``bc`` only matters for the cylinder axis (``"dirichlet"`` on ``[0, L]``
    with interior nodes, the default, or ``"periodic"`` with period ``L``).
    The sphere colatitude is always staggered, ``theta_i = (i + 1/2) pi / N1``;
    ``stagger=False`` would put nodes on the poles and is rejected.
    """
    N1 = int(N1)
    N2 = int(N2)
    if s.kind is SurfaceKind.RING:
        N2 = 1
    if N1 < 4 or (s.kind is not SurfaceKind.RING and N2 < 4):
        raise ConfigurationError(f"need at least 4 points per axis, got {N1}x{N2}", field="grid")
    if bc is not None:
        bc = Topology(bc)

    if s.kind is SurfaceKind.RING:
        d1 = geo.TWO_PI / N1
        q1 = d1 * np.arange(N1)
        q2 = np.zeros(1)
        d2 = 1.0
        top1, top2 = Topology.PERIODIC, Topology.NONE
    elif s.kind is SurfaceKind.CYLINDER:
        d1 = geo.TWO_PI / N1
        q1 = d1 * np.arange(N1)
        if s.L is None:
            raise ConfigurationError("cylinder grid needs the axial length L", field="surface.L")
        top2 = bc or Topology.DIRICHLET
        if top2 is Topology.DIRICHLET:
            d2 = s.L / (N2 + 1)
            q2 = d2 * np.arange(1, N2 + 1)
        elif top2 is Topology.PERIODIC:
            d2 = s.L / N2
            q2 = d2 * np.arange(N2)
        else:
            raise ConfigurationError(f"cylinder axis cannot be {top2.value}", field="grid.bc")
        top1 = Topology.PERIODIC
    elif s.kind is SurfaceKind.SPHERE:
        if bc not in (None, Topology.POLE):
            raise ConfigurationError("sphere colatitude topology is fixed", field="grid.bc")
        d1 = math.pi / N1
        if not stagger:
            raise SingularPointError("unstaggered colatitude grid touches the poles")
        q1 = d1 * (np.arange(N1) + 0.5)
        d2 = geo.TWO_PI / N2
        q2 = d2 * np.arange(N2)
        top1, top2 = Topology.POLE, Topology.PERIODIC
    else:
        if bc not in (None, Topology.PERIODIC):
            raise ConfigurationError("torus axes are periodic", field="grid.bc")
        d1 = geo.TWO_PI / N1
        d2 = geo.TWO_PI / N2
        q1 = d1 * np.arange(N1)
        q2 = d2 * np.arange(N2)
        top1 = top2 = Topology.PERIODIC

    Q1, Q2 = np.meshgrid(q1, q2, indexing="ij")
    h = geo.scale_factors(s, Q1, Q2)
    h2 = np.ones_like(Q1) if s.kind is SurfaceKind.RING else h.h2
    weights = h.h1 * h2 * d1 * d2
    if not np.all(weights > 0):
        raise SingularPointError("non-positive integration weight on the grid")
    return LatticeGrid(s, q1, q2, d1, d2, top1, top2, h.h1, h2, weights)


# ---------------------------------------------------------------------------
# links


@dataclass(frozen=True, eq=False)
class LinkField:
    U1: NDArray[np.complex128]
    U2: NDArray[np.complex128]
    periodic1: bool
    periodic2: bool


def unit_links(g: LatticeGrid) -> LinkField:
    one = np.ones(g.shape, dtype=complex)
    return LinkField(one, one.copy(), g.top1 is Topology.PERIODIC, g.top2 is Topology.PERIODIC)


def link_phases(
    g: LatticeGrid,
    p: fl.PotentialSpec,
    quad_order: int = 4,
    constants: Constants = NATURAL,
) -> LinkField:
    """Peierls links from the tangential potential.

    Each phase ``(e/hbar) int A_k h_k dq_k`` is integrated along the
    coordinate edge with ``quad_order``-point Gauss-Legendre. Edges leaving a
    bounded axis towards a ghost node are set to 1.
    """
    links = unit_links(g)
    if _zero_field(p):
        return links
    x, wq = np.polynomial.legendre.leggauss(int(quad_order))
    x = 0.5 * (x + 1.0)
    wq = 0.5 * wq
    Q1, Q2 = g.mesh()
    U1, U2 = links.U1, links.U2
    n1 = g.N1 if g.top1 is Topology.PERIODIC else g.N1 - 1
    U1[:n1] = np.exp(1j * _edge_phases(g, p, 1, Q1[:n1], Q2[:n1], x, wq, constants))
    if g.top2 is not Topology.NONE:
        n2 = g.N2 if g.top2 is Topology.PERIODIC else g.N2 - 1
        U2[:, :n2] = np.exp(1j * _edge_phases(g, p, 2, Q1[:, :n2], Q2[:, :n2], x, wq, constants))
    return links


def _zero_field(p: fl.PotentialSpec) -> bool:
    return (isinstance(p, fl.UniformB) and p.B0 == 0.0) or (isinstance(p, fl.FluxLine) and p.alpha == 0.0)


def _edge_phases(g, p, axis, Q1, Q2, x, wq, constants):
    step = g.d1 if axis == 1 else g.d2
    if axis == 1:
        a1 = Q1[..., None] + step * x
        a2 = np.broadcast_to(Q2[..., None], a1.shape)
    else:
        a2 = Q2[..., None] + step * x
        a1 = np.broadcast_to(Q1[..., None], a2.shape)
    A1, A2 = fl.project_potential(p, g.surface, a1, a2, constants)
    h = geo.scale_factors(g.surface, a1, a2)
    integrand = A1 * h.h1 if axis == 1 else A2 * h.h2
    return constants.e / constants.hbar * step * (integrand @ wq)


def site_gauge_transform(links: LinkField, chi_sites: NDArray[np.float64]) -> LinkField:
    """``U(i -> j) -> exp(i chi_j) U(i -> j) exp(-i chi_i)``.

    The assembled operator transforms by the unitary ``diag(exp(i chi))``.
    """
    chi = np.asarray(chi_sites, dtype=float).reshape(links.U1.shape)
    ph = np.exp(1j * chi)
    U1 = np.roll(ph, -1, axis=0) * links.U1 * ph.conj()
    U2 = np.roll(ph, -1, axis=1) * links.U2 * ph.conj()
    if not links.periodic1:
        U1[-1] = links.U1[-1]
    if not links.periodic2:
        U2[:, -1] = links.U2[:, -1]
    return LinkField(U1, U2, links.periodic1, links.periodic2)


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True, eq=False)
class SurfaceOperator:
    """Assembled Hermitian matrix in the symmetrized basis."""

    matrix: sp.csr_matrix
    grid: LatticeGrid
    spin: int
    metadata: dict = field(default_factory=dict)
    # matrix == F^H F + diag(d) up to rounding, when known
    factor: "EdgeFactor | None" = None

    def rayleigh(self, vecs: NDArray) -> NDArray[np.float64]:
        """Rayleigh quotients of symmetrized-basis columns.

        With a known factor the kinetic part is summed as ``|F v|^2``, a sum
        of non-negative edge terms free of the cancellation in ``v^H H v``,
        in extended precision where the platform provides it.
        """
        vecs = np.asarray(vecs)
        if vecs.ndim == 1:
            vecs = vecs[:, None]
        if self.factor is None:
            num = np.real(np.sum(vecs.conj() * (self.matrix @ vecs), axis=0))
            return num / np.sum(np.abs(vecs) ** 2, axis=0)
        return self.factor.rayleigh(vecs)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def sqrt_weights(self) -> NDArray[np.float64]:
        return np.sqrt(self.grid.flat_weights(self.spin))

    @property
    def scale(self) -> float:
        """Max absolute row sum, an upper bound on the spectral radius."""
        return float(abs(self.matrix).sum(axis=1).max())

    def hermiticity_residual(self) -> float:
        d = self.matrix - self.matrix.conj().T
        return float(abs(d).max()) if d.nnz else 0.0

    def to_original(self, vecs: NDArray) -> NDArray:
        """Symmetrized-basis vectors (rows = sites) to wavefunction values."""
        sw = self.sqrt_weights
        return vecs / (sw[:, None] if np.ndim(vecs) == 2 else sw)

    def to_symmetric(self, vecs: NDArray) -> NDArray:
        sw = self.sqrt_weights
        return vecs * (sw[:, None] if np.ndim(vecs) == 2 else sw)

    def toarray(self) -> NDArray[np.complex128]:
        return self.matrix.toarray()

    def export_coo(self, path) -> None:
        """Write ``row col re im`` lines (0-based) with a header comment."""
        m = self.matrix.tocoo()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# dim {self.dim} nnz {m.nnz}\n# row col re im\n")
            for r, c, v in zip(m.row, m.col, m.data):
                fh.write(f"{r} {c} {repr(float(v.real))} {repr(float(v.imag))}\n")


def _edge_coefficients(g: LatticeGrid, constants: Constants):
    """Kinetic couplings of the axis-1 and axis-2 edges leaving each node.

    Returns ``(c1, c2)`` shaped like the grid; ``c1[i, j]`` belongs to the
    edge towards ``i + 1`` (a ghost for the last row of a bounded axis).
    """
    s = g.surface
    Q1, Q2 = g.mesh()
    kin = constants.kinetic
    m1 = Q1 + 0.5 * g.d1
    h = geo.scale_factors(s, m1, Q2)
    if s.kind is SurfaceKind.RING:
        c1 = kin * (1.0 / h.h1) * g.d2 / g.d1
    else:
        c1 = kin * (h.h2 / h.h1) * g.d2 / g.d1
    if g.top1 is Topology.POLE:
        # flux through the pole caps vanishes (h2 = a sin(theta) = 0)
        c1[-1] = 0.0
    if g.top2 is Topology.NONE:
        c2 = np.zeros_like(c1)
    else:
        h = geo.scale_factors(s, Q1, Q2 + 0.5 * g.d2)
        c2 = kin * (h.h1 / h.h2) * g.d1 / g.d2
    return c1, c2


def _pole_ghost_coefficient(g: LatticeGrid, constants: Constants) -> NDArray[np.float64]:
    """Coupling of row 0 to the ghost before it (zero at a pole)."""
    if g.top1 is not Topology.DIRICHLET:
        return np.zeros(g.N2)
    s = g.surface
    q1m = g.q1[0] - 0.5 * g.d1
    h = geo.scale_factors(s, q1m, g.q2)
    return constants.kinetic * (h.h2 / h.h1) * g.d2 / g.d1


def _kinetic_matrix(g: LatticeGrid, links: LinkField, constants: Constants) -> sp.csr_matrix:
    N1, N2 = g.shape
    n = g.n_sites
    idx = np.arange(n).reshape(N1, N2)
    c1, c2 = _edge_coefficients(g, constants)
    w = g.weights

    rows, cols, vals = [], [], []
    diag = np.zeros(g.shape)

    def add_edges(a, b, c, U, wa, wb):
        coef = c / np.sqrt(wa * wb)
        rows.extend([a.ravel(), b.ravel()])
        cols.extend([b.ravel(), a.ravel()])
        vals.extend([(-coef * U.conj()).ravel(), (-coef * U).ravel()])

    # axis 1
    if g.top1 is Topology.PERIODIC:
        a, b = idx, np.roll(idx, -1, axis=0)
        add_edges(a, b, c1, links.U1, w, np.roll(w, -1, axis=0))
        diag += c1 + np.roll(c1, 1, axis=0)
    else:
        add_edges(idx[:-1], idx[1:], c1[:-1], links.U1[:-1], w[:-1], w[1:])
        diag[:-1] += c1[:-1]
        diag[1:] += c1[:-1]
        # ghost edges beyond each end (vanish at sphere poles)
        diag[-1] += c1[-1]
        diag[0] += _pole_ghost_coefficient(g, constants)
    # axis 2
    if g.top2 is Topology.PERIODIC:
        a, b = idx, np.roll(idx, -1, axis=1)
        add_edges(a, b, c2, links.U2, w, np.roll(w, -1, axis=1))
        diag += c2 + np.roll(c2, 1, axis=1)
    elif g.top2 is Topology.DIRICHLET:
        add_edges(idx[:, :-1], idx[:, 1:], c2[:, :-1], links.U2[:, :-1], w[:, :-1], w[:, 1:])
        diag[:, :-1] += c2[:, :-1]
        diag[:, 1:] += c2[:, :-1]
        diag[:, -1] += c2[:, -1]
        h = geo.scale_factors(g.surface, g.q1[:, None], g.q2[0] - 0.5 * g.d2)
        diag[:, 0] += (constants.kinetic * (h.h1 / h.h2) * g.d1 / g.d2)[:, 0]

    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append((diag / w).ravel().astype(complex))
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return m.tocsr()


@dataclass(frozen=True, eq=False)
class EdgeFactor:
    """``H = F^H F + diag(d)`` with two entries per row of ``F``.

    Row ``e`` of ``F`` is ``ca[e] x_a[e] + cb[e] x_b[e]``; ghost edges have
    ``cb = 0``.
    """

    a: NDArray[np.int64]
    b: NDArray[np.int64]
    ca: NDArray
    cb: NDArray
    d: NDArray[np.float64]

    def tocsr(self) -> sp.csr_matrix:
        m = self.a.size
        n = self.d.size
        r = np.arange(m)
        F = sp.coo_matrix((np.concatenate([self.ca, self.cb]), (np.tile(r, 2), np.concatenate([self.a, self.b]))), shape=(m, n))
        return F.tocsr()

    def rayleigh(self, vecs: NDArray, chunk: int = 64) -> NDArray[np.float64]:
        ext = np.clongdouble
        ca = self.ca.astype(ext)[:, None]
        cb = self.cb.astype(ext)[:, None]
        d = self.d.astype(np.longdouble)[:, None]
        out = np.empty(vecs.shape[1])
        for j in range(0, vecs.shape[1], chunk):
            V = vecs[:, j : j + chunk].astype(ext)
            Fv = ca * V[self.a] + cb * V[self.b]
            p = V.real**2 + V.imag**2
            kin = np.sum(Fv.real**2 + Fv.imag**2, axis=0)
            out[j : j + chunk] = ((kin + np.sum(d * p, axis=0)) / np.sum(p, axis=0)).astype(float)
        return out


def _kinetic_factor(g: LatticeGrid, links: LinkField, constants: Constants, d: NDArray[np.float64]) -> EdgeFactor:
    """Edge-difference matrix ``F`` with ``F^H F`` equal to the kinetic block.

    One row per edge, ``sqrt(c) (e_a/sqrt(w_a) - conj(U) e_b/sqrt(w_b))``;
    ghost edges of bounded axes keep only the ``e_a`` term.
    """
    N1, N2 = g.shape
    idx = np.arange(g.n_sites).reshape(N1, N2)
    c1, c2 = _edge_coefficients(g, constants)
    sw = np.sqrt(g.weights)
    A, B, CA, CB = [], [], [], []

    def edges(a, b, c, U, wa, wb):
        sc = np.sqrt(c).ravel()
        A.append(a.ravel())
        B.append(b.ravel())
        CA.append((sc / wa.ravel()).astype(complex))
        CB.append(-(sc / wb.ravel()) * U.conj().ravel())

    def ghosts(a, c, wa):
        A.append(a.ravel())
        B.append(a.ravel())
        CA.append((np.sqrt(c).ravel() / wa.ravel()).astype(complex))
        CB.append(np.zeros(a.size, dtype=complex))

    if g.top1 is Topology.PERIODIC:
        edges(idx, np.roll(idx, -1, axis=0), c1, links.U1, sw, np.roll(sw, -1, axis=0))
    else:
        edges(idx[:-1], idx[1:], c1[:-1], links.U1[:-1], sw[:-1], sw[1:])
        ghosts(idx[-1], c1[-1], sw[-1])
        ghosts(idx[0], _pole_ghost_coefficient(g, constants), sw[0])
    if g.top2 is Topology.PERIODIC:
        edges(idx, np.roll(idx, -1, axis=1), c2, links.U2, sw, np.roll(sw, -1, axis=1))
    elif g.top2 is Topology.DIRICHLET:
        edges(idx[:, :-1], idx[:, 1:], c2[:, :-1], links.U2[:, :-1], sw[:, :-1], sw[:, 1:])
        ghosts(idx[:, -1], c2[:, -1], sw[:, -1])
        h = geo.scale_factors(g.surface, g.q1[:, None], g.q2[0] - 0.5 * g.d2)
        ghosts(idx[:, 0], (constants.kinetic * (h.h1 / h.h2) * g.d1 / g.d2)[:, 0], sw[:, 0])
    return EdgeFactor(np.concatenate(A), np.concatenate(B), np.concatenate(CA), np.concatenate(CB), np.asarray(d, float))


def _check_dim(dim: int, max_dim: int) -> None:
    if dim > max_dim:
        raise DimensionError(f"operator dimension {dim} exceeds the configured maximum {max_dim}")


def _onsite(g: LatticeGrid, V: fl.ScalarPotential | None, constants: Constants) -> NDArray[np.float64]:
    Q1, Q2 = g.mesh()
    out = geo.geometric_potential(g.surface, Q1, Q2, constants)
    if V is not None:
        out = out + V.evaluate(Q1, Q2)
    return out.ravel()


def assemble_spin0(
    g: LatticeGrid,
    links: LinkField | None = None,
    V: fl.ScalarPotential | None = None,
    constants: Constants = NATURAL,
    max_dim: int = DEFAULT_MAX_DIM,
    metadata: dict | None = None,
) -> SurfaceOperator:
    """Spin-0 surface Hamiltonian: covariant kinetic term + GKE + V."""
    _check_dim(g.n_sites, max_dim)
    links = links if links is not None else unit_links(g)
    if links.U1.shape != g.shape:
        raise DimensionError("link field does not match the grid")
    H = _kinetic_matrix(g, links, constants)
    d = _onsite(g, V, constants)
    H = (H + sp.diags(d.astype(complex))).tocsr()
    meta = {"surface": g.surface.to_dict(), "grid": g.describe(), "order": 2, "particle": "spin0"}
    meta.update(metadata or {})
    return SurfaceOperator(H, g, 1, meta, factor=_kinetic_factor(g, links, constants, d))


def central_difference(g: LatticeGrid, links: LinkField, axis: int) -> sp.csr_matrix:
    """Covariant central difference ``D_k`` in the original basis.

    ``(D_1 psi)_i = (conj(U_i) psi_{i+1} - U_{i-1} psi_{i-1}) / (2 h_1 dq_1)``;
    neighbours outside a bounded axis (or across a pole) are zero.
    """
    N1, N2 = g.shape
    idx = np.arange(g.n_sites).reshape(N1, N2)
    if axis == 1:
        U, step, h, top, ax = links.U1, g.d1, g.h1, g.top1, 0
    else:
        U, step, h, top, ax = links.U2, g.d2, g.h2, g.top2, 1
    inv = 1.0 / (2.0 * h * step)
    fwd = np.roll(idx, -1, axis=ax)
    bwd = np.roll(idx, 1, axis=ax)
    vf = inv * U.conj()
    vb = -inv * np.roll(U, 1, axis=ax)
    keep_f = np.ones(g.shape, bool)
    keep_b = np.ones(g.shape, bool)
    if top is not Topology.PERIODIC:
        sl = [slice(None), slice(None)]
        sl[ax] = -1
        keep_f[tuple(sl)] = False
        sl[ax] = 0
        keep_b[tuple(sl)] = False
    rows = np.concatenate([idx[keep_f], idx[keep_b]])
    cols = np.concatenate([fwd[keep_f], bwd[keep_b]])
    vals = np.concatenate([vf[keep_f], vb[keep_b]])
    return sp.coo_matrix((vals, (rows, cols)), shape=(g.n_sites, g.n_sites)).tocsr()


def _zeeman_blocks(g: LatticeGrid, b: fl.MagneticFieldSpec, constants: Constants) -> sp.csr_matrix | None:
    Q1, Q2 = g.mesh()
    B = b.evaluate(Q1, Q2).reshape(-1, 3)
    if not np.any(B):
        return None
    mu = -constants.magneton
    bx, by, bz = B.T
    return sp.bmat(
        [
            [sp.diags(mu * bz + 0j), sp.diags(mu * (bx - 1j * by))],
            [sp.diags(mu * (bx + 1j * by)), sp.diags(-mu * bz + 0j)],
        ]
    ).tocsr()


def _spin_kron(vec: NDArray[np.float64], D: sp.csr_matrix) -> sp.csr_matrix:
    """``sum_a sigma^a (x) diag(vec[:, a]) D`` in spin-major layout."""
    out = None
    for a in range(3):
        if not np.any(vec[:, a]):
            continue
        term = sp.kron(sp.csr_matrix(fl.SIGMA[a]), sp.diags(vec[:, a]) @ D)
        out = term if out is None else out + term
    return out


def _su2_link_kinetic(g, links, w1, w2, soc, constants):
    """Kinetic term with 2x2 links ``exp(i theta) exp(i (g/hbar) h dq W_k)``."""
    N1, N2 = g.shape
    n = g.n_sites
    idx = np.arange(n).reshape(N1, N2)
    c1, c2 = _edge_coefficients(g, constants)
    w = g.weights
    s = g.surface
    Q1, Q2 = g.mesh()
    pref = soc.g / constants.hbar
    rows, cols, vals = [], [], []
    diag = np.zeros(g.shape)

    def su2(vec, beta):
        # exp(i beta vec . sigma) as components (c0, c) with c0*1 + i c . sigma
        nrm = np.linalg.norm(vec, axis=-1)
        ang = beta * nrm
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(nrm[..., None] > 0, vec / nrm[..., None], 0.0)
        return np.cos(ang), np.sin(ang)[..., None] * unit

    def add(a, b, c, U, wa, wb, vec, beta):
        # block L[a, b] = -c conj(U) V^dagger, L[b, a] = -c U V
        c0, cv = su2(vec, beta)
        coef = (c / np.sqrt(wa * wb)).ravel()
        Uf = U.ravel()
        a = a.ravel()
        b = b.ravel()
        c0 = c0.ravel()
        cv = cv.reshape(-1, 3)
        # V = c0 + i cv.sigma ; V^dagger = c0 - i cv.sigma
        Vd = c0[:, None, None] * np.eye(2) - 1j * np.einsum("ka,abc->kbc", cv, fl.SIGMA)
        V = c0[:, None, None] * np.eye(2) + 1j * np.einsum("ka,abc->kbc", cv, fl.SIGMA)
        for sa in range(2):
            for sb in range(2):
                rows.append(sa * n + a)
                cols.append(sb * n + b)
                vals.append(-coef * Uf.conj() * Vd[:, sa, sb])
                rows.append(sa * n + b)
                cols.append(sb * n + a)
                vals.append(-coef * Uf * V[:, sa, sb])

    if g.top1 is Topology.PERIODIC:
        m1 = Q1 + 0.5 * g.d1
        vec = fl.soc_components(soc, s, m1, Q2)[0]
        beta = pref * geo.scale_factors(s, m1, Q2).h1 * g.d1
        add(idx, np.roll(idx, -1, 0), c1, links.U1, w, np.roll(w, -1, 0), vec, beta)
        diag += c1 + np.roll(c1, 1, axis=0)
    else:
        m1 = Q1[:-1] + 0.5 * g.d1
        vec = fl.soc_components(soc, s, m1, Q2[:-1])[0]
        beta = pref * geo.scale_factors(s, m1, Q2[:-1]).h1 * g.d1
        add(idx[:-1], idx[1:], c1[:-1], links.U1[:-1], w[:-1], w[1:], vec, beta)
        diag[:-1] += c1[:-1]
        diag[1:] += c1[:-1]
        diag[-1] += c1[-1]
        diag[0] += _pole_ghost_coefficient(g, constants)
    if g.top2 is Topology.PERIODIC:
        m2 = Q2 + 0.5 * g.d2
        vec = fl.soc_components(soc, s, Q1, m2)[1]
        beta = pref * geo.scale_factors(s, Q1, m2).h2 * g.d2
        add(idx, np.roll(idx, -1, 1), c2, links.U2, w, np.roll(w, -1, 1), vec, beta)
        diag += c2 + np.roll(c2, 1, axis=1)
    elif g.top2 is Topology.DIRICHLET:
        m2 = Q2[:, :-1] + 0.5 * g.d2
        vec = fl.soc_components(soc, s, Q1[:, :-1], m2)[1]
        beta = pref * geo.scale_factors(s, Q1[:, :-1], m2).h2 * g.d2
        add(idx[:, :-1], idx[:, 1:], c2[:, :-1], links.U2[:, :-1], w[:, :-1], w[:, 1:], vec, beta)
        diag[:, :-1] += c2[:, :-1]
        diag[:, 1:] += c2[:, :-1]
        diag[:, -1] += c2[:, -1]
        h = geo.scale_factors(s, g.q1[:, None], g.q2[0] - 0.5 * g.d2)
        diag[:, 0] += (constants.kinetic * (h.h1 / h.h2) * g.d1 / g.d2)[:, 0]
    d = np.tile((diag / w).ravel(), 2).astype(complex)
    rows.append(np.arange(2 * n))
    cols.append(np.arange(2 * n))
    vals.append(d)
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * n, 2 * n))
    return m.tocsr()


def assemble_pauli(
    g: LatticeGrid,
    links: LinkField | None = None,
    soc: fl.SOCVector | None = None,
    b: fl.MagneticFieldSpec | None = None,
    V: fl.ScalarPotential | None = None,
    constants: Constants = NATURAL,
    scheme: Literal["central", "links"] = "central",
    max_dim: int = DEFAULT_MAX_DIM,
    metadata: dict | None = None,
) -> SurfaceOperator:
    """Spin-1/2 surface Hamiltonian with Zeeman and constant spin-orbit terms.

    ``scheme="central"`` expands the generalized covariant Laplacian: scalar
    kinetic term (x) 1 plus the first-order term ``(i hbar g/m) W_k D_k`` with
    covariant central differences, made Hermitian as ``(X + X^dagger)/2``.
    The second-order pieces ``+-(g^2/2m) W'.W'`` cancel and are not built.

    ``scheme="links"`` instead puts ``W_k`` into SU(2) link matrices and adds
    ``-(g^2/2m) W'.W'`` explicitly. Both agree to second order in the grid
    spacing; the second is used as an independent cross-check.
    """
    n = g.n_sites
    _check_dim(2 * n, max_dim)
    links = links if links is not None else unit_links(g)
    has_soc = soc is not None and not soc.is_zero
    Q1, Q2 = g.mesh()

    if scheme == "links" and has_soc:
        w1, w2 = fl.soc_components(soc, g.surface, Q1, Q2)
        H = _su2_link_kinetic(g, links, w1, w2, soc, constants)
        wsq = (np.sum(w1**2, axis=-1) + (0 if g.top2 is Topology.NONE else np.sum(w2**2, axis=-1))).ravel()
        onsite = _onsite(g, V, constants) - soc.g**2 / (2.0 * constants.m) * wsq
        H = H + sp.diags(np.tile(onsite, 2).astype(complex))
    elif scheme in ("central", "links"):
        H0 = assemble_spin0(g, links, V, constants, max_dim=max_dim).matrix
        H = sp.block_diag((H0, H0), format="csr")
        if has_soc:
            w1, w2 = fl.soc_components(soc, g.surface, Q1, Q2)
            pref = 1j * constants.hbar * soc.g / constants.m
            X = _spin_kron(w1.reshape(-1, 3), central_difference(g, links, 1))
            if g.top2 is not Topology.NONE:
                X2 = _spin_kron(w2.reshape(-1, 3), central_difference(g, links, 2))
                X = X2 if X is None else (X + X2 if X2 is not None else X)
            if X is not None:
                sw = np.tile(np.sqrt(g.weights.ravel()), 2)
                Xs = pref * (sp.diags(sw) @ X @ sp.diags(1.0 / sw))
                H = H + 0.5 * (Xs + Xs.conj().T)
    else:
        raise ConfigurationError(f"unknown SOC scheme {scheme!r}", field="solver.soc_scheme")

    if b is not None:
        Z = _zeeman_blocks(g, b, constants)
        if Z is not None:
            H = H + Z
    meta = {
        "surface": g.surface.to_dict(),
        "grid": g.describe(),
        "order": 2,
        "particle": "pauli",
        "soc_scheme": scheme,
    }
    meta.update(metadata or {})
    return SurfaceOperator(sp.csr_matrix(H), g, 2, meta)


def inner_product(g: LatticeGrid, psi: NDArray, phi: NDArray) -> complex:
    """Weighted inner product ``sum w conj(psi) phi`` of original-basis states."""
    psi = np.asarray(psi).ravel()
    phi = np.asarray(phi).ravel()
    if psi.shape != phi.shape or psi.size % g.n_sites:
        raise DimensionError(f"states of size {psi.size} and {phi.size} do not fit a {g.shape} grid")
    w = g.flat_weights(psi.size // g.n_sites)
    return complex(np.sum(w * psi.conj() * phi))
