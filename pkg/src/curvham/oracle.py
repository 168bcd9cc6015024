"""Independent references used by the tests and the verification suites.

Nothing here calls the closed-form curvature code of :mod:`curvham.geometry`;
curvatures and frame derivatives are rebuilt from analytic derivatives of
the Cartesian embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
from numpy.typing import ArrayLike, NDArray
from scipy.special import sph_harm_y

from .errors import ConfigurationError, ConvergenceError, SingularPointError
from .geometry import POLE_EPS, SurfaceKind, SurfaceSpec
from .units import NATURAL, Constants


class Level(NamedTuple):
    energy: float
    degeneracy: int
    labels: tuple


@dataclass(frozen=True)
class AnalyticSpectrum:
    levels: tuple[Level, ...]

    def __post_init__(self):
        lv = tuple(sorted(self.levels, key=lambda x: x.energy))
        object.__setattr__(self, "levels", lv)

    def values(self, count: int | None = None) -> NDArray[np.float64]:
        """Energies with multiplicity, ascending."""
        out = np.repeat([lv.energy for lv in self.levels], [lv.degeneracy for lv in self.levels])
        return out if count is None else out[:count]

    def energies(self) -> NDArray[np.float64]:
        return np.array([lv.energy for lv in self.levels])

    def degeneracies(self) -> list[int]:
        return [lv.degeneracy for lv in self.levels]


def _merge(entries: list[tuple[float, tuple]], atol: float = 1e-12) -> AnalyticSpectrum:
    """Group ``(energy, label)`` pairs with equal energy into levels."""
    entries = sorted(entries, key=lambda e: e[0])
    levels: list[Level] = []
    for E, lab in entries:
        if levels and abs(levels[-1].energy - E) <= atol * max(1.0, abs(E)):
            last = levels[-1]
            levels[-1] = Level(last.energy, last.degeneracy + 1, last.labels + (lab,))
        else:
            levels.append(Level(E, 1, (lab,)))
    return AnalyticSpectrum(tuple(levels))


def ring_spectrum(a: float, alpha: float, n_max: int, constants: Constants = NATURAL) -> AnalyticSpectrum:
    """``E_n = (hbar^2/2ma^2)(n - alpha)^2 - hbar^2/8ma^2`` for ``|n| <= n_max``."""
    if n_max < 0:
        raise ConfigurationError("n_max must be >= 0", field="n_max")
    kin = constants.kinetic / a**2
    return _merge([(kin * (n - alpha) ** 2 - 0.25 * kin, (n,)) for n in range(-n_max, n_max + 1)])


def ring_lattice_spectrum(a: float, alpha: float, N: int, constants: Constants = NATURAL) -> NDArray[np.float64]:
    """All eigenvalues of the N-site Peierls ring, ascending.

    The lattice Laplacian with uniform links has plane-wave eigenvectors, so
    ``E_n = (hbar^2/ma^2)(1 - cos((n - alpha) d))/d^2 - hbar^2/8ma^2``.
    """
    d = 2.0 * math.pi / N
    kin = constants.kinetic / a**2
    n = np.arange(N)
    E = 2.0 * kin * (1.0 - np.cos((n - alpha) * d)) / d**2 - 0.25 * kin
    return np.sort(E)


def naive_ring_hamiltonian(a: float, alpha: float, N: int, constants: Constants = NATURAL) -> NDArray:
    """Dense ring Hamiltonian with plain minimal coupling (no link phases).

    ``(1/2m)(-i hbar/a d_theta - e A)^2 - hbar^2/8ma^2`` with central
    differences for the first derivative.
    """
    d = 2.0 * math.pi / N
    hb, m = constants.hbar, constants.m
    A = alpha * hb / (constants.e * a)
    eye = np.eye(N)
    fwd = np.roll(eye, 1, axis=1)
    bwd = fwd.T
    lap = (fwd + bwd - 2.0 * eye) / d**2
    d1 = (fwd - bwd) / (2.0 * d)
    H = (
        -(hb**2) / (2.0 * m * a**2) * lap
        + 1j * hb * constants.e * A / (m * a) * d1
        + (constants.e * A) ** 2 / (2.0 * m) * eye
        - hb**2 / (8.0 * m * a**2) * eye
    )
    return H


def naive_ring_spectrum(a: float, alpha: float, N: int, constants: Constants = NATURAL) -> NDArray[np.float64]:
    return la.eigvalsh(naive_ring_hamiltonian(a, alpha, N, constants))


def cylinder_spectrum(
    a: float, L: float, alpha: float, n_max: int, j_max: int, constants: Constants = NATURAL
) -> AnalyticSpectrum:
    """Cylinder with Dirichlet ends at ``z = 0, L`` and axial modes ``j >= 1``."""
    kin = constants.kinetic
    entries = []
    for n in range(-n_max, n_max + 1):
        for j in range(1, j_max + 1):
            E = kin * (n - alpha) ** 2 / a**2 + kin * (j * math.pi / L) ** 2 - 0.25 * kin / a**2
            entries.append((E, (n, j)))
    return _merge(entries)


def sphere_spectrum(a: float, l_max: int, constants: Constants = NATURAL) -> AnalyticSpectrum:
    """Free sphere: ``E_l = hbar^2 l(l+1)/2ma^2`` with degeneracy ``2l+1``."""
    kin = constants.kinetic / a**2
    return AnalyticSpectrum(
        tuple(Level(kin * l * (l + 1), 2 * l + 1, tuple((l, mz) for mz in range(-l, l + 1))) for l in range(l_max + 1))
    )


def sphere_uniform_b_first_order(
    a: float,
    B0: float,
    l: int,
    m_z: int,
    constants: Constants = NATURAL,
    n_theta: int = 64,
    rtol: float = 1e-13,
) -> float:
    """First-order energy shift ``<Y_lm|H1|Y_lm>`` for a uniform field along z.

    ``H1 = (i hbar e/m)(A_phi/(a sin(theta))) d_phi + (i hbar e/2m) div A``
    with ``A_phi = B0 a sin(theta)/2`` (so ``div A = 0``). The integral uses
    Gauss-Legendre in ``cos(theta)`` and the trapezoid rule in ``phi``;
    the node count is doubled until two estimates agree to ``rtol``.
    """
    if abs(m_z) > l:
        raise ConfigurationError(f"|m| must not exceed l, got l={l}, m={m_z}", field="m_z")
    pref = constants.hbar * constants.e / constants.m

    def integrate(nt: int) -> complex:
        x, w = np.polynomial.legendre.leggauss(nt)
        theta = np.arccos(x)
        nphi = 2 * nt
        phi = 2.0 * math.pi * np.arange(nphi) / nphi
        T, P = np.meshgrid(theta, phi, indexing="ij")
        Y = sph_harm_y(l, m_z, T, P)
        dY = 1j * m_z * Y  # exact phi-derivative of e^{i m phi}
        A_phi = 0.5 * B0 * a * np.sin(T)
        integrand = np.conj(Y) * (1j * pref) * (A_phi / (a * np.sin(T))) * dY
        # states on radius a: psi = Y/a, measure a^2 dOmega
        return complex(np.sum(w[:, None] * integrand) * (2.0 * math.pi / nphi))

    prev = integrate(n_theta)
    for _ in range(6):
        n_theta *= 2
        cur = integrate(n_theta)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300) or abs(cur) == abs(prev) == 0.0:
            if abs(cur.imag) > 1e-12 * max(abs(cur), 1e-300) + 1e-300:
                raise ConvergenceError("first-order shift has an imaginary part")
            return float(cur.real)
        prev = cur
    raise ConvergenceError(f"quadrature did not converge (last change {abs(cur - prev):.3e})")


# ---------------------------------------------------------------------------
# embedding differential geometry


class EmbeddingDerivatives(NamedTuple):
    r: NDArray[np.float64]
    r1: NDArray[np.float64]
    r2: NDArray[np.float64]
    r11: NDArray[np.float64]
    r12: NDArray[np.float64]
    r22: NDArray[np.float64]


def embedding_derivatives(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike) -> EmbeddingDerivatives:
    """Position and its analytic first and second coordinate derivatives."""
    q1, q2 = (np.asarray(q, float) for q in np.broadcast_arrays(q1, q2))
    z = np.zeros_like(q1)
    c1, s1 = np.cos(q1), np.sin(q1)
    c2, s2 = np.cos(q2), np.sin(q2)
    st = lambda *c: np.stack(c, axis=-1)  # noqa: E731
    if s.kind in (SurfaceKind.RING, SurfaceKind.CYLINDER):
        a = s.a
        return EmbeddingDerivatives(
            st(a * c1, a * s1, q2),
            st(-a * s1, a * c1, z),
            st(z, z, z + 1.0),
            st(-a * c1, -a * s1, z),
            st(z, z, z),
            st(z, z, z),
        )
    if s.kind is SurfaceKind.SPHERE:
        a = s.a
        return EmbeddingDerivatives(
            st(a * s1 * c2, a * s1 * s2, a * c1),
            st(a * c1 * c2, a * c1 * s2, -a * s1),
            st(-a * s1 * s2, a * s1 * c2, z),
            st(-a * s1 * c2, -a * s1 * s2, -a * c1),
            st(-a * c1 * s2, a * c1 * c2, z),
            st(-a * s1 * c2, -a * s1 * s2, z),
        )
    R, r = s.R, s.r
    big = R + r * c1
    return EmbeddingDerivatives(
        st(big * c2, big * s2, r * s1),
        st(-r * s1 * c2, -r * s1 * s2, r * c1),
        st(-big * s2, big * c2, z),
        st(-r * c1 * c2, -r * c1 * s2, -r * s1),
        st(r * s1 * s2, -r * s1 * c2, z),
        st(-big * c2, -big * s2, z),
    )


def _dot(u, v):
    return np.einsum("...i,...i->...", u, v)


def outward_normal(s: SurfaceSpec, d: EmbeddingDerivatives) -> NDArray[np.float64]:
    """Unit normal pointing away from the axis (ring/cylinder/sphere centre, torus tube)."""
    N = np.cross(d.r1, d.r2)
    nrm = np.linalg.norm(N, axis=-1)
    if np.any(nrm < POLE_EPS):
        raise SingularPointError("degenerate embedding (coordinate singularity)")
    N = N / nrm[..., None]
    if s.kind is SurfaceKind.TORUS:
        rho = np.hypot(d.r[..., 0], d.r[..., 1])
        centre = np.stack([s.R * d.r[..., 0] / rho, s.R * d.r[..., 1] / rho, 0.0 * rho], axis=-1)
        ref = d.r - centre
    elif s.kind is SurfaceKind.SPHERE:
        ref = d.r
    else:
        ref = d.r * np.array([1.0, 1.0, 0.0])
    return N * np.sign(_dot(N, ref))[..., None]


def embedding_curvatures(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike) -> tuple[NDArray, NDArray]:
    """``(M, K)`` from the first and second fundamental forms.

    ``M = (E n - 2 F m + G l) / (2 (E G - F^2))`` with the outward normal,
    which makes ``M`` negative on a sphere; ``K = (l n - m^2)/(E G - F^2)``.
    """
    d = embedding_derivatives(s, q1, q2)
    nvec = outward_normal(s, d)
    E, F, G = _dot(d.r1, d.r1), _dot(d.r1, d.r2), _dot(d.r2, d.r2)
    L, Mf, N = _dot(d.r11, nvec), _dot(d.r12, nvec), _dot(d.r22, nvec)
    det = E * G - F**2
    M = (E * N - 2.0 * F * Mf + G * L) / (2.0 * det)
    K = (L * N - Mf**2) / det
    return M, K


def embedding_gke(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike, constants: Constants = NATURAL) -> NDArray:
    M, K = embedding_curvatures(s, q1, q2)
    return -constants.kinetic * (M**2 - K)


@dataclass(frozen=True)
class IdentityReport:
    max_residual: float
    skipped: int
    evaluated: int
    max_magnitude: float


def soc_divergence_identity_residual(
    s: SurfaceSpec,
    W: ArrayLike,
    q1: ArrayLike,
    q2: ArrayLike,
    literal_sign: bool = False,
) -> IdentityReport:
    """Residual of ``W3 M = (1/2 h1 h2)(d1(h2 W1) + d2(h1 W2))`` per Pauli component.

    ``W`` is the constant Cartesian ``W[i, a]``; ``W_k = e_k . W`` and ``W3``
    uses the outward normal. Everything (scale factors, frame and its
    derivatives, ``M``) is computed from the analytic embedding derivatives.
    ``literal_sign=True`` evaluates the right-hand side with the opposite
    overall sign instead. Nodes at coordinate singularities are skipped and
    counted. The common factor ``i hbar g/m`` is dropped from both sides.
    """
    W = np.asarray(W, float)
    if W.shape != (3, 3):
        raise ConfigurationError("W must be 3x3", field="W")
    q1, q2 = (np.asarray(q, float).ravel() for q in np.broadcast_arrays(q1, q2))
    d = embedding_derivatives(s, q1, q2)
    h1 = np.linalg.norm(d.r1, axis=-1)
    h2 = np.linalg.norm(d.r2, axis=-1)
    ok = (h1 > POLE_EPS) & (h2 > POLE_EPS)
    skipped = int((~ok).sum())
    if not np.any(ok):
        return IdentityReport(0.0, skipped, 0, 0.0)
    d = EmbeddingDerivatives(*(x[ok] for x in d))
    h1, h2, q1 = h1[ok], h2[ok], q1[ok]
    nvec = outward_normal(s, d)
    # d1 h1 = r1.r11/h1, d1 h2 = r2.r12/h2, d2 h1 = r1.r12/h1, d2 h2 = r2.r22/h2
    d1h1 = _dot(d.r1, d.r11) / h1
    d1h2 = _dot(d.r2, d.r12) / h2
    d2h1 = _dot(d.r1, d.r12) / h1
    d2h2 = _dot(d.r2, d.r22) / h2
    # h2 e1 = (h2/h1) r1 and h1 e2 = (h1/h2) r2
    d1_h2e1 = ((d1h2 * h1 - h2 * d1h1) / h1**2)[:, None] * d.r1 + (h2 / h1)[:, None] * d.r11
    d2_h1e2 = ((d2h1 * h2 - h1 * d2h2) / h2**2)[:, None] * d.r2 + (h1 / h2)[:, None] * d.r22
    E, F, G = _dot(d.r1, d.r1), _dot(d.r1, d.r2), _dot(d.r2, d.r2)
    det = E * G - F**2
    M = (E * _dot(d.r22, nvec) - 2.0 * F * _dot(d.r12, nvec) + G * _dot(d.r11, nvec)) / (2.0 * det)
    lhs = (nvec @ W) * M[:, None]
    div = (d1_h2e1 + d2_h1e2) @ W
    rhs = 0.5 * div / (h1 * h2)[:, None]
    if literal_sign:
        rhs = -rhs
    resid = np.abs(lhs - rhs)
    return IdentityReport(float(resid.max()), skipped, int(ok.sum()), float(np.abs(lhs).max()))
