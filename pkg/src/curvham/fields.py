"""Electromagnetic and spin-orbit inputs on a surface.

Vector potentials are described only by their tangential physical components
``(A1, A2)`` (projections on the frame vectors ``e1``, ``e2``). The normal
component never enters the surface Hamiltonian, so no type here carries it.

Spin-orbit coupling uses the SU(2) gauge-field notation: a constant
Cartesian coefficient array ``W[i, a]`` (space index i, Pauli index a) with
``W_i = W[i, a] sigma^a``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import geometry as geo
from .errors import (
    ConfigurationError,
    InvalidGaugeFunctionError,
    MissingFieldError,
    UnsupportedConfigurationError,
)
from .geometry import SurfaceKind, SurfaceSpec
from .units import NATURAL, Constants

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0

Sampler = Callable[[NDArray[np.float64], NDArray[np.float64]], tuple]
VectorSampler = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]


def _vec3(v: ArrayLike, name: str) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"expected a finite 3-vector, got {v!r}", field=name)
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class UniformB:
    """Uniform field ``B0 * axis`` in the symmetric gauge ``A = B x r / 2``."""

    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    B0: float = 0.0

    def __post_init__(self):
        axis = _vec3(self.axis, "field.axis")
        if abs(np.linalg.norm(axis) - 1.0) > 1e-14:
            raise ConfigurationError(f"axis must be a unit vector, got {axis}", field="field.axis")
        object.__setattr__(self, "axis", axis)

    @classmethod
    def along(cls, direction: ArrayLike, B0: float) -> "UniformB":
        d = np.asarray(direction, dtype=float)
        return cls(tuple(d / np.linalg.norm(d)), B0)

    @property
    def b_cart(self) -> NDArray[np.float64]:
        return self.B0 * np.asarray(self.axis)


@dataclass(frozen=True)
class FluxLine:
    """Aharonov-Bohm flux ``alpha`` (in flux quanta) along a ring/cylinder axis."""

    alpha: float = 0.0


@dataclass(frozen=True)
class CustomTangential:
    """User potential given by its physical tangential components.

    ``sampler(q1, q2)`` must be vectorized, side-effect free and return
    ``(A1, A2)``. ``b_cart`` (constant 3-vector or ``(q1, q2) -> (..., 3)``)
    is only needed when the Zeeman term is requested.
    """

    sampler: Sampler
    b_cart: VectorSampler | ArrayLike | None = None
    label: str = "custom"


PotentialSpec = Union[UniformB, FluxLine, CustomTangential]


def zero_potential() -> UniformB:
    return UniformB((0.0, 0.0, 1.0), 0.0)


@dataclass(frozen=True)
class MagneticFieldSpec:
    """Cartesian magnetic field on the surface, constant or point dependent."""

    b: VectorSampler | tuple[float, float, float]

    @classmethod
    def constant(cls, b: ArrayLike) -> "MagneticFieldSpec":
        return cls(_vec3(b, "field.b_cart"))

    @property
    def is_constant(self) -> bool:
        return not callable(self.b)

    def evaluate(self, q1: ArrayLike, q2: ArrayLike) -> NDArray[np.float64]:
        q1, q2 = np.broadcast_arrays(np.asarray(q1, float), np.asarray(q2, float))
        if callable(self.b):
            out = np.asarray(self.b(q1, q2), dtype=float)
        else:
            out = np.broadcast_to(np.asarray(self.b), q1.shape + (3,))
        if not np.all(np.isfinite(out)):
            raise ConfigurationError("magnetic field is not finite", field="field.b_cart")
        return out


@dataclass(frozen=True)
class ScalarPotential:
    """Scalar potential energy, a constant or a vectorized ``V(q1, q2)``."""

    V: Callable | float = 0.0

    def evaluate(self, q1: ArrayLike, q2: ArrayLike) -> NDArray[np.float64]:
        q1, q2 = np.broadcast_arrays(np.asarray(q1, float), np.asarray(q2, float))
        out = np.asarray(self.V(q1, q2) if callable(self.V) else np.full(q1.shape, float(self.V)), float)
        out = np.broadcast_to(out, q1.shape)
        if not np.all(np.isfinite(out)):
            raise ConfigurationError("scalar potential is not finite on the grid", field="field.V")
        return out


@dataclass(frozen=True, eq=False)
class SOCVector:
    """Constant SU(2) gauge field coefficients ``W[i, a]`` and coupling ``g``."""

    W: NDArray[np.float64]
    g: float = 1.0

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.shape != (3, 3) or not np.all(np.isfinite(W)):
            raise ConfigurationError("W must be a finite 3x3 array", field="field.soc")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.W)


# ---------------------------------------------------------------------------
# potentials


def project_potential(
    p: PotentialSpec, s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike, constants: Constants = NATURAL
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Physical tangential components ``(A1, A2)`` of ``p`` at surface points."""
    q1, q2 = np.broadcast_arrays(np.asarray(q1, float), np.asarray(q2, float))
    if isinstance(p, UniformB):
        fr = geo.frame(s, q1, q2)
        A = 0.5 * np.cross(p.b_cart, geo.surface_point(s, q1, q2))
        # the normal projection A . n is dropped here on purpose
        return np.einsum("...i,...i->...", A, fr.e1), np.einsum("...i,...i->...", A, fr.e2)
    if isinstance(p, FluxLine):
        if s.kind not in (SurfaceKind.RING, SurfaceKind.CYLINDER):
            raise UnsupportedConfigurationError(
                f"a flux line pierces the {s.kind.value}; only ring/cylinder are supported",
                field="field.kind",
            )
        A1 = np.full(q1.shape, p.alpha * constants.hbar / (constants.e * s.a))
        return A1, np.zeros(q1.shape)
    if isinstance(p, CustomTangential):
        A1, A2 = p.sampler(q1, q2)
        A1 = np.broadcast_to(np.asarray(A1, float), q1.shape)
        A2 = np.broadcast_to(np.asarray(A2, float), q1.shape)
        if not (np.all(np.isfinite(A1)) and np.all(np.isfinite(A2))):
            raise ConfigurationError("custom potential is not finite", field="field.sampler")
        return A1, A2
    raise ConfigurationError(f"unknown potential type {type(p).__name__}", field="field.kind")


def magnetic_field(p: PotentialSpec) -> MagneticFieldSpec:
    """Cartesian B belonging to ``p``.

    A flux line has no field on the surface. Custom potentials must carry
    ``b_cart``: the tangential data only fix ``B . n``.
    """
    if isinstance(p, UniformB):
        return MagneticFieldSpec.constant(p.b_cart)
    if isinstance(p, FluxLine):
        return MagneticFieldSpec.constant((0.0, 0.0, 0.0))
    if p.b_cart is None:
        raise MissingFieldError(
            "Zeeman term with a custom tangential potential needs b_cart "
            "(tangential A does not determine the tangential field)"
        )
    if callable(p.b_cart):
        return MagneticFieldSpec(p.b_cart)
    return MagneticFieldSpec.constant(p.b_cart)


def _fd4(f: Callable, x: NDArray[np.float64], step: float) -> NDArray[np.float64]:
    return (-f(x + 2 * step) + 8 * f(x + step) - 8 * f(x - step) + f(x - 2 * step)) / (12.0 * step)


def _check_single_valued(chi: Callable, s: SurfaceSpec) -> None:
    rng = np.random.default_rng(1234)
    q1 = rng.uniform(0.1, 3.0, 16)
    q2 = rng.uniform(0.1, 3.0, 16)
    base = np.asarray(chi(q1, q2), float)
    tol = 1e-10 * max(1.0, float(np.max(np.abs(base))))
    for period, shifted in (
        (s.q1_period, lambda: chi(q1 + s.q1_period, q2)),
        (s.q2_period, lambda: chi(q1, q2 + s.q2_period)),
    ):
        if period is not None and np.max(np.abs(np.asarray(shifted(), float) - base)) > tol:
            raise InvalidGaugeFunctionError("gauge function is not periodic in an angular coordinate")


def gauge_shift(
    p: PotentialSpec,
    chi: Callable,
    s: SurfaceSpec,
    grad: Callable | None = None,
    constants: Constants = NATURAL,
    step: float = 1e-3,
) -> CustomTangential:
    """Gauge-transformed potential ``A -> A + grad' chi``.

    ``grad(q1, q2)`` may supply ``(d1 chi, d2 chi)`` analytically; otherwise
    fourth-order central differences with spacing ``step`` are used.
    """
    _check_single_valued(chi, s)

    def dchi(q1, q2):
        if grad is not None:
            g1, g2 = grad(q1, q2)
            return np.asarray(g1, float), np.asarray(g2, float)
        return _fd4(lambda x: chi(x, q2), q1, step), _fd4(lambda x: chi(q1, x), q2, step)

    def sampler(q1, q2):
        A1, A2 = project_potential(p, s, q1, q2, constants)
        h = geo.scale_factors(s, q1, q2)
        g1, g2 = dchi(q1, q2)
        if s.kind is SurfaceKind.RING:
            g2 = np.zeros_like(g1)
        return A1 + g1 / h.h1, A2 + g2 / h.h2

    try:
        b = magnetic_field(p)
        b_cart = b.b
    except MissingFieldError:
        b_cart = None
    label = getattr(p, "label", type(p).__name__) + "+gauge"
    return CustomTangential(sampler, b_cart=b_cart, label=label)


# ---------------------------------------------------------------------------
# spin-orbit and Zeeman


def soc_from_efield(E_cart: ArrayLike, constants: Constants = NATURAL) -> SOCVector:
    """``W[i, a] = -(e hbar / 2 m g) eps[i, a, j] E[j]``.

    With ``constants.c`` set, the extra ``1/(2 m c^2)`` of the spin-orbit
    term is applied; otherwise it is assumed absorbed into ``E``.
    """
    E = np.asarray(_vec3(E_cart, "field.E"))
    pref = -constants.e * constants.hbar / (2.0 * constants.m * constants.g)
    if constants.c is not None:
        pref /= 2.0 * constants.m * constants.c**2
    return SOCVector(pref * np.einsum("iaj,j->ia", LEVI_CIVITA, E), constants.g)


def efield_from_soc(w: SOCVector, constants: Constants = NATURAL) -> NDArray[np.float64]:
    """Inverse of :func:`soc_from_efield` (uses eps_iaj eps_iak = 2 delta_jk)."""
    pref = -constants.e * constants.hbar / (2.0 * constants.m * w.g)
    if constants.c is not None:
        pref /= 2.0 * constants.m * constants.c**2
    return 0.5 * np.einsum("iaj,ia->j", LEVI_CIVITA, w.W) / pref


def soc_components(w: SOCVector, s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike):
    """Pauli-vector coefficients ``(w1, w2)``, each ``(..., 3)``: ``W_k = w_k . sigma``."""
    fr = geo.frame(s, q1, q2)
    return fr.e1 @ w.W, fr.e2 @ w.W


def pauli_matrix(vec: NDArray[np.float64]) -> NDArray[np.complex128]:
    """``vec . sigma`` for a ``(..., 3)`` array, returning ``(..., 2, 2)``."""
    return np.einsum("...a,abc->...bc", np.asarray(vec, float), SIGMA)


def project_soc(w: SOCVector, s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike):
    """Tangential SU(2) components ``(W1, W2)`` as ``(..., 2, 2)`` Hermitian matrices."""
    w1, w2 = soc_components(w, s, q1, q2)
    return pauli_matrix(w1), pauli_matrix(w2)


def zeeman_matrix(
    b: MagneticFieldSpec, q1: ArrayLike, q2: ArrayLike, constants: Constants = NATURAL
) -> NDArray[np.complex128]:
    """``-(e hbar / 2m) sigma . B`` at the given points."""
    return -constants.magneton * pauli_matrix(b.evaluate(q1, q2))


@dataclass(frozen=True)
class FieldConfig:
    """Everything field-like that enters an assembled operator."""

    potential: PotentialSpec = field(default_factory=zero_potential)
    V: ScalarPotential | None = None
    soc: SOCVector | None = None
    b: MagneticFieldSpec | None = None

    def magnetic(self) -> MagneticFieldSpec:
        return self.b if self.b is not None else magnetic_field(self.potential)

    def digest(self) -> str:
        p = self.potential
        parts = [type(p).__name__]
        if isinstance(p, UniformB):
            parts.append(repr((p.axis, p.B0)))
        elif isinstance(p, FluxLine):
            parts.append(repr(p.alpha))
        else:
            parts.append(p.label)
        if self.soc is not None:
            parts.append(repr((self.soc.W.tolist(), self.soc.g)))
        if self.V is not None:
            parts.append(repr(self.V.V) if not callable(self.V.V) else "V(callable)")
        return hashlib.sha1("|".join(parts).encode()).hexdigest()[:12]
