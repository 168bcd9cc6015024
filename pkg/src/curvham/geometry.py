"""Built-in surfaces in orthogonal curvilinear coordinates.

Each surface is the level set ``q3 = 0`` of an orthogonal coordinate system
``(q1, q2, q3)`` whose third coordinate is the signed distance along the
normal. Internally ``q3`` is always an offset that vanishes on the surface
(so ``r = a + q3`` for cylinder and sphere, ``q = q3`` for the torus).

Coordinates per kind::

    ring      q1 = theta              (q2 ignored)
    cylinder  q1 = theta, q2 = z
    sphere    q1 = theta (colatitude), q2 = phi
    torus     q1 = theta (poloidal),   q2 = phi (toroidal)

Sign convention for the mean curvature: ``M = -(1/2 h1 h2) d3(h1 h2)``, i.e.
the mean curvature taken with respect to the normal pointing towards
increasing ``q3`` (outwards). Physics only sees ``M**2 - K``.

Frame orientation: ``e1 x e2 = +n`` for ring, cylinder and sphere and
``e1 x e2 = -n`` for the torus (see :attr:`SurfaceSpec.orientation`).

All functions accept scalars or broadcastable numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigurationError, SingularPointError
from .units import NATURAL, Constants

TWO_PI = 2.0 * math.pi

# sin(theta) below this is treated as a pole
POLE_EPS = 1e-12


class SurfaceKind(str, Enum):
    RING = "ring"
    CYLINDER = "cylinder"
    SPHERE = "sphere"
    TORUS = "torus"


@dataclass(frozen=True)
class SurfaceSpec:
    """A parametrized surface.

    ``a`` is the radius of ring, cylinder and sphere; ``R`` and ``r`` the
    centre-to-tube distance and tube radius of the torus; ``L`` the axial
    extent of a cylinder (only needed for a bounded axis).
    """

    kind: SurfaceKind
    a: float | None = None
    R: float | None = None
    r: float | None = None
    L: float | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", SurfaceKind(self.kind))
        except ValueError:
            raise ConfigurationError(
                f"unknown surface kind {self.kind!r}; expected one of "
                f"{[k.value for k in SurfaceKind]}",
                field="surface.kind",
            ) from None
        if self.kind is SurfaceKind.TORUS:
            if self.R is None or self.r is None:
                raise ConfigurationError("torus needs R and r", field="surface")
            if not (self.r > 0 and self.R > self.r):
                raise ConfigurationError(
                    f"torus needs R > r > 0, got R={self.R}, r={self.r}", field="surface"
                )
        else:
            if self.a is None or not self.a > 0:
                raise ConfigurationError(
                    f"{self.kind.value} needs a > 0, got a={self.a}", field="surface.a"
                )
        if self.L is not None and not self.L > 0:
            raise ConfigurationError(f"L must be positive, got {self.L}", field="surface.L")

    @classmethod
    def ring(cls, a: float = 1.0) -> "SurfaceSpec":
        return cls(SurfaceKind.RING, a=a)

    @classmethod
    def cylinder(cls, a: float = 1.0, L: float | None = None) -> "SurfaceSpec":
        return cls(SurfaceKind.CYLINDER, a=a, L=L)

    @classmethod
    def sphere(cls, a: float = 1.0) -> "SurfaceSpec":
        return cls(SurfaceKind.SPHERE, a=a)

    @classmethod
    def torus(cls, R: float = 2.0, r: float = 0.5) -> "SurfaceSpec":
        return cls(SurfaceKind.TORUS, R=R, r=r)

    @property
    def orientation(self) -> int:
        """Sign s with ``e1 x e2 = s n``."""
        return -1 if self.kind is SurfaceKind.TORUS else 1

    @property
    def q1_period(self) -> float | None:
        return None if self.kind is SurfaceKind.SPHERE else TWO_PI

    @property
    def q2_period(self) -> float | None:
        if self.kind in (SurfaceKind.SPHERE, SurfaceKind.TORUS):
            return TWO_PI
        return None

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SurfaceSpec":
        return cls(**d)


class ScaleFactors(NamedTuple):
    h1: NDArray[np.float64]
    h2: NDArray[np.float64]
    h3: NDArray[np.float64]


class CurvatureData(NamedTuple):
    M: NDArray[np.float64]
    K: NDArray[np.float64]
    gke: NDArray[np.float64]


class SurfaceFrame(NamedTuple):
    e1: NDArray[np.float64]
    e2: NDArray[np.float64]
    n: NDArray[np.float64]


def _arrays(*qs: ArrayLike) -> list[NDArray[np.float64]]:
    return [np.asarray(q, dtype=float) for q in np.broadcast_arrays(*qs)]


def _check_regular(s: SurfaceSpec, q1: NDArray[np.float64]) -> None:
    if s.kind is SurfaceKind.SPHERE and np.any(np.abs(np.sin(q1)) < POLE_EPS):
        raise SingularPointError("sphere pole (sin(theta) = 0) is a coordinate singularity")


def scale_factors(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike, q3: ArrayLike = 0.0) -> ScaleFactors:
    """Scale factors ``(h1, h2, h3)`` at offset ``q3`` from the surface."""
    q1, q2, q3 = _arrays(q1, q2, q3)
    one = np.ones_like(q1)
    if s.kind in (SurfaceKind.RING, SurfaceKind.CYLINDER):
        return ScaleFactors((s.a + q3) * one, one, one)
    if s.kind is SurfaceKind.SPHERE:
        rho = s.a + q3
        return ScaleFactors(rho * one, rho * np.sin(q1), one)
    if s.kind is SurfaceKind.TORUS:
        rho = s.r + q3
        return ScaleFactors(rho * one, s.R + rho * np.cos(q1), one)
    raise ConfigurationError(f"unsupported surface kind {s.kind}", field="surface.kind")


def _area_element_derivatives(s: SurfaceSpec, q1: NDArray[np.float64]):
    """``P = h1 h2`` and its first two q3-derivatives, on the surface."""
    if s.kind in (SurfaceKind.RING, SurfaceKind.CYLINDER):
        one = np.ones_like(q1)
        return s.a * one, one, 0.0 * one
    if s.kind is SurfaceKind.SPHERE:
        st = np.sin(q1)
        return s.a**2 * st, 2.0 * s.a * st, 2.0 * st
    ct = np.cos(q1)
    return s.r * (s.R + s.r * ct), s.R + 2.0 * s.r * ct, 2.0 * ct


def normal_momentum_correction(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike) -> NDArray[np.float64]:
    """``(1/2 h1 h2) d3(h1 h2)`` on the surface.

    This is the term that makes ``-i hbar (d3 + .)`` Hermitian; it equals
    ``-mean_curvature``.
    """
    q1, _ = _arrays(q1, q2)
    _check_regular(s, q1)
    P, dP, _ = _area_element_derivatives(s, q1)
    return dP / (2.0 * P)


def mean_curvature(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike) -> NDArray[np.float64]:
    return -normal_momentum_correction(s, q1, q2)


def gaussian_curvature(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike) -> NDArray[np.float64]:
    q1, _ = _arrays(q1, q2)
    _check_regular(s, q1)
    if s.kind in (SurfaceKind.RING, SurfaceKind.CYLINDER):
        return np.zeros_like(q1)
    if s.kind is SurfaceKind.SPHERE:
        return np.full_like(q1, 1.0 / s.a**2)
    ct = np.cos(q1)
    return ct / (s.r * (s.R + s.r * ct))


def geometric_potential(
    s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike, constants: Constants = NATURAL
) -> NDArray[np.float64]:
    """Geometric kinetic energy ``-(hbar^2/2m)(M^2 - K)`` in closed form."""
    q1, _ = _arrays(q1, q2)
    _check_regular(s, q1)
    if s.kind in (SurfaceKind.RING, SurfaceKind.CYLINDER):
        return np.full_like(q1, -constants.kinetic / (4.0 * s.a**2))
    if s.kind is SurfaceKind.SPHERE:
        return np.zeros_like(q1)
    h2 = s.R + s.r * np.cos(q1)
    return -constants.kinetic * s.R**2 / (4.0 * s.r**2 * h2**2)


def curvature(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike, constants: Constants = NATURAL) -> CurvatureData:
    return CurvatureData(
        mean_curvature(s, q1, q2),
        gaussian_curvature(s, q1, q2),
        geometric_potential(s, q1, q2, constants),
    )


def surface_point(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike, q3: ArrayLike = 0.0) -> NDArray[np.float64]:
    """Cartesian position, shape ``broadcast(q1, q2) + (3,)``."""
    q1, q2, q3 = _arrays(q1, q2, q3)
    if s.kind is SurfaceKind.RING:
        rho = s.a + q3
        return np.stack([rho * np.cos(q1), rho * np.sin(q1), np.zeros_like(q1)], axis=-1)
    if s.kind is SurfaceKind.CYLINDER:
        rho = s.a + q3
        return np.stack([rho * np.cos(q1), rho * np.sin(q1), q2], axis=-1)
    if s.kind is SurfaceKind.SPHERE:
        rho = s.a + q3
        st = np.sin(q1)
        return rho[..., None] * np.stack([st * np.cos(q2), st * np.sin(q2), np.cos(q1)], axis=-1)
    rho = s.r + q3
    big = s.R + rho * np.cos(q1)
    return np.stack([big * np.cos(q2), big * np.sin(q2), rho * np.sin(q1)], axis=-1)


def frame(s: SurfaceSpec, q1: ArrayLike, q2: ArrayLike) -> SurfaceFrame:
    """Orthonormal frame ``(e1, e2, n)`` as Cartesian unit vectors."""
    q1, q2 = _arrays(q1, q2)
    _check_regular(s, q1)
    zero = np.zeros_like(q1)
    one = np.ones_like(q1)
    c1, s1 = np.cos(q1), np.sin(q1)
    if s.kind in (SurfaceKind.RING, SurfaceKind.CYLINDER):
        e1 = np.stack([-s1, c1, zero], axis=-1)
        e2 = np.stack([zero, zero, one], axis=-1)
        n = np.stack([c1, s1, zero], axis=-1)
    elif s.kind is SurfaceKind.SPHERE:
        c2, s2 = np.cos(q2), np.sin(q2)
        e1 = np.stack([c1 * c2, c1 * s2, -s1], axis=-1)
        e2 = np.stack([-s2, c2, zero], axis=-1)
        n = np.stack([s1 * c2, s1 * s2, c1], axis=-1)
    else:
        c2, s2 = np.cos(q2), np.sin(q2)
        e1 = np.stack([-s1 * c2, -s1 * s2, c1], axis=-1)
        e2 = np.stack([-s2, c2, zero], axis=-1)
        n = np.stack([c1 * c2, c1 * s2, s1], axis=-1)
    return SurfaceFrame(e1, e2, n)


def area(s: SurfaceSpec) -> float:
    """Analytic surface area (cylinder uses ``L``; ring returns its length)."""
    if s.kind is SurfaceKind.RING:
        return TWO_PI * s.a
    if s.kind is SurfaceKind.CYLINDER:
        if s.L is None:
            raise ConfigurationError("cylinder area needs L", field="surface.L")
        return TWO_PI * s.a * s.L
    if s.kind is SurfaceKind.SPHERE:
        return 4.0 * math.pi * s.a**2
    return 4.0 * math.pi**2 * s.R * s.r
