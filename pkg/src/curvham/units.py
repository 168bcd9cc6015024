"""Physical constants record.

Everything defaults to natural units (hbar = m = e = 1). The spin-orbit
coupling ``g`` is a dimensionless strength multiplying the W field. When
``c`` is None the 1/(2 m c^2) factor of the spin-orbit term is taken as
already absorbed into the supplied electric field.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    m: float = 1.0
    e: float = 1.0
    g: float = 1.0
    c: float | None = None

    def __post_init__(self):
        for name in ("hbar", "m", "e"):
            if not getattr(self, name) > 0:
                raise ConfigurationError("must be positive", field=f"constants.{name}")
        if self.g == 0:
            raise ConfigurationError("coupling must be nonzero", field="constants.g")
        if self.c is not None and not self.c > 0:
            raise ConfigurationError("must be positive or null", field="constants.c")

    @property
    def kinetic(self) -> float:
        """hbar^2 / 2m, the prefactor of every kinetic term."""
        return self.hbar**2 / (2.0 * self.m)

    @property
    def magneton(self) -> float:
        """e hbar / 2m (Zeeman prefactor)."""
        return self.e * self.hbar / (2.0 * self.m)

    def to_dict(self) -> dict:
        return asdict(self)


NATURAL = Constants()
