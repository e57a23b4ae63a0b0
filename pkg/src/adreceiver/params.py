"""Physical parameters of the transmitter/receiver link."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .exceptions import ConfigError


class ReceiverKind(enum.Enum):
    """Receiver family implied by the surface rates.

    AD is reversible adsorption/desorption, PA partial adsorption (finite
    ``k1``, no desorption) and FA full adsorption (``k1 = inf``, no desorption).
    """

    AD = "AD"
    PA = "PA"
    FA = "FA"


@dataclass(frozen=True)
class SystemParams:
    """Constants of one diffusive link.

    Units are micrometres and seconds throughout: ``D`` in um^2/s, ``r0`` and
    ``rr`` in um, ``k1`` in um/s (``math.inf`` for a fully adsorbing
    surface), ``k_1`` in 1/s, ``Ts`` and ``Tb`` in s.  ``Ntx`` is the number
    of molecules emitted for a bit-1.
    """

    D: float
    r0: float
    rr: float
    k1: float
    k_1: float = 0.0
    Ntx: int = 1000
    Ts: float = 0.002
    Tb: float = 0.2

    def __post_init__(self):
        for name in ("D", "r0", "rr", "k_1", "Ts", "Tb"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number, got {v!r}")
        if math.isnan(self.k1):
            raise ConfigError("k1 must not be NaN")
        if self.D <= 0:
            raise ConfigError("D must be > 0")
        if self.rr <= 0:
            raise ConfigError("rr must be > 0")
        if self.r0 <= self.rr:
            raise ConfigError(f"transmitter inside receiver: r0={self.r0} must exceed rr={self.rr}")
        if self.k1 < 0:
            raise ConfigError("k1 must be >= 0")
        if self.k_1 < 0:
            raise ConfigError("k_1 must be >= 0")
        if math.isinf(self.k1) and self.k_1 != 0:
            raise ConfigError("a fully adsorbing receiver (k1 = inf) cannot desorb (k_1 must be 0)")
        if int(self.Ntx) != self.Ntx or self.Ntx < 0:
            raise ConfigError("Ntx must be a non-negative integer")
        if not 0 < self.Ts <= self.Tb:
            raise ConfigError("need 0 < Ts <= Tb")

    @property
    def kind(self) -> ReceiverKind:
        if math.isinf(self.k1):
            return ReceiverKind.FA
        if self.k_1 > 0 and self.k1 > 0:
            return ReceiverKind.AD
        return ReceiverKind.PA

    @property
    def distance(self) -> float:
        """Gap ``r0 - rr`` between transmitter and receiver surface."""
        return self.r0 - self.rr

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)
