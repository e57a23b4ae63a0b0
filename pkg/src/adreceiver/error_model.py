"""Bit-error probabilities under threshold demodulation of the net adsorbed count.

The net count of bit interval ``j`` is modelled as the difference of two
Poisson counts (a Skellam variable) whose rates collect the contributions of
every bit-1 emitted so far.  Irreversible receivers can alternatively use a
single Poisson count on the fraction adsorbed inside the interval.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .channel import cumulative_fraction
from .exceptions import ConfigError, DomainError, ReceiverKindError
from .mathkernels import QuadratureSpec, poisson_cdf, poisson_sf, skellam_cdf, skellam_sf
from .params import ReceiverKind, SystemParams

__all__ = [
    "BitFrame",
    "IsiRates",
    "isi_rates",
    "p_error_given_bit1",
    "p_error_given_bit0",
    "p_error_random_bit",
    "p_error_fa_pa",
    "p_error_history_averaged",
    "FractionCache",
    "threshold_sweep",
]


@dataclass(frozen=True)
class BitFrame:
    """Transmitted bits ``s_1 .. s_n``, decision threshold and bit priors."""

    bits: tuple
    Nth: int
    P1: float = 0.5
    P0: float = 0.5

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        object.__setattr__(self, "bits", bits)
        if not bits:
            raise ConfigError("a frame needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ConfigError("bits must be 0 or 1")
        if int(self.Nth) != self.Nth:
            raise ConfigError("Nth must be an integer")
        object.__setattr__(self, "Nth", int(self.Nth))
        if not (0 <= self.P1 <= 1 and 0 <= self.P0 <= 1 and math.isclose(self.P1 + self.P0, 1.0, abs_tol=1e-12)):
            raise ConfigError("priors must lie in [0, 1] and sum to 1")

    @classmethod
    def from_string(cls, text: str, Nth: int, P1: float = 0.5) -> "BitFrame":
        bits = tuple(int(c) for c in text if c in "01")
        return cls(bits, Nth, P1, 1.0 - P1)

    def with_bit(self, j: int, value: int) -> "BitFrame":
        bits = list(self.bits)
        bits[j - 1] = value
        return BitFrame(tuple(bits), self.Nth, self.P1, self.P0)

    def with_threshold(self, Nth: int) -> "BitFrame":
        return BitFrame(self.bits, Nth, self.P1, self.P0)


@dataclass(frozen=True)
class IsiRates:
    """Poisson rates of the adsorbed-by-end and adsorbed-by-start counts."""

    psi1: float
    psi2: float


class FractionCache:
    """Memoised ``R(m * Tb)`` for integer ``m``; sweeps reuse the same few values."""

    def __init__(self, p: SystemParams, spec: Optional[QuadratureSpec] = None,
                 fraction: Optional[Callable[[float, SystemParams], float]] = None):
        self.p = p
        self.spec = spec
        self._fraction = fraction
        self._values = {0: 0.0}

    def __call__(self, m: int) -> float:
        if m not in self._values:
            T = m * self.p.Tb
            if self._fraction is not None:
                self._values[m] = self._fraction(T, self.p)
            else:
                self._values[m] = cumulative_fraction(T, self.p, self.spec)
        return self._values[m]


def _check_index(frame: BitFrame, j: int):
    if not 1 <= j <= len(frame.bits):
        raise DomainError(f"bit index {j} outside 1..{len(frame.bits)}")


def _cache(p, cache):
    if cache is None:
        return FractionCache(p)
    if cache.p != p:
        raise ConfigError("fraction cache belongs to different parameters")
    return cache


def isi_rates(frame: BitFrame, j: int, p: SystemParams, cache: Optional[FractionCache] = None) -> IsiRates:
    """Rates of the two Poisson counts whose difference is the net count of bit ``j`` (1-based)."""
    _check_index(frame, j)
    R = _cache(p, cache)
    s = frame.bits
    psi1 = math.fsum(p.Ntx * s[i - 1] * R(j - i + 1) for i in range(1, j + 1))
    psi2 = math.fsum(p.Ntx * s[i - 1] * R(j - i) for i in range(1, j))
    return IsiRates(max(psi1, 0.0), max(psi2, 0.0))


def p_error_given_bit1(frame: BitFrame, j: int, p: SystemParams, cache: Optional[FractionCache] = None) -> float:
    """``P(net count < Nth)`` when bit ``j`` is a 1, under the Skellam model."""
    _check_index(frame, j)
    if frame.bits[j - 1] != 1:
        raise DomainError(f"bit {j} of the frame is not a 1")
    r = isi_rates(frame, j, p, cache)
    return skellam_cdf(frame.Nth - 1, r.psi1, r.psi2)


def p_error_given_bit0(frame: BitFrame, j: int, p: SystemParams, cache: Optional[FractionCache] = None) -> float:
    """``P(net count >= Nth)`` when bit ``j`` is a 0, under the Skellam model."""
    _check_index(frame, j)
    if frame.bits[j - 1] != 0:
        raise DomainError(f"bit {j} of the frame is not a 0")
    r = isi_rates(frame, j, p, cache)
    return skellam_sf(frame.Nth - 1, r.psi1, r.psi2)


def p_error_fa_pa(frame: BitFrame, j: int, p: SystemParams, bit: int,
                  cache: Optional[FractionCache] = None) -> float:
    """Single-Poisson error probability for irreversible (PA/FA) receivers.

    The rate is ``Ntx * sum_i s_i [R((j-i+1) Tb) - R((j-i) Tb)]`` with ``s_j``
    forced to ``bit``.
    """
    if p.kind is ReceiverKind.AD:
        raise ReceiverKindError("the single-Poisson model only applies to PA/FA receivers")
    if bit not in (0, 1):
        raise DomainError("bit must be 0 or 1")
    _check_index(frame, j)
    R = _cache(p, cache)
    s = list(frame.bits)
    s[j - 1] = bit
    gamma = math.fsum(s[i - 1] * (R(j - i + 1) - R(j - i)) for i in range(1, j + 1))
    rate = p.Ntx * max(gamma, 0.0)
    if bit == 1:
        return poisson_cdf(frame.Nth - 1, rate)
    return poisson_sf(frame.Nth - 1, rate)


def p_error_random_bit(frame: BitFrame, j: int, p: SystemParams, model: str = "auto",
                       cache: Optional[FractionCache] = None) -> float:
    """Prior-weighted error probability of bit ``j`` given the frame's earlier bits.

    ``model`` is ``"skellam"``, ``"poisson"`` (PA/FA only) or ``"auto"``, which
    picks Skellam for the reversible receiver and Poisson otherwise.
    """
    _check_index(frame, j)
    if model == "auto":
        model = "skellam" if p.kind is ReceiverKind.AD else "poisson"
    cache = _cache(p, cache)
    if model == "skellam":
        e1 = p_error_given_bit1(frame.with_bit(j, 1), j, p, cache) if frame.P1 > 0 else 0.0
        e0 = p_error_given_bit0(frame.with_bit(j, 0), j, p, cache) if frame.P0 > 0 else 0.0
    elif model == "poisson":
        e1 = p_error_fa_pa(frame, j, p, 1, cache) if frame.P1 > 0 else 0.0
        e0 = p_error_fa_pa(frame, j, p, 0, cache) if frame.P0 > 0 else 0.0
    else:
        raise DomainError(f"unknown error model {model!r}")
    return frame.P1 * e1 + frame.P0 * e0


def p_error_history_averaged(n_bits: int, Nth: int, p: SystemParams, P1: float = 0.5,
                             model: str = "auto", cache: Optional[FractionCache] = None) -> float:
    """Error probability of the last of ``n_bits`` bits, averaged over all earlier histories."""
    if n_bits < 1:
        raise DomainError("n_bits must be >= 1")
    cache = _cache(p, cache)
    P0 = 1.0 - P1
    total = []
    for hist in itertools.product((0, 1), repeat=n_bits - 1):
        weight = P1 ** sum(hist) * P0 ** (len(hist) - sum(hist))
        if weight == 0:
            continue
        frame = BitFrame(hist + (1,), Nth, P1, P0)
        total.append(weight * p_error_random_bit(frame, n_bits, p, model, cache))
    return math.fsum(total)


def threshold_sweep(frame: BitFrame, j: int, p: SystemParams, thresholds: Sequence[int],
                    kind: str = "random", model: str = "auto") -> list:
    """Evaluate an error probability over integer thresholds, sharing one fraction cache.

    ``kind`` selects ``"bit1"``, ``"bit0"`` or ``"random"``.
    """
    cache = FractionCache(p)
    out = []
    for nth in thresholds:
        f = frame.with_threshold(int(nth))
        if kind == "bit1":
            if model == "poisson":
                out.append(p_error_fa_pa(f, j, p, 1, cache))
            else:
                out.append(p_error_given_bit1(f.with_bit(j, 1), j, p, cache))
        elif kind == "bit0":
            if model == "poisson":
                out.append(p_error_fa_pa(f, j, p, 0, cache))
            else:
                out.append(p_error_given_bit0(f.with_bit(j, 0), j, p, cache))
        elif kind == "random":
            out.append(p_error_random_bit(f, j, p, model, cache))
        else:
            raise DomainError(f"unknown sweep kind {kind!r}")
    return out
