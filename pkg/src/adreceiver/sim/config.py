"""Simulation settings and per-trial records."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..error_model import BitFrame
from ..exceptions import ConfigError
from ..params import SystemParams


def _ratio(a: float, b: float, what: str) -> int:
    """``a / b`` as an integer, or a ConfigError naming ``what``."""
    n = round(a / b)
    if n < 1 or abs(n * b - a) > 1e-9 * max(abs(a), abs(b)):
        raise ConfigError(f"{what} must be an integer multiple ({a!r} / {b!r} = {a / b!r})")
    return int(n)


@dataclass(frozen=True)
class SimConfig:
    """Everything a Monte Carlo run needs besides the random stream.

    ``horizon`` defaults to the frame length ``len(bits) * Tb``; a shorter or
    longer horizon is allowed as long as it is a whole number of samples.
    """

    params: SystemParams
    dt: float
    bits: BitFrame = field(default_factory=lambda: BitFrame((1,), 1))
    receiver_center: tuple = (0.0, 0.0, 0.0)
    seed: int = 0
    trials: int = 1
    horizon: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be > 0")
        if self.dt > self.params.Ts * (1 + 1e-12):
            raise ConfigError(f"dt={self.dt} must not exceed Ts={self.params.Ts}")
        _ratio(self.params.Ts, self.dt, "Ts as a multiple of dt")
        _ratio(self.params.Tb, self.params.Ts, "Tb as a multiple of Ts")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")
        c = tuple(float(x) for x in self.receiver_center)
        if len(c) != 3:
            raise ConfigError("receiver_center needs three coordinates")
        object.__setattr__(self, "receiver_center", c)
        if self.horizon is not None:
            _ratio(self.horizon, self.params.Ts, "horizon as a multiple of Ts")

    @property
    def steps_per_sample(self) -> int:
        return _ratio(self.params.Ts, self.dt, "Ts as a multiple of dt")

    @property
    def samples_per_bit(self) -> int:
        return _ratio(self.params.Tb, self.params.Ts, "Tb as a multiple of Ts")

    @property
    def n_samples(self) -> int:
        h = self.horizon if self.horizon is not None else len(self.bits.bits) * self.params.Tb
        return _ratio(h, self.params.Ts, "horizon as a multiple of Ts")

    @property
    def n_steps(self) -> int:
        return self.n_samples * self.steps_per_sample

    @property
    def transmitter(self) -> np.ndarray:
        c = np.array(self.receiver_center)
        c[0] += self.params.r0
        return c

    def emission_steps(self) -> list:
        """Simulation step at which each bit-1 of the frame is emitted (inside the horizon)."""
        spb = self.samples_per_bit * self.steps_per_sample
        return [i * spb for i, b in enumerate(self.bits.bits) if b == 1 and i * spb < self.n_steps]


class Status(enum.IntEnum):
    FREE = 0
    ADSORBED = 1


@dataclass
class Molecule:
    """One information molecule; ``adsorption_site`` is set only while it is bound."""

    position: np.ndarray
    status: Status = Status.FREE
    adsorption_site: Optional[np.ndarray] = None


@dataclass
class StepCounters:
    """Collisions, new adsorptions and new desorptions during one step."""

    n_collided: int = 0
    n_adsorbed_new: int = 0
    n_desorbed_new: int = 0

    @property
    def net(self) -> int:
        return self.n_adsorbed_new - self.n_desorbed_new


@dataclass(frozen=True)
class TrialResult:
    """Net adsorbed counts of one trial, per sample and per bit, and the decoded bits."""

    net_per_sample: np.ndarray
    net_per_bit: np.ndarray
    demodulated: np.ndarray

    @property
    def final_adsorbed(self) -> int:
        return int(self.net_per_sample.sum())


def fold_samples(net_per_sample: np.ndarray, cfg: SimConfig):
    """Per-bit sums and decisions from a per-sample net series."""
    spb = cfg.samples_per_bit
    n_bits = len(cfg.bits.bits)
    per_bit = np.zeros(n_bits, dtype=np.int64)
    for j in range(n_bits):
        per_bit[j] = net_per_sample[j * spb:(j + 1) * spb].sum()
    return per_bit, (per_bit >= cfg.bits.Nth).astype(np.int8)
