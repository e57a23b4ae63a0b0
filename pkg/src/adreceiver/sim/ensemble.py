"""Single trials and seeded ensembles of trials."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtri

from ..exceptions import ConfigError
from ..mathkernels import make_rng
from .config import SimConfig, TrialResult, fold_samples
from .engine import simulate_counts
from .geometry import adsorption_probability, desorption_probability
from .reference import run_trial_reference

ENGINES = ("fast", "reference")


def run_trial(cfg: SimConfig, rng: np.random.Generator, engine: str = "fast") -> TrialResult:
    """Simulate one realisation of the frame ``cfg.bits``."""
    if engine == "reference":
        return run_trial_reference(cfg, rng)
    if engine != "fast":
        raise ConfigError(f"unknown engine {engine!r}, expected one of {ENGINES}")
    p = cfg.params
    net = np.zeros(cfg.n_samples, dtype=np.int64)
    starts = np.asarray(cfg.emission_steps(), dtype=np.int64)
    if p.Ntx and starts.size:
        simulate_counts(rng, cfg.transmitter, np.asarray(cfg.receiver_center), float(p.rr),
                        math.sqrt(2.0 * p.D * cfg.dt), adsorption_probability(p, cfg.dt),
                        desorption_probability(p, cfg.dt), int(p.Ntx), starts,
                        cfg.n_steps, cfg.steps_per_sample, net)
    per_bit, decoded = fold_samples(net, cfg)
    return TrialResult(net, per_bit, decoded)


def wilson_interval(successes: int, n: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return (0.0, 1.0)
    z = float(ndtri(0.5 + confidence / 2))
    phat = successes / n
    denom = 1 + z * z / n
    mid = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, mid - half)
    hi = 1.0 if successes == n else min(1.0, mid + half)
    return (lo, hi)


@dataclass(frozen=True)
class EnsembleResult:
    """Averages over independent trials.

    ``net_per_bit`` keeps every trial's per-bit counts (trials x bits) so error
    rates can be recomputed for any threshold.
    """

    cfg: SimConfig
    mean_net_per_sample: np.ndarray
    stderr_net_per_sample: np.ndarray
    mean_cumulative: np.ndarray
    stderr_cumulative: np.ndarray
    net_per_bit: np.ndarray

    @property
    def trials(self) -> int:
        return self.net_per_bit.shape[0]

    @property
    def times(self) -> np.ndarray:
        """Sample start times."""
        return np.arange(self.mean_net_per_sample.size) * self.cfg.params.Ts

    def error_count(self, j: int, Nth: Optional[int] = None) -> int:
        """Trials whose bit ``j`` (1-based) is decoded wrongly at threshold ``Nth``."""
        Nth = self.cfg.bits.Nth if Nth is None else Nth
        counts = self.net_per_bit[:, j - 1]
        if self.cfg.bits.bits[j - 1] == 1:
            return int(np.count_nonzero(counts < Nth))
        return int(np.count_nonzero(counts >= Nth))

    def empirical_error(self, j: int, Nth: Optional[int] = None) -> float:
        return self.error_count(j, Nth) / self.trials

    def error_interval(self, j: int, Nth: Optional[int] = None, confidence: float = 0.95):
        return wilson_interval(self.error_count(j, Nth), self.trials, confidence)

    def empirical_errors(self) -> np.ndarray:
        """Per-bit error rate at the frame's own threshold."""
        return np.array([self.empirical_error(j) for j in range(1, len(self.cfg.bits.bits) + 1)])


def _stderr(total, total_sq, n):
    if n < 2:
        return np.full_like(total, np.nan, dtype=float)
    mean = total / n
    var = np.maximum(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return np.sqrt(var / n)


def run_ensemble(cfg: SimConfig, engine: str = "fast", progress=None) -> EnsembleResult:
    """Run ``cfg.trials`` trials, trial ``i`` on stream ``i`` of ``cfg.seed``.

    Reduction is an ordered fold over trial index, so results depend only on
    ``(cfg, engine)``.  ``progress(i, trials)`` is called after each trial.
    """
    n = int(cfg.trials)
    ns = cfg.n_samples
    s1 = np.zeros(ns)
    s2 = np.zeros(ns)
    c1 = np.zeros(ns)
    c2 = np.zeros(ns)
    per_bit = np.zeros((n, len(cfg.bits.bits)), dtype=np.int64)
    for i in range(n):
        res = run_trial(cfg, make_rng(cfg.seed, i), engine)
        x = res.net_per_sample.astype(float)
        cum = np.cumsum(x)
        s1 += x
        s2 += x * x
        c1 += cum
        c2 += cum * cum
        per_bit[i] = res.net_per_bit
        if progress is not None:
            progress(i + 1, n)
    return EnsembleResult(cfg, s1 / n, _stderr(s1, s2, n), c1 / n, _stderr(c1, c2, n), per_bit)
