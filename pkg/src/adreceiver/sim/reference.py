"""Literal step-by-step simulator.

Every molecule is advanced every step, in the order emission, diffusion,
collision handling, desorption.  It is slow and exists to check the fast
engine and to expose the full particle state to tests.
"""

from __future__ import annotations

import numpy as np

from .config import Molecule, SimConfig, Status, StepCounters, TrialResult, fold_samples
from .geometry import adsorption_probability, desorption_component, desorption_probability


def _intersections(prev, nxt, center, rr):
    seg = nxt - prev
    u = seg / np.linalg.norm(seg, axis=1)[:, None]
    rel = prev - center
    b = np.einsum("ij,ij->i", u, rel)
    c = np.einsum("ij,ij->i", rel, rel) - rr * rr
    root = np.sqrt(np.maximum(b * b - c, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(c > 0, c / (root - b), 0.0)
    return prev + g[:, None] * u


class SimState:
    """Particle arrays of one trial.  Molecules are created at emission and never removed."""

    def __init__(self, cfg: SimConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        p = cfg.params
        n_total = p.Ntx * len(cfg.emission_steps())
        self.center = np.array(cfg.receiver_center)
        self.position = np.empty((n_total, 3))
        self.status = np.zeros(n_total, dtype=np.int8)
        self.site = np.full((n_total, 3), np.nan)
        self.n_active = 0
        self.step_index = 0
        self.sigma = np.sqrt(2.0 * p.D * cfg.dt)
        self.pa = adsorption_probability(p, cfg.dt)
        self.pd = desorption_probability(p, cfg.dt)
        self._emissions = set(cfg.emission_steps())

    def molecule(self, i: int) -> Molecule:
        st = Status(int(self.status[i]))
        site = self.site[i].copy() if st is Status.ADSORBED else None
        return Molecule(self.position[i].copy(), st, site)

    @property
    def n_free(self) -> int:
        return int(np.count_nonzero(self.status[:self.n_active] == Status.FREE))

    @property
    def n_adsorbed(self) -> int:
        return int(np.count_nonzero(self.status[:self.n_active] == Status.ADSORBED))

    def step(self) -> StepCounters:
        rng, rr, counters = self.rng, self.cfg.params.rr, StepCounters()
        if self.step_index in self._emissions:
            n = self.cfg.params.Ntx
            self.position[self.n_active:self.n_active + n] = self.cfg.transmitter
            self.status[self.n_active:self.n_active + n] = Status.FREE
            self.n_active += n
        active = slice(0, self.n_active)
        status = self.status[active]
        was_adsorbed = np.flatnonzero(status == Status.ADSORBED)

        free = np.flatnonzero(status == Status.FREE)
        prev = self.position[free]
        nxt = prev + rng.normal(0.0, self.sigma, prev.shape)
        inside = np.einsum("ij,ij->i", nxt - self.center, nxt - self.center) < rr * rr
        hit = free[inside]
        counters.n_collided = hit.size
        stick = rng.random(hit.size) < self.pa
        new_sites = _intersections(prev[inside][stick], nxt[inside][stick], self.center, rr)
        nxt[inside] = prev[inside]  # failed attempts bounce back; sticking ones get a site below
        self.position[free] = nxt
        glued = hit[stick]
        self.status[glued] = Status.ADSORBED
        self.site[glued] = new_sites
        self.position[glued] = new_sites
        counters.n_adsorbed_new = glued.size

        leave = was_adsorbed[rng.random(was_adsorbed.size) < self.pd]
        if leave.size:
            offset = self.sigma * desorption_component(rng.random((leave.size, 3)))
            site = self.site[leave]
            self.position[leave] = site + np.sign(site - self.center) * offset
            self.status[leave] = Status.FREE
            self.site[leave] = np.nan
        counters.n_desorbed_new = leave.size
        self.step_index += 1
        return counters


def run_trial_reference(cfg: SimConfig, rng: np.random.Generator, observer=None) -> TrialResult:
    """Run one trial with the literal stepper; ``observer(state, counters)`` is called after every step."""
    state = SimState(cfg, rng)
    sps = cfg.steps_per_sample
    net = np.zeros(cfg.n_samples, dtype=np.int64)
    for s in range(cfg.n_steps):
        c = state.step()
        net[s // sps] += c.net
        if observer is not None:
            observer(state, c)
    per_bit, decoded = fold_samples(net, cfg)
    return TrialResult(net, per_bit, decoded)
