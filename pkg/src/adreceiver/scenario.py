"""Scenarios: parameter sets plus what to compute, loaded from INI files or built-in presets.

A scenario file is plain INI with unit-bearing key names::

    [scenario]
    name = demo
    mode = compare            ; analytic | simulate | compare
    outputs = net             ; any of net, cumulative, ber
    horizon_s = 0.1

    [receiver]
    diffusion_um2_per_s = 8
    transmitter_distance_um = 11
    receiver_radius_um = 10
    adsorption_rate_um_per_s = 20     ; "inf" for a fully adsorbing surface
    desorption_rate_per_s = 5
    molecules_per_bit = 1000
    sampling_interval_s = 0.002
    bit_interval_s = 0.2

    [simulation]
    step_s = 1e-5
    trials = 1000
    seed = 1

    [demodulation]
    bits = 1 1 1
    threshold = 1
    bit_index = 3
    error = bit1              ; bit1 | bit0 | random
    threshold_min = -4
    threshold_max = 8

A ``preset = fig1`` key in ``[scenario]`` starts from a built-in preset and
lets the file override individual keys.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import math
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import channel
from .error_model import (
    BitFrame,
    FractionCache,
    p_error_fa_pa,
    p_error_given_bit0,
    p_error_given_bit1,
    p_error_history_averaged,
)
from .exceptions import ConfigError
from .params import ReceiverKind, SystemParams
from .sim import EnsembleResult, SimConfig, run_ensemble, wilson_interval

MODES = ("analytic", "simulate", "compare")
OUTPUTS = ("net", "cumulative", "ber")
ERROR_KINDS = ("bit1", "bit0", "random")
HISTORIES = ("known", "averaged")
CSV_COLUMNS = ("abscissa", "analytic", "empirical", "stderr")
WILSON_CONFIDENCE = 0.95


@dataclass(frozen=True)
class ReportRow:
    """One line of an output table; ``abscissa`` is a time in s or a threshold."""

    abscissa: float
    analytic: float
    empirical: Optional[float] = None
    stderr: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    """A parameter set, the simulation settings and the tables to produce.

    ``variants`` holds the other curves of a multi-curve figure as
    ``(label, params)`` pairs; :meth:`select` switches to one of them.
    """

    name: str
    params: SystemParams
    sim: Optional[SimConfig] = None
    frame: BitFrame = field(default_factory=lambda: BitFrame((1,), 1))
    mode: str = "analytic"
    outputs: Tuple[str, ...] = ("net",)
    threshold_sweep: Optional[range] = None
    horizon: Optional[float] = None
    output_step: Optional[float] = None
    bit_index: Optional[int] = None
    error_kind: str = "bit1"
    history: str = "known"
    variants: Tuple[Tuple[str, SystemParams], ...] = ()
    label: str = ""
    preset: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "analytic" and self.sim is None:
            raise ConfigError(f"mode {self.mode!r} needs simulation settings (step_s, trials)")
        if not self.outputs:
            raise ConfigError("at least one output is required")
        for o in self.outputs:
            if o not in OUTPUTS:
                raise ConfigError(f"unknown output {o!r}; choose from {OUTPUTS}")
        if self.threshold_sweep is not None and len(self.threshold_sweep) == 0:
            raise ConfigError("threshold sweep range is empty (threshold_min > threshold_max)")
        if "ber" in self.outputs and self.threshold_sweep is None:
            raise ConfigError("output 'ber' needs threshold_min and threshold_max")
        if self.error_kind not in ERROR_KINDS:
            raise ConfigError(f"error must be one of {ERROR_KINDS}, got {self.error_kind!r}")
        if self.history not in HISTORIES:
            raise ConfigError(f"history must be one of {HISTORIES}, got {self.history!r}")
        if self.history == "averaged" and self.error_kind != "random":
            raise ConfigError("history = averaged is only defined for error = random")
        if self.history == "averaged" and self.mode != "analytic" and "ber" in self.outputs:
            raise ConfigError("history-averaged error probabilities are analytic only")
        if self.horizon is not None:
            if not self.horizon >= self.params.Ts:
                raise ConfigError("horizon must be at least one sampling interval")
        if self.output_step is not None and not self.output_step >= self.params.Ts:
            raise ConfigError("output step must be at least one sampling interval")
        j = self.bit_index
        if j is not None and not 1 <= j <= len(self.frame.bits):
            raise ConfigError(f"bit_index {j} outside 1..{len(self.frame.bits)}")
        if self.sim is not None and (self.sim.params != self.params or self.sim.bits != self.frame
                                     or self.sim.horizon != self.horizon):
            object.__setattr__(self, "sim", dataclasses.replace(
                self.sim, params=self.params, bits=self.frame, horizon=self.horizon))

    @property
    def j(self) -> int:
        return self.bit_index if self.bit_index is not None else len(self.frame.bits)

    @property
    def span(self) -> float:
        if self.horizon is not None:
            return self.horizon
        return len(self.frame.bits) * self.params.Tb

    def select(self, label: str) -> "Scenario":
        """The same scenario evaluated for variant ``label``."""
        for lab, p in self.variants:
            if lab == label:
                return dataclasses.replace(self, params=p, label=lab)
        known = ", ".join(lab for lab, _ in self.variants) or "none"
        raise ConfigError(f"unknown variant {label!r} (available: {known})")

    def with_run(self, mode=None, trials=None, seed=None, threshold_min=None, threshold_max=None,
                 outputs=None) -> "Scenario":
        """Copy with command-line overrides applied."""
        changes = {}
        if mode is not None:
            changes["mode"] = mode
        if outputs is not None:
            changes["outputs"] = tuple(outputs)
        if self.sim is not None and (trials is not None or seed is not None):
            sim_changes = {}
            if trials is not None:
                sim_changes["trials"] = trials
            if seed is not None:
                sim_changes["seed"] = seed
            changes["sim"] = dataclasses.replace(self.sim, **sim_changes)
        elif trials is not None and self.sim is None:
            raise ConfigError("scenario has no simulation settings (step_s) so trials cannot be set")
        if threshold_min is not None or threshold_max is not None:
            cur = self.threshold_sweep
            lo = threshold_min if threshold_min is not None else (cur.start if cur else None)
            hi = threshold_max if threshold_max is not None else (cur.stop - 1 if cur else None)
            if lo is None or hi is None:
                raise ConfigError("both threshold bounds are needed for a sweep")
            changes["threshold_sweep"] = range(int(lo), int(hi) + 1)
        return dataclasses.replace(self, **changes)


def _make(name, params, frame, dt, trials, seed=1, **kw) -> Scenario:
    sim = None
    if dt is not None:
        sim = SimConfig(params, dt, frame, seed=seed, trials=trials, horizon=kw.get("horizon"))
    return Scenario(name=name, params=params, sim=sim, frame=frame, preset=name, **kw)


def _fig14_base(**kw):
    return SystemParams(D=8.0, r0=11.0, rr=10.0, Ntx=1000, Ts=0.002, **kw)


def _labelled(items):
    out = []
    for p in items:
        if p.kind is ReceiverKind.FA:
            lab = "FA"
        elif p.kind is ReceiverKind.PA:
            lab = f"PA k1={p.k1:g}"
        else:
            lab = f"AD k1={p.k1:g} k_1={p.k_1:g}"
        out.append((lab, p))
    return tuple(out)


def _preset_fig1():
    ps = [_fig14_base(k1=k, k_1=5.0) for k in (10.0, 15.0, 20.0, 25.0)]
    return _make("fig1", ps[2], BitFrame((1,), 1), 1e-5, 1000, horizon=0.1, outputs=("net",),
                 variants=_labelled(ps), label=_labelled(ps)[2][0])


def _preset_fig2():
    ps = [_fig14_base(k1=20.0, k_1=k) for k in (2.0, 5.0, 10.0, 20.0)]
    return _make("fig2", ps[1], BitFrame((1,), 1), 1e-5, 1000, horizon=0.1, outputs=("net",),
                 variants=_labelled(ps), label=_labelled(ps)[1][0])


def _preset_fig3():
    ps = [_fig14_base(k1=20.0, k_1=5.0), _fig14_base(k1=20.0), _fig14_base(k1=100.0),
          _fig14_base(k1=math.inf)]
    return _make("fig3", ps[0], BitFrame((1,), 1), 1e-5, 1000, horizon=0.5, outputs=("net",),
                 variants=_labelled(ps), label=_labelled(ps)[0][0])


def _preset_fig4():
    base = dict(Tb=2.0)
    ps = [_fig14_base(k1=300.0, k_1=20.0, **base), _fig14_base(k1=math.inf, **base),
          _fig14_base(k1=20.0, **base), _fig14_base(k1=300.0, **base)]
    return _make("fig4", ps[0], BitFrame((1,), 1), 1e-5, 10, horizon=100.0, output_step=0.5,
                 outputs=("cumulative",), variants=_labelled(ps), label=_labelled(ps)[0][0])


FIG6_BITS = "1011001110100101101100011"


def _preset_fig6():
    p = SystemParams(D=8.0, r0=11.0, rr=10.0, k1=10.0, k_1=5.0, Ntx=300, Ts=0.02, Tb=0.2)
    frame = BitFrame.from_string(FIG6_BITS, 1)
    return _make("fig6", p, frame, 1e-5, 20, outputs=("net", "cumulative"),
                 variants=_labelled([p]), label=_labelled([p])[0][0])


def _fig78_base(**kw):
    return SystemParams(D=5.0, r0=20.0, rr=15.0, Ntx=50, Ts=0.002, Tb=0.2, **kw)


def _preset_fig7():
    ps = [_fig78_base(k1=20.0, k_1=10.0), _fig78_base(k1=10.0, k_1=10.0), _fig78_base(k1=20.0, k_1=20.0)]
    return _make("fig7", ps[0], BitFrame((1, 1, 1), 1), 1e-6, 10000, outputs=("ber",),
                 threshold_sweep=range(-4, 9), bit_index=3, error_kind="bit1",
                 variants=_labelled(ps), label=_labelled(ps)[0][0])


def _preset_fig8():
    ps = [_fig78_base(k1=20.0, k_1=10.0), _fig78_base(k1=20.0), _fig78_base(k1=math.inf)]
    return _make("fig8", ps[0], BitFrame((1, 1, 0), 1), 1e-6, 10000, outputs=("ber",),
                 threshold_sweep=range(-4, 9), bit_index=3, error_kind="bit0",
                 variants=_labelled(ps), label=_labelled(ps)[0][0])


def _preset_fig9():
    base = dict(D=79.4, r0=10.0, rr=5.0, Ntx=1000, Ts=0.002, Tb=0.05)
    ps = [SystemParams(k1=1e4, k_1=1e3, **base), SystemParams(k1=1e3, k_1=1e2, **base),
          SystemParams(k1=math.inf, **base), SystemParams(k1=1e4, **base)]
    return _make("fig9", ps[0], BitFrame((1, 1, 1), 100), 1e-7, 10, outputs=("ber",),
                 threshold_sweep=range(40, 201), bit_index=3, error_kind="random",
                 variants=_labelled(ps), label=_labelled(ps)[0][0])


PRESETS = {
    "fig1": _preset_fig1, "fig2": _preset_fig2, "fig3": _preset_fig3, "fig4": _preset_fig4,
    "fig6": _preset_fig6, "fig7": _preset_fig7, "fig8": _preset_fig8, "fig9": _preset_fig9,
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


# ---------------------------------------------------------------------------
# INI loading
# ---------------------------------------------------------------------------

_PARAM_KEYS = {
    "diffusion_um2_per_s": "D",
    "transmitter_distance_um": "r0",
    "receiver_radius_um": "rr",
    "adsorption_rate_um_per_s": "k1",
    "desorption_rate_per_s": "k_1",
    "molecules_per_bit": "Ntx",
    "sampling_interval_s": "Ts",
    "bit_interval_s": "Tb",
}
_SCHEMA = {
    "scenario": {"name", "mode", "preset", "outputs", "horizon_s", "output_step_s", "variant"},
    "receiver": set(_PARAM_KEYS),
    "simulation": {"step_s", "trials", "seed", "receiver_center_um"},
    "demodulation": {"bits", "threshold", "prior_bit1", "bit_index", "error", "history",
                     "threshold_min", "threshold_max"},
}
_REQUIRED_PARAMS = ("diffusion_um2_per_s", "transmitter_distance_um", "receiver_radius_um",
                    "adsorption_rate_um_per_s")


class _Locator:
    """Line numbers of sections and keys, for error messages."""

    _section = re.compile(r"^\s*\[([^\]]+)\]")
    _key = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")

    def __init__(self, path: str, text: str):
        self.path = path
        self.lines = {}
        section = None
        for no, line in enumerate(text.splitlines(), 1):
            m = self._section.match(line)
            if m:
                section = m.group(1).strip()
                self.lines[(section, None)] = no
                continue
            m = self._key.match(line)
            if m and section is not None and not line[:1].isspace():
                self.lines[(section, m.group(1).strip().lower())] = no

    def error(self, section, key, message) -> ConfigError:
        no = self.lines.get((section, key)) or self.lines.get((section, None))
        where = f"{self.path}:{no}" if no else self.path
        field_ = f"[{section}] {key}" if key else f"[{section}]"
        return ConfigError(f"{where}: {field_}: {message}")


def _number(loc, section, key, raw, kind=float):
    try:
        v = kind(raw)
    except ValueError:
        raise loc.error(section, key, f"expected {'an integer' if kind is int else 'a number'}, got {raw!r}") from None
    if kind is float and math.isnan(v):
        raise loc.error(section, key, "NaN is not allowed")
    return v


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file; errors carry ``file:line: [section] key:`` context."""
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not UTF-8 text ({exc})") from None
    loc = _Locator(path, text)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    for section in cp.sections():
        if section not in _SCHEMA:
            raise loc.error(section, None, f"unknown section; expected one of {sorted(_SCHEMA)}")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise loc.error(section, key, f"unknown key; allowed: {', '.join(sorted(_SCHEMA[section]))}")
    get = lambda s, k: cp.get(s, k) if cp.has_option(s, k) else None

    base = None
    if get("scenario", "preset"):
        try:
            base = preset(get("scenario", "preset"))
        except ConfigError as exc:
            raise loc.error("scenario", "preset", str(exc)) from None
        if get("scenario", "variant"):
            try:
                base = base.select(get("scenario", "variant"))
            except ConfigError as exc:
                raise loc.error("scenario", "variant", str(exc)) from None

    # receiver parameters
    if base is not None:
        pvals = {f: getattr(base.params, f) for f in _PARAM_KEYS.values()}
    else:
        pvals = {"k_1": 0.0, "Ntx": 1000, "Ts": 0.002, "Tb": 0.2}
        missing = [k for k in _REQUIRED_PARAMS if get("receiver", k) is None]
        if missing:
            raise loc.error("receiver", None, f"missing required keys: {', '.join(missing)}")
    for key, attr in _PARAM_KEYS.items():
        raw = get("receiver", key)
        if raw is not None:
            pvals[attr] = _number(loc, "receiver", key, raw, int if attr == "Ntx" else float)
    try:
        params = SystemParams(**pvals)
    except ConfigError as exc:
        bad = _blame(str(exc))
        raise loc.error("receiver", bad, str(exc)) from None

    sc = get("scenario", "name") or (base.name if base else Path(path).stem)
    mode = get("scenario", "mode") or (base.mode if base else "analytic")
    outputs = tuple(o.strip() for o in get("scenario", "outputs").split(",") if o.strip()) \
        if get("scenario", "outputs") else (base.outputs if base else ("net",))
    horizon = _opt(loc, get, "scenario", "horizon_s", base.horizon if base else None)
    output_step = _opt(loc, get, "scenario", "output_step_s", base.output_step if base else None)

    # demodulation
    bits_raw = get("demodulation", "bits")
    if bits_raw is not None:
        if not re.fullmatch(r"[01\s,]+", bits_raw):
            raise loc.error("demodulation", "bits", f"bits must be 0/1 characters, got {bits_raw!r}")
        bits = tuple(int(c) for c in bits_raw if c in "01")
    else:
        bits = base.frame.bits if base else (1,)
    nth = _opt(loc, get, "demodulation", "threshold", base.frame.Nth if base else 1, int)
    p1 = _opt(loc, get, "demodulation", "prior_bit1", base.frame.P1 if base else 0.5)
    try:
        frame = BitFrame(bits, nth, p1, 1.0 - p1)
    except ConfigError as exc:
        raise loc.error("demodulation", "bits" if "bit" in str(exc) else "prior_bit1", str(exc)) from None
    bit_index = _opt(loc, get, "demodulation", "bit_index", base.bit_index if base else None, int)
    error_kind = get("demodulation", "error") or (base.error_kind if base else "bit1")
    history = get("demodulation", "history") or (base.history if base else "known")
    cur = base.threshold_sweep if base else None
    tmin = _opt(loc, get, "demodulation", "threshold_min", cur.start if cur else None, int)
    tmax = _opt(loc, get, "demodulation", "threshold_max", cur.stop - 1 if cur else None, int)
    sweep = None
    if tmin is not None or tmax is not None:
        if tmin is None or tmax is None:
            raise loc.error("demodulation", "threshold_min" if tmin is None else "threshold_max",
                            "threshold_min and threshold_max must be given together")
        sweep = range(tmin, tmax + 1)

    # simulation
    dt = _opt(loc, get, "simulation", "step_s", base.sim.dt if base and base.sim else None)
    trials = _opt(loc, get, "simulation", "trials", base.sim.trials if base and base.sim else 1, int)
    seed = _opt(loc, get, "simulation", "seed", base.sim.seed if base and base.sim else 0, int)
    center = (0.0, 0.0, 0.0)
    if get("simulation", "receiver_center_um"):
        parts = [x for x in re.split(r"[,\s]+", get("simulation", "receiver_center_um")) if x]
        if len(parts) != 3:
            raise loc.error("simulation", "receiver_center_um", "expected three coordinates")
        center = tuple(_number(loc, "simulation", "receiver_center_um", x) for x in parts)
    sim = None
    if dt is not None:
        try:
            sim = SimConfig(params, dt, frame, center, seed, trials, horizon)
        except ConfigError as exc:
            raise loc.error("simulation", _sim_blame(str(exc)), str(exc)) from None

    variants = base.variants if base is not None and not cp.has_section("receiver") else ()
    try:
        scenario = Scenario(name=sc, params=params, sim=sim, frame=frame, mode=mode, outputs=outputs,
                            threshold_sweep=sweep, horizon=horizon, output_step=output_step,
                            bit_index=bit_index, error_kind=error_kind, history=history,
                            variants=variants, label=base.label if base else "",
                            preset=base.preset if base else None)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return scenario


def _opt(loc, get, section, key, default, kind=float):
    raw = get(section, key)
    return default if raw is None else _number(loc, section, key, raw, kind)


def _blame(message: str) -> Optional[str]:
    inverse = {v: k for k, v in _PARAM_KEYS.items()}
    for attr in ("r0", "k_1", "k1", "Ntx", "Ts", "Tb", "rr", "D"):
        if re.search(rf"\b{re.escape(attr)}\b", message):
            return inverse[attr]
    return None


def _sim_blame(message: str) -> Optional[str]:
    if "trials" in message:
        return "trials"
    if "seed" in message:
        return "seed"
    if "center" in message:
        return "receiver_center_um"
    return "step_s"


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass
class ScenarioResult:
    """Rows per requested output plus a JSON-serialisable summary."""

    scenario: Scenario
    rows: Dict[str, List[ReportRow]] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _emission_times(sc: Scenario) -> list:
    return [i * sc.params.Tb for i, b in enumerate(sc.frame.bits) if b == 1]


def expected_adsorbed(times, sc: Scenario, spec=None) -> np.ndarray:
    """Expected adsorbed count at each time for the scenario's whole bit frame (superposition)."""
    memo = {}
    p = sc.params
    emissions = _emission_times(sc)

    def R(t):
        key = round(t, 12)
        if key not in memo:
            memo[key] = channel.cumulative_fraction(max(key, 0.0), p, spec) if key > 0 else 0.0
        return memo[key]

    return np.array([p.Ntx * math.fsum(R(t - e) for e in emissions if t > e) for t in times])


def _series_rows(sc: Scenario, what: str, ens: Optional[EnsembleResult]) -> Tuple[List[ReportRow], dict]:
    p = sc.params
    n = int(round(sc.span / p.Ts))
    if what == "net":
        edges = np.arange(n + 1) * p.Ts
        counts = expected_adsorbed(edges, sc)
        ana = np.diff(counts)
        absc = edges[:-1]
        idx = np.arange(n)
        emp = ens.mean_net_per_sample if ens is not None else None
        err = ens.stderr_net_per_sample if ens is not None else None
    else:
        step = sc.output_step or p.Ts
        stride = max(1, int(round(step / p.Ts)))
        idx = np.arange(stride - 1, n, stride)
        absc = (idx + 1) * p.Ts
        ana = expected_adsorbed(absc, sc)
        emp = ens.mean_cumulative if ens is not None else None
        err = ens.stderr_cumulative if ens is not None else None
    rows = []
    for k, i in enumerate(idx):
        if emp is None:
            rows.append(ReportRow(float(absc[k]), float(ana[k])))
        else:
            rows.append(ReportRow(float(absc[k]), float(ana[k]), float(emp[i]), float(err[i])))
    summary = {}
    if ens is not None and what == "net":
        pk = int(np.argmax(ana))
        summary["peak_time_s"] = float(absc[pk])
        summary["peak_analytic"] = float(ana[pk])
        summary["peak_empirical"] = float(emp[pk])
        summary["peak_relative_deviation"] = float(emp[pk] / ana[pk] - 1.0) if ana[pk] else None
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(err > 0, (emp - ana) / err, 0.0)
        summary["max_abs_z_off_peak"] = float(np.max(np.abs(np.delete(z, pk)))) if z.size > 1 else 0.0
    return rows, summary


def analytic_error(sc: Scenario, frame: BitFrame, Nth: int, kind: str, cache=None) -> float:
    """Analytic error of bit ``sc.j`` of ``frame`` at threshold ``Nth``."""
    p, j = sc.params, sc.j
    cache = cache if cache is not None else FractionCache(p)
    if sc.history == "averaged":
        return p_error_history_averaged(j, Nth, p, frame.P1, cache=cache)
    return _error_with_cache(frame.with_threshold(Nth), j, p, kind, cache)


def _error_with_cache(frame, j, p, kind, cache):
    poisson = p.kind is not ReceiverKind.AD
    if kind == "bit1":
        f = frame.with_bit(j, 1)
        return p_error_fa_pa(f, j, p, 1, cache) if poisson else p_error_given_bit1(f, j, p, cache)
    if kind == "bit0":
        f = frame.with_bit(j, 0)
        return p_error_fa_pa(f, j, p, 0, cache) if poisson else p_error_given_bit0(f, j, p, cache)
    return (frame.P1 * _error_with_cache(frame, j, p, "bit1", cache)
            + frame.P0 * _error_with_cache(frame, j, p, "bit0", cache))


def _ber_rows(sc: Scenario, runs: Dict[int, EnsembleResult]) -> Tuple[List[ReportRow], dict]:
    cache = FractionCache(sc.params)
    frame, j = sc.frame, sc.j
    rows, intervals = [], []
    for nth in sc.threshold_sweep:
        ana = analytic_error(sc, frame, nth, sc.error_kind, cache)
        if not runs:
            rows.append(ReportRow(float(nth), float(ana)))
            continue
        weights = {1: frame.P1, 0: frame.P0} if sc.error_kind == "random" else \
            {1 if sc.error_kind == "bit1" else 0: 1.0}
        emp, var = 0.0, 0.0
        ci = {}
        for bit, w in weights.items():
            ens = runs[bit]
            k, n = ens.error_count(j, nth), ens.trials
            ph = k / n
            emp += w * ph
            var += w * w * ph * (1 - ph) / n
            ci[f"bit{bit}"] = list(wilson_interval(k, n, WILSON_CONFIDENCE))
        rows.append(ReportRow(float(nth), float(ana), float(emp), math.sqrt(var)))
        intervals.append({"threshold": int(nth), "analytic": float(ana), "empirical": float(emp),
                          "wilson": ci})
    summary = {"wilson_confidence": WILSON_CONFIDENCE, "thresholds": intervals} if runs else {}
    return rows, summary


def per_bit_errors(sc: Scenario, ens: EnsembleResult) -> list:
    """Empirical and analytic error of every bit of the simulated frame at its own threshold."""
    cache = FractionCache(sc.params)
    frame, p = ens.cfg.bits, sc.params
    out = []
    for j, b in enumerate(frame.bits, 1):
        poisson = p.kind is not ReceiverKind.AD
        if b == 1:
            ana = p_error_fa_pa(frame, j, p, 1, cache) if poisson else p_error_given_bit1(frame, j, p, cache)
        else:
            ana = p_error_fa_pa(frame, j, p, 0, cache) if poisson else p_error_given_bit0(frame, j, p, cache)
        lo, hi = ens.error_interval(j, confidence=WILSON_CONFIDENCE)
        out.append({"bit": j, "sent": b, "analytic": float(ana),
                    "empirical": ens.empirical_error(j), "wilson": [lo, hi]})
    return out


def run_scenario(sc: Scenario, progress=None) -> ScenarioResult:
    """Evaluate every requested output.  Simulation runs once and is shared between outputs."""
    result = ScenarioResult(sc)
    simulate = sc.mode != "analytic"
    ens = None
    runs: Dict[int, EnsembleResult] = {}
    try:
        if simulate and any(o in ("net", "cumulative") for o in sc.outputs):
            ens = run_ensemble(sc.sim, progress=progress)
        if simulate and "ber" in sc.outputs:
            bits = (1, 0) if sc.error_kind == "random" else ((1,) if sc.error_kind == "bit1" else (0,))
            for bit in bits:
                cfg = dataclasses.replace(sc.sim, bits=sc.frame.with_bit(sc.j, bit), horizon=None)
                runs[bit] = run_ensemble(cfg, progress=progress)
        for out in sc.outputs:
            if out == "ber":
                rows, summ = _ber_rows(sc, runs)
            else:
                rows, summ = _series_rows(sc, out, ens)
            result.rows[out] = rows
            result.summary[out] = summ
        if ens is not None and sc.mode == "compare":
            result.summary["per_bit"] = per_bit_errors(sc, ens)
        if sc.mode == "compare" and runs:
            result.summary["per_bit_ber_runs"] = {f"bit{b}": per_bit_errors(sc, e) for b, e in runs.items()}
    except ConfigError as exc:
        raise ConfigError(f"scenario {sc.name!r}: {exc}") from exc
    return result


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def emit_csv(rows: List[ReportRow], path) -> None:
    """Write rows with the fixed header ``abscissa,analytic,empirical,stderr``."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r.abscissa), _fmt(r.analytic), _fmt(r.empirical), _fmt(r.stderr)])


def read_csv(path) -> List[ReportRow]:
    """Inverse of :func:`emit_csv`."""
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected header {header!r}")
        return [ReportRow(*(float(v) if v != "" else None for v in line)) for line in reader]


def scenario_metadata(sc: Scenario) -> dict:
    p = sc.params
    meta = {
        "name": sc.name, "preset": sc.preset, "variant": sc.label, "mode": sc.mode,
        "outputs": list(sc.outputs), "receiver_kind": p.kind.value,
        "params": {f.name: (None if isinstance(getattr(p, f.name), float) and math.isinf(getattr(p, f.name))
                            else getattr(p, f.name)) for f in dataclasses.fields(p)},
        "horizon_s": sc.span, "bits": "".join(map(str, sc.frame.bits)), "bit_index": sc.j,
        "error": sc.error_kind, "history": sc.history,
        "variants": [lab for lab, _ in sc.variants],
    }
    if math.isinf(p.k1):
        meta["params"]["k1"] = "inf"
    if sc.sim is not None:
        meta.update(seed=sc.sim.seed, trials=sc.sim.trials if sc.mode != "analytic" else 0,
                    dt_s=sc.sim.dt)
    if sc.threshold_sweep is not None:
        meta["threshold_range"] = [sc.threshold_sweep.start, sc.threshold_sweep.stop - 1]
    return meta


def output_paths(out, outputs) -> Dict[str, Path]:
    """CSV path per output; several outputs get ``<stem>_<output>.csv`` next to ``out``."""
    out = Path(out)
    if len(outputs) == 1:
        return {outputs[0]: out}
    return {o: out.with_name(f"{out.stem}_{o}{out.suffix or '.csv'}") for o in outputs}


def write_outputs(result: ScenarioResult, out, wall_time: float) -> Dict[str, Path]:
    """Write one CSV per output and a ``.json`` summary next to ``out``."""
    paths = output_paths(out, list(result.rows))
    for name, rows in result.rows.items():
        emit_csv(rows, paths[name])
    spec = channel.DEFAULT_SPEC
    meta = scenario_metadata(result.scenario)
    meta.update(
        tolerances={"quadrature_abs_tol": spec.abs_tol, "quadrature_rel_tol": spec.rel_tol,
                    "wilson_confidence": WILSON_CONFIDENCE},
        wall_time_s=wall_time,
        files={k: str(v) for k, v in paths.items()},
        summary=result.summary,
    )
    sidecar = Path(out).with_suffix(".json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return paths


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not serialisable: {type(o)}")


def timed_run(sc: Scenario, progress=None):
    t0 = time.perf_counter()
    res = run_scenario(sc, progress)
    return res, time.perf_counter() - t0
