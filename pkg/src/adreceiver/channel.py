"""Expected channel response of a spherical adsorbing receiver.

The concentration around the receiver is known in closed form in the Laplace
domain.  Time-domain quantities are recovered by integrating the transform
along the imaginary axis ``s = jw`` (Gil-Pelaez style inversion of a causal
signal), in the real sine/cosine form so every integrand is real.  The
partial- and full-adsorption receivers also have erfc closed forms, which are
used directly.

Flux kernel
-----------
The surface flux ``K(t) = 4 pi rr^2 D dC/dr |_{rr}`` has the transform
``4 pi rr D * q(jw)`` with::

    q(w) = kappa / (1/rr + kappa + sqrt(jw/D)) * exp(-(r0 - rr) sqrt(jw/D)) / (4 pi r0 D)
    kappa = k1 jw / (D (jw + k_1))

Differentiating ``C = (rC)/r`` contributes ``-(rC)/rr`` on top of the
derivative of ``rC`` itself, which is why the numerator is ``kappa`` alone
rather than ``1/rr + kappa``.  With this kernel the reversible receiver with
``k_1 = 0`` reproduces the partial-adsorption erfc solution exactly, the flux
vanishes for ``k1 = 0``, and ``q(0) = 0`` whenever ``k_1 > 0`` (molecules in
an unbounded 3D medium eventually escape, so the bound count decays to zero).
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .exceptions import DomainError
from .mathkernels import QuadratureSpec, erfc, integrate_oscillatory
from .params import ReceiverKind, SystemParams

__all__ = [
    "ChannelResponse",
    "q_of_w",
    "phi_z",
    "laplace_concentration",
    "concentration",
    "cumulative_fraction",
    "quadrature_fraction",
    "pa_fraction",
    "fa_fraction",
    "net_adsorbed",
    "asymptotic_adsorbed",
    "channel_response_series",
    "DEFAULT_SPEC",
]

#: Tolerances on adsorbed *fractions*; integrals are rescaled internally.
DEFAULT_SPEC = QuadratureSpec(abs_tol=1e-9, rel_tol=1e-7)


# ---------------------------------------------------------------------------
# Laplace-domain kernels
# ---------------------------------------------------------------------------

def _gamma(s, D):
    return cmath.sqrt(s / D)


def _robin(s, p: SystemParams):
    """``k1 s / (D (s + k_1))``: surface reaction term of the Robin condition."""
    if p.k_1 == 0:
        return complex(p.k1 / p.D)
    return p.k1 * s / (p.D * (s + p.k_1))


def _flux_kernel(s, p: SystemParams):
    g = _gamma(s, p.D)
    decay = cmath.exp(-p.distance * g) / (4.0 * math.pi * p.r0 * p.D)
    if p.kind is ReceiverKind.FA:
        return decay
    kap = _robin(s, p)
    return kap / (1.0 / p.rr + kap + g) * decay


def q_of_w(w, p: SystemParams):
    """Flux kernel ``q(w)`` at angular frequency ``w > 0``.

    ``4 pi rr D q(w)`` is the Fourier transform of the surface flux for a
    unit release.  Works elementwise on arrays.
    """
    w_arr = np.asarray(w, dtype=float)
    if np.any(~(w_arr > 0)):
        raise DomainError("q_of_w needs w > 0")
    if w_arr.ndim == 0:
        return _flux_kernel(1j * float(w_arr), p)
    return np.array([_flux_kernel(1j * x, p) for x in w_arr.ravel()]).reshape(w_arr.shape)


def q_at_zero(p: SystemParams) -> float:
    """Limit of :func:`q_of_w` as ``w -> 0+``."""
    base = 1.0 / (4.0 * math.pi * p.r0 * p.D)
    if p.kind is ReceiverKind.FA:
        return base
    if p.k_1 > 0:
        return 0.0
    kap = p.k1 / p.D
    return kap / (1.0 / p.rr + kap) * base


def _z_term(s, r, p: SystemParams):
    g = _gamma(s, p.D)
    pref = 1.0 / (8.0 * math.pi * p.r0 * cmath.sqrt(p.D * s))
    ex = cmath.exp(-(r + p.r0 - 2.0 * p.rr) * g)
    if p.kind is ReceiverKind.FA:
        return 2.0 * pref * ex
    beta = 1.0 / p.rr + _robin(s, p)
    return 2.0 * beta / (beta + g) * pref * ex


def phi_z(w, r, p: SystemParams):
    """Correction term ``Z(jw)`` of the transformed ``r * C(r, t)``.

    ``r*C`` is two image Gaussians minus the inverse transform of ``Z``.
    """
    if r < p.rr:
        raise DomainError(f"r={r} lies inside the receiver (rr={p.rr})")
    w_arr = np.asarray(w, dtype=float)
    if np.any(~(w_arr > 0)):
        raise DomainError("phi_z needs w > 0")
    if w_arr.ndim == 0:
        return _z_term(1j * float(w_arr), r, p)
    return np.array([_z_term(1j * x, r, p) for x in w_arr.ravel()]).reshape(w_arr.shape)


def laplace_concentration(r, s, p: SystemParams):
    """Laplace transform ``C~(r, s)`` of the concentration (complex ``s`` allowed)."""
    if r < p.rr:
        raise DomainError(f"r={r} lies inside the receiver (rr={p.rr})")
    g = _gamma(s, p.D)
    pref = 1.0 / (8.0 * math.pi * p.r0 * cmath.sqrt(p.D * s))
    images = pref * (cmath.exp(-abs(r - p.r0) * g) + cmath.exp(-(r + p.r0 - 2.0 * p.rr) * g))
    return (images - _z_term(s, r, p)) / r


# ---------------------------------------------------------------------------
# time domain
# ---------------------------------------------------------------------------

def concentration(r, t, p: SystemParams, spec: Optional[QuadratureSpec] = None) -> float:
    """Expected concentration (1/um^3) at distance ``r`` and time ``t`` for a unit release."""
    if r < p.rr:
        raise DomainError(f"r={r} lies inside the receiver (rr={p.rr})")
    if not t > 0:
        raise DomainError("concentration needs t > 0")
    spec = spec or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-10)
    norm = 1.0 / (8.0 * math.pi * p.r0 * r * math.sqrt(math.pi * p.D * t))
    images = norm * (
        math.exp(-((r - p.r0) ** 2) / (4 * p.D * t))
        + math.exp(-((r + p.r0 - 2 * p.rr) ** 2) / (4 * p.D * t))
    )
    re = integrate_oscillatory(lambda w: _z_term(1j * w, r, p).real, spec, omega=t, weight="cos")
    im = integrate_oscillatory(lambda w: _z_term(1j * w, r, p).imag, spec, omega=t, weight="sin")
    return images - (re - im) / (math.pi * r)


def _scaled_spec(p: SystemParams, spec: QuadratureSpec) -> QuadratureSpec:
    scale = 4.0 * p.rr * p.D
    return QuadratureSpec(
        abs_tol=spec.abs_tol / scale,
        rel_tol=spec.rel_tol,
        max_subdivisions=spec.max_subdivisions,
        truncation_strategy=spec.truncation_strategy,
        upper_limit=spec.upper_limit,
        initial_width=spec.initial_width,
    )


def _initial_width(p: SystemParams) -> float:
    rates = [p.D / p.distance ** 2, p.D / p.rr ** 2]
    if p.k_1 > 0:
        rates.append(p.k_1)
    if p.k1 > 0 and math.isfinite(p.k1):
        rates.append(p.k1 ** 2 / p.D)
    return 0.1 * min(rates)


@functools.lru_cache(maxsize=256)
def _im_integral(p: SystemParams, spec: QuadratureSpec) -> float:
    """``int_0^inf Im q(w) / w dw`` (independent of time, cached per link)."""
    s = _scaled_spec(p, spec)
    s = QuadratureSpec(s.abs_tol, s.rel_tol, s.max_subdivisions, "tail_estimate", None, _initial_width(p))
    return integrate_oscillatory(lambda w: _flux_kernel(1j * w, p).imag / w, s)


def quadrature_fraction(T, p: SystemParams, spec: Optional[QuadratureSpec] = None) -> float:
    """Cumulative adsorbed fraction by time ``T`` from the flux kernel.

    ``R(T) = 4 rr D [ int sin(wT)/w Re q dw + int (cos(wT) - 1)/w Im q dw ]``.
    Valid for every finite ``k1``; :func:`cumulative_fraction` routes the
    reversible receiver here.
    """
    if T < 0:
        raise DomainError("T must be >= 0")
    if T == 0:
        return 0.0
    spec = spec or DEFAULT_SPEC
    s = _scaled_spec(p, spec)
    f_re = lambda w: _flux_kernel(1j * w, p).real / w  # noqa: E731
    f_im = lambda w: _flux_kernel(1j * w, p).imag / w  # noqa: E731
    i1 = integrate_oscillatory(f_re, s, omega=T, weight="sin")
    i2 = integrate_oscillatory(f_im, s, omega=T, weight="cos")
    return 4.0 * p.rr * p.D * (i1 + i2 - _im_integral(p, spec))


def _pa_alpha(p: SystemParams) -> float:
    return p.k1 / p.D + 1.0 / p.rr


def pa_fraction(T, p: SystemParams) -> float:
    """Closed-form adsorbed fraction by ``T`` for a partially adsorbing receiver.

    ``exp(a) * erfc(x)`` is evaluated as ``erfcx(x) * exp(a - x^2)`` so large
    ``k1`` or late times do not underflow/overflow.
    """
    if T < 0:
        raise DomainError("T must be >= 0")
    if T == 0 or p.k1 == 0:
        return 0.0
    alpha = _pa_alpha(p)
    y = p.distance / math.sqrt(4.0 * p.D * T)
    x = y + alpha * math.sqrt(p.D * T)
    bracket = special.erfc(y) - special.erfcx(x) * math.exp(-y * y)
    return (p.rr * alpha - 1.0) / (p.r0 * alpha) * bracket


def fa_fraction(T, p: SystemParams) -> float:
    """Closed-form adsorbed fraction by ``T`` for a fully adsorbing receiver."""
    if T < 0:
        raise DomainError("T must be >= 0")
    if T == 0:
        return 0.0
    return p.rr / p.r0 * erfc(p.distance / math.sqrt(4.0 * p.D * T))


def cumulative_fraction(T, p: SystemParams, spec: Optional[QuadratureSpec] = None) -> float:
    """Fraction of released molecules adsorbed at time ``T``, by receiver kind."""
    if T < 0:
        raise DomainError("T must be >= 0")
    kind = p.kind
    if kind is ReceiverKind.FA:
        return fa_fraction(T, p)
    if kind is ReceiverKind.PA:
        return pa_fraction(T, p)
    return quadrature_fraction(T, p, spec)


def net_adsorbed(T, Ts, p: SystemParams, spec: Optional[QuadratureSpec] = None) -> float:
    """Expected net change of the adsorbed count during ``[T, T + Ts]`` for one bit-1."""
    if T < 0:
        raise DomainError("T must be >= 0")
    if Ts < 0:
        raise DomainError("Ts must be >= 0")
    if Ts == 0:
        return 0.0
    return p.Ntx * (cumulative_fraction(T + Ts, p, spec) - cumulative_fraction(T, p, spec))


def asymptotic_adsorbed(p: SystemParams, spec: Optional[QuadratureSpec] = None) -> float:
    """Expected adsorbed count as ``T -> inf`` for one bit-1.

    FA gives ``Ntx rr / r0`` and PA ``Ntx k1 rr^2 / (r0 (k1 rr + D))``.  For the
    reversible receiver the limit of the sine/cosine representation is
    ``4 rr D [pi/2 q(0) - int Im q / w dw]`` (the cosine term dies out and
    ``int sin z / z = pi/2``), which the quadrature evaluates directly.
    """
    kind = p.kind
    if kind is ReceiverKind.FA:
        return p.Ntx * p.rr / p.r0
    if kind is ReceiverKind.PA:
        return p.Ntx * p.k1 * p.rr ** 2 / (p.r0 * (p.k1 * p.rr + p.D))
    spec = spec or DEFAULT_SPEC
    value = 4.0 * p.rr * p.D * (0.5 * math.pi * q_at_zero(p) - _im_integral(p, spec))
    return p.Ntx * value


# ---------------------------------------------------------------------------
# sampled series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelResponse:
    """Expected response sampled every ``Ts``.

    ``net[n]`` is the expected change of the adsorbed count over
    ``[times[n], times[n] + Ts]`` and ``cumulative[n]`` the expected adsorbed
    count at the end of that window.
    """

    times: np.ndarray
    net: np.ndarray
    cumulative: np.ndarray

    def peak_index(self) -> int:
        return int(np.argmax(self.net))


def channel_response_series(p: SystemParams, horizon: float, spec: Optional[QuadratureSpec] = None) -> ChannelResponse:
    """Sample the single-emission response on ``t = n Ts`` up to ``horizon``."""
    if horizon < p.Ts:
        raise DomainError("horizon must be at least one sampling interval")
    n = int(math.floor(horizon / p.Ts + 1e-9))
    edges = np.arange(n + 1) * p.Ts
    frac = np.array([cumulative_fraction(float(t), p, spec) for t in edges])
    counts = p.Ntx * frac
    return ChannelResponse(times=edges[:-1], net=np.diff(counts), cumulative=counts[1:])
