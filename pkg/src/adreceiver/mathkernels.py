"""Special functions, discrete distributions, RNG streams and oscillatory quadrature.

Every other module builds on these.  Distribution tails are evaluated in log
space and summed over windows sized from Bernstein bounds on the Poisson
tails, so that rates in the thousands neither overflow nor lose the far tail.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .exceptions import DomainError, QuadratureError

__all__ = [
    "QuadratureSpec",
    "erfc",
    "erfcx",
    "bessel_i_scaled",
    "poisson_pmf",
    "poisson_cdf",
    "poisson_sf",
    "skellam_pmf",
    "skellam_cdf",
    "skellam_sf",
    "integrate_oscillatory",
    "wynn_epsilon",
    "make_rng",
    "sample_gaussian",
]


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def _check_finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return arr


def erfc(x):
    """Complementary error function ``2/sqrt(pi) * int_x^inf exp(-t^2) dt``."""
    arr = _check_finite(x)
    out = special.erfc(arr)
    return float(out) if out.ndim == 0 else out


def erfcx(x):
    """Scaled complementary error function ``exp(x^2) * erfc(x)``."""
    arr = _check_finite(x)
    out = special.erfcx(arr)
    return float(out) if out.ndim == 0 else out


def bessel_i_scaled(n, x):
    """Exponentially scaled modified Bessel function ``exp(-x) * I_n(x)``.

    Negative orders are folded onto ``|n|`` (``I_{-n} = I_n`` for integer n).
    """
    xa = _check_finite(x)
    if np.any(xa < 0):
        raise DomainError(f"bessel_i_scaled needs x >= 0, got {x!r}")
    out = special.ive(np.abs(np.asarray(n)), xa)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Poisson and Skellam
# ---------------------------------------------------------------------------

def _check_rate(mu, name="mu"):
    mu = float(mu)
    if not math.isfinite(mu) or mu < 0:
        raise DomainError(f"{name} must be a finite non-negative rate, got {mu!r}")
    return mu


def _tail_width(mu):
    # Bernstein: P(X - mu >= a) <= exp(-a^2 / (2 (mu + a/3))) ~ 1e-16 for this a.
    return int(math.ceil(8.0 * math.sqrt(mu + 1.0) + 30.0))


def poisson_pmf(k, mu):
    mu = _check_rate(mu)
    k = np.asarray(k)
    kf = k.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = special.xlogy(kf, mu) - mu - special.gammaln(kf + 1.0)
        out = np.where(k >= 0, np.exp(logp), 0.0)
    return float(out) if out.ndim == 0 else out


def poisson_cdf(n, mu):
    """``P(X <= n)`` for ``X ~ Poisson(mu)``; zero for ``n < 0``."""
    mu = _check_rate(mu)
    n = int(n)
    if n < 0:
        return 0.0
    if mu == 0.0:
        return 1.0
    return float(special.pdtr(n, mu))


def poisson_sf(n, mu):
    """``P(X > n)`` for ``X ~ Poisson(mu)``."""
    mu = _check_rate(mu)
    n = int(n)
    if n < 0:
        return 1.0
    if mu == 0.0:
        return 0.0
    return float(special.pdtrc(n, mu))


def _skellam_logpmf(k, mu1, mu2):
    # both rates > 0 here
    k = np.asarray(k)
    x = 2.0 * math.sqrt(mu1 * mu2)
    with np.errstate(divide="ignore"):
        log_i = np.log(special.ive(np.abs(k), x))
    return log_i - (math.sqrt(mu1) - math.sqrt(mu2)) ** 2 + 0.5 * k * (math.log(mu1) - math.log(mu2))


def skellam_pmf(n, mu1, mu2):
    """Probability that ``X1 - X2 == n`` for independent Poisson ``X1 ~ mu1``, ``X2 ~ mu2``."""
    mu1 = _check_rate(mu1, "mu1")
    mu2 = _check_rate(mu2, "mu2")
    n_arr = np.asarray(n)
    if mu1 == 0.0 and mu2 == 0.0:
        out = (n_arr == 0).astype(float)
    elif mu2 == 0.0:
        out = np.asarray(poisson_pmf(n_arr, mu1))
    elif mu1 == 0.0:
        out = np.asarray(poisson_pmf(-n_arr, mu2))
    else:
        out = np.exp(_skellam_logpmf(n_arr, mu1, mu2))
    return float(out) if out.ndim == 0 else out


def _lower_sum(n, mu1, mu2):
    """``sum_{k <= n} pmf(k)`` over a window whose omitted mass is below 1e-16."""
    lo = min(-int(math.ceil(mu2)) - _tail_width(mu2), n - _tail_width(mu1 + mu2))
    if n < lo:
        return 0.0
    return math.fsum(np.exp(_skellam_logpmf(np.arange(lo, n + 1), mu1, mu2)))


def _upper_sum(n, mu1, mu2):
    """``sum_{k > n} pmf(k)``."""
    hi = max(int(math.ceil(mu1)) + _tail_width(mu1), n + 1 + _tail_width(mu1 + mu2))
    return math.fsum(np.exp(_skellam_logpmf(np.arange(n + 1, hi + 1), mu1, mu2)))


def skellam_cdf(n, mu1, mu2):
    """``P(X1 - X2 <= n)``.

    The tail on the far side of the mean is summed directly and the other side
    is taken as its complement, so small probabilities keep their relative
    accuracy.  ``mu2 == 0`` defers to :func:`poisson_cdf`.
    """
    mu1 = _check_rate(mu1, "mu1")
    mu2 = _check_rate(mu2, "mu2")
    n = int(n)
    if mu2 == 0.0:
        return poisson_cdf(n, mu1)
    if mu1 == 0.0:
        # P(-X2 <= n) = P(X2 >= -n)
        return poisson_sf(-n - 1, mu2)
    if n < mu1 - mu2:
        return min(1.0, _lower_sum(n, mu1, mu2))
    return max(0.0, 1.0 - _upper_sum(n, mu1, mu2))


def skellam_sf(n, mu1, mu2):
    """``P(X1 - X2 > n)``; complements :func:`skellam_cdf`."""
    mu1 = _check_rate(mu1, "mu1")
    mu2 = _check_rate(mu2, "mu2")
    n = int(n)
    if mu2 == 0.0:
        return poisson_sf(n, mu1)
    if mu1 == 0.0:
        return poisson_cdf(-n - 1, mu2)
    if n < mu1 - mu2:
        return max(0.0, 1.0 - _lower_sum(n, mu1, mu2))
    return min(1.0, _upper_sum(n, mu1, mu2))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for :func:`integrate_oscillatory`.

    ``truncation_strategy`` is ``"tail_estimate"`` (extend panels until the
    extrapolated value settles) or ``"fixed_upper_limit"`` (integrate up to
    ``upper_limit`` and stop).
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_subdivisions: int = 4000
    truncation_strategy: str = "tail_estimate"
    upper_limit: Optional[float] = None
    initial_width: float = 1.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be > 0")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.truncation_strategy not in ("tail_estimate", "fixed_upper_limit"):
            raise DomainError(f"unknown truncation strategy {self.truncation_strategy!r}")
        if self.truncation_strategy == "fixed_upper_limit" and not (self.upper_limit and self.upper_limit > 0):
            raise DomainError("fixed_upper_limit needs a positive upper_limit")
        if not self.initial_width > 0:
            raise DomainError("initial_width must be > 0")


def wynn_epsilon(partial_sums):
    """Wynn's epsilon extrapolation of a sequence of partial sums.

    Returns the highest-order even-column entry of the epsilon table.
    """
    s = [float(v) for v in partial_sums]
    if len(s) < 3:
        return s[-1]
    prev = [0.0] * (len(s) + 1)
    cur = s
    best = s[-1]
    for k in range(1, len(s)):
        nxt = []
        for i in range(len(cur) - 1):
            diff = cur[i + 1] - cur[i]
            if diff == 0.0 or not math.isfinite(diff):
                return best
            nxt.append(prev[i + 1] + 1.0 / diff)
        prev, cur = cur, nxt
        if k % 2 == 0 and cur:
            best = cur[-1]
        if len(cur) < 2:
            break
    return best


_WINDOW = 20


def _panel(g, a, b, spec):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(g, a, b, epsabs=spec.abs_tol * 1e-2, epsrel=1e-10, limit=400)
    return val, err


def integrate_oscillatory(
    f: Callable[[float], float],
    spec: Optional[QuadratureSpec] = None,
    *,
    omega: Optional[float] = None,
    weight: Optional[str] = None,
    lower: float = 0.0,
) -> float:
    """Integrate ``f`` (optionally times ``sin``/``cos(omega*w)``) over ``[lower, inf)``.

    The half-line is cut into panels that are integrated with adaptive
    Gauss-Kronrod rules.  With an oscillation frequency ``omega`` the panels
    are half periods ``pi/omega`` long, so the partial sums form an
    alternating-like sequence that Wynn's epsilon algorithm accelerates;
    without one the panels double in width.  Interior-node rules never touch
    the panel endpoints, so removable or integrable singularities at
    ``w = lower`` need no special treatment.

    Parameters
    ----------
    f : callable
        Real integrand.
    spec : QuadratureSpec, optional
    omega : float, optional
        Oscillation frequency of the integrand (or of ``weight``).
    weight : {"sin", "cos"}, optional
        Multiply ``f`` by ``sin(omega*w)`` or ``cos(omega*w)``.
    lower : float
        Lower integration limit.

    Raises
    ------
    QuadratureError
        If the estimate has not settled after ``spec.max_subdivisions`` panels.
    """
    spec = spec or QuadratureSpec()
    if weight is not None:
        if weight not in ("sin", "cos"):
            raise DomainError(f"weight must be 'sin' or 'cos', got {weight!r}")
        if not (omega and omega > 0):
            raise DomainError("a weighted integral needs omega > 0")
        trig = np.sin if weight == "sin" else np.cos
        g = lambda w: f(w) * trig(omega * w)  # noqa: E731
    else:
        g = f

    if spec.truncation_strategy == "fixed_upper_limit":
        edges = _fixed_edges(lower, spec.upper_limit, omega, spec)
        return math.fsum(_panel(g, a, b, spec)[0] for a, b in zip(edges[:-1], edges[1:]))

    if omega and omega > 0:
        half = math.pi / omega
        width = lambda k: half  # noqa: E731
    else:
        width = lambda k: spec.initial_width * 2.0 ** k  # noqa: E731

    partial = []
    estimates = []
    total = 0.0
    a = lower
    for k in range(spec.max_subdivisions):
        b = a + width(k)
        val, _ = _panel(g, a, b, spec)
        total += val
        partial.append(total)
        a = b
        est = wynn_epsilon(partial[-_WINDOW:]) if len(partial) >= 3 else total
        estimates.append(est)
        if len(estimates) >= 3:
            tol = max(spec.abs_tol, spec.rel_tol * abs(est))
            d1 = abs(estimates[-1] - estimates[-2])
            d2 = abs(estimates[-2] - estimates[-3])
            if d1 < tol and d2 < tol:
                return est
            # plain convergence of a rapidly decaying integrand
            if abs(val) < 0.1 * tol and abs(partial[-2] - partial[-3]) < 0.1 * tol:
                return total
    residual = abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else float("inf")
    raise QuadratureError(
        f"oscillatory quadrature did not settle within {spec.max_subdivisions} panels",
        estimate=estimates[-1],
        residual=residual,
    )


def _fixed_edges(lower, upper, omega, spec):
    if upper <= lower:
        return [lower, lower]
    step = math.pi / omega if omega else spec.initial_width
    n = max(1, int(math.ceil((upper - lower) / step)))
    if n > spec.max_subdivisions:
        raise QuadratureError("fixed upper limit needs more panels than max_subdivisions allows")
    return list(np.linspace(lower, upper, n + 1))


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def make_rng(seed: int, stream: Optional[int] = None) -> np.random.Generator:
    """Counter-based (Philox) generator for ``seed``, optionally on an independent child stream.

    Streams are addressed by index, so trial ``i`` always sees the same numbers
    however trials are scheduled.
    """
    key = () if stream is None else (int(stream),)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def sample_gaussian(rng: np.random.Generator, mean, variance, size=None):
    """Draw from ``N(mean, variance)``; a zero variance returns ``mean`` exactly."""
    variance = float(variance)
    if not variance >= 0:
        raise DomainError(f"variance must be >= 0, got {variance!r}")
    if variance == 0.0:
        return mean if size is None else np.full(size, float(mean))
    return rng.normal(mean, math.sqrt(variance), size)
