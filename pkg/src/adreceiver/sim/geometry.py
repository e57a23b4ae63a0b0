"""Per-step reaction probabilities and the surface geometry of the spherical receiver."""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..exceptions import DomainError, GeometryError, StepSizeWarning
from ..params import ReceiverKind, SystemParams

# rational fit for one component of the post-desorption displacement, in units of sqrt(2 D dt)
_NUM = (0.571825, -0.552246)
_DEN = (-1.53908, 0.546424)


def _check_dt(dt):
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")


def adsorption_probability(p: SystemParams, dt: float) -> float:
    """Probability that a molecule hitting the surface during one step sticks.

    Equals ``k1 sqrt(pi dt / D)``; a fully adsorbing receiver returns 1.  Values
    above 1 are clamped with a :class:`StepSizeWarning`.
    """
    _check_dt(dt)
    if p.kind is ReceiverKind.FA:
        return 1.0
    pa = p.k1 * math.sqrt(math.pi * dt / p.D)
    if pa > 1.0:
        limit = p.D / (math.pi * p.k1 ** 2)
        warnings.warn(
            f"adsorption probability {pa:.3g} exceeds 1 and was clamped; use dt < {limit:.3g} s",
            StepSizeWarning, stacklevel=2)
        return 1.0
    return pa


def desorption_probability(p: SystemParams, dt: float) -> float:
    """Probability that an adsorbed molecule leaves the surface during one step."""
    _check_dt(dt)
    return -math.expm1(-p.k_1 * dt)


def segment_sphere_intersection(prev, nxt, center, rr: float) -> np.ndarray:
    """First point where the segment ``prev -> nxt`` meets the sphere ``|x - center| = rr``.

    ``prev`` must lie on or outside the sphere and ``nxt`` inside it.
    """
    prev = np.asarray(prev, dtype=float)
    nxt = np.asarray(nxt, dtype=float)
    center = np.asarray(center, dtype=float)
    seg = nxt - prev
    length = float(np.linalg.norm(seg))
    if length == 0.0:
        raise GeometryError("degenerate segment")
    u = seg / length
    rel = prev - center
    # g^2 + 2 b g + c = 0 for the distance g travelled along u
    b = float(u @ rel)
    c = float(rel @ rel) - rr * rr
    disc = b * b - c
    if disc < 0:
        raise GeometryError("segment does not reach the sphere")
    root = math.sqrt(disc)
    if c <= 0:
        g = 0.0 if c == 0 or b >= 0 else c / (-b + root)
        g = max(g, 0.0)
    else:
        if b >= 0:
            raise GeometryError("segment starts outside and points away from the sphere")
        g = c / (-b + root)
    if g > length * (1 + 1e-12):
        raise GeometryError("segment ends before reaching the sphere")
    return prev + min(g, length) * u


def reflect(prev):
    """A molecule that fails to adsorb goes back to where it started the step."""
    return prev


def desorption_component(P):
    """Displacement of one axis after desorption for uniform draw ``P``, in units of sqrt(2 D dt)."""
    P = np.asarray(P, dtype=float)
    out = (_NUM[0] * P + _NUM[1] * P * P) / (1.0 + _DEN[0] * P + _DEN[1] * P * P)
    return out if out.ndim else float(out)


def desorption_displacement(rng: np.random.Generator, D: float, dt: float) -> np.ndarray:
    """Three independent non-negative offsets applied to a molecule leaving the surface."""
    _check_dt(dt)
    return math.sqrt(2.0 * D * dt) * desorption_component(rng.random(3))


def place_after_desorption(site, center, offset) -> np.ndarray:
    """Push a molecule away from the centre, axis by axis, starting from its adsorption site."""
    site = np.asarray(site, dtype=float)
    return site + np.sign(site - np.asarray(center, dtype=float)) * np.asarray(offset, dtype=float)
