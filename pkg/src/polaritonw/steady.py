"""Closed-form long-time solution of the continuously driven system.

This is the independent oracle path: spectrum of the rotating-frame drift,
its Green-function elements, the stationary populations/correlators, and
the W-mixture weight, all as explicit formulas that never touch the
numerical integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralData",
    "GreenElements",
    "SteadyMoments",
    "spectral_data",
    "green_elements",
    "green_matrix",
    "steady_moments",
    "entanglement_weight",
]


@dataclass(frozen=True)
class SpectralData:
    """Spectrum of the rotating-frame drift matrix.

    ``splitting`` is ``sqrt((gamma_i - gamma_s)^2 + 16 delta^2)``; the
    threefold-degenerate branch sits at ``base_rate = -gamma_s - i omega_i``
    and the remaining pair at ``base_rate - rate_plus`` and
    ``base_rate - rate_minus`` with ``rate_+- = (gamma_i - gamma_s +-
    splitting) / 2`` (``rate_plus > 0 > rate_minus`` whenever delta > 0).
    """

    splitting: float
    base_rate: complex
    rate_plus: float
    rate_minus: float
    eigenvalues: np.ndarray


def spectral_data(gamma_i: float, gamma_s: float, delta: float,
                  omega_i: float = 0.0) -> SpectralData:
    if gamma_i <= 0 or gamma_s <= 0:
        raise ValueError("damping rates must be positive")
    splitting = math.hypot(gamma_i - gamma_s, 4.0 * delta)
    base = -gamma_s - 1j * omega_i
    rate_plus = 0.5 * (gamma_i - gamma_s + splitting)
    rate_minus = 0.5 * (gamma_i - gamma_s - splitting)
    lam4 = -0.5 * (gamma_i + gamma_s + splitting) - 1j * omega_i
    lam5 = -0.5 * (gamma_i + gamma_s - splitting) - 1j * omega_i
    eigenvalues = np.array([base, base, base, lam4, lam5])
    return SpectralData(splitting=splitting, base_rate=base,
                        rate_plus=rate_plus, rate_minus=rate_minus,
                        eigenvalues=eigenvalues)


@dataclass(frozen=True)
class GreenElements:
    """Block elements of the propagator, with the common ``exp(base_rate t)``
    factor stripped off; at t = 0 they assemble to the identity."""

    g_ii: float
    g_is: complex
    g_ss: float
    g_ssp: float


def green_elements(gamma_i: float, gamma_s: float, delta: float, t: float) -> GreenElements:
    """Closed-form propagator block elements at lag ``t >= 0``.

    ``g_ii`` propagates the idler onto itself, ``g_is`` the idler-signal
    cross element (its conjugate fills the idler column), ``g_ss`` the
    signal diagonal, and ``g_ssp = g_ss - 1`` every signal-signal cross
    element.  Finite-``t`` evaluation needs no stability condition.
    """
    if t < 0:
        raise ValueError(f"lag must be nonnegative, got {t}")
    half_diff = 0.5 * (gamma_i - gamma_s)
    splitting = math.hypot(gamma_i - gamma_s, 4.0 * delta)
    half = 0.5 * splitting * t
    decay = math.exp(-half_diff * t)
    ch, sh = math.cosh(half), math.sinh(half)
    ratio = 0.0 if splitting == 0.0 else (gamma_i - gamma_s) / splitting
    g_ii = decay * (ch - ratio * sh)
    g_is = 0j if splitting == 0.0 else -2j * (delta / splitting) * decay * sh
    g_ss = 0.75 + 0.25 * decay * (ch + ratio * sh)
    return GreenElements(g_ii=g_ii, g_is=g_is, g_ss=g_ss, g_ssp=g_ss - 1.0)


def green_matrix(gamma_i: float, gamma_s: float, delta: float, t: float,
                 omega_i: float = 0.0) -> np.ndarray:
    """Full 5x5 closed-form propagator ``exp(base_rate t)`` times the block
    pattern, directly comparable to the numerical propagation."""
    el = green_elements(gamma_i, gamma_s, delta, t)
    g = np.full((5, 5), el.g_ssp, dtype=complex)
    g[0, 0] = el.g_ii
    g[0, 1:] = el.g_is
    g[1:, 0] = np.conj(el.g_is)
    g[np.arange(1, 5), np.arange(1, 5)] = el.g_ss
    return np.exp((-gamma_s - 1j * omega_i) * t) * g


@dataclass(frozen=True)
class SteadyMoments:
    """Stationary populations and correlators of the driven system.

    ``n_ii``/``n_ss`` are the idler and per-signal populations, ``n_ssp``
    the signal-signal cross correlator ``<p_s^+ p_s'>``, and ``n_is`` the
    idler-signal pair correlator ``<p_i^+ p_s^+>`` (purely imaginary for a
    real pump amplitude).  ``n_ss - n_ssp`` always equals the background
    occupation.
    """

    n_ii: float
    n_ss: float
    n_ssp: float
    n_is: complex


def steady_moments(gamma_i: float, gamma_s: float, delta: float,
                   n_b: float = 0.0, guard: float = 1e-9) -> SteadyMoments:
    """Long-time moments of the continuously driven five-mode system.

    Requires a strictly stable drive, ``gamma_i * gamma_s - 4 delta^2 >
    guard``; near the boundary the closed forms diverge and are rejected
    rather than evaluated.
    """
    if gamma_i <= 0 or gamma_s <= 0:
        raise ValueError("damping rates must be positive")
    if n_b < 0:
        raise ValueError(f"n_b must be >= 0, got {n_b}")
    four_d2 = 4.0 * delta * delta
    margin = gamma_i * gamma_s - four_d2
    if margin <= guard:
        raise ValueError(
            f"stability condition violated: gamma_i*gamma_s - 4*delta^2 = {margin:.6g} "
            f"<= guard {guard:.1g}")
    total = gamma_i + gamma_s
    n_ii = (n_b * gamma_i / total * (gamma_s * total - four_d2) / margin
            + (n_b + 1.0) * gamma_s / total * four_d2 / margin)
    pumped = (n_b + 1.0) * gamma_i / total * delta * delta / margin
    backflow = n_b * gamma_s / (4.0 * total) * (gamma_i * total - four_d2) / margin
    n_ss = pumped + 0.75 * n_b + backflow
    n_ssp = pumped - 0.25 * n_b + backflow
    n_is = 1j * (2.0 * n_b + 1.0) * gamma_i * gamma_s * delta / (total * margin)
    return SteadyMoments(n_ii=n_ii, n_ss=n_ss, n_ssp=n_ssp, n_is=n_is)


def entanglement_weight(moments: SteadyMoments) -> float:
    """W-projector weight of the stationary reconstruction.

    ``(n_ii * n_ssp + |n_is|^2) / (n_ii * n_ss + |n_is|^2)``, in [0, 1] for
    physical inputs; equals 1 exactly when the background vanishes and 0 in
    the undriven limit with background.  The all-zero moment set (no drive,
    no background: nothing is emitted) has no defined weight and is
    rejected.
    """
    pair_sq = abs(moments.n_is) ** 2
    denom = moments.n_ii * moments.n_ss + pair_sq
    if denom <= 0.0:
        raise ValueError("no emission: W weight undefined for all-zero moments")
    return (moments.n_ii * moments.n_ssp + pair_sq) / denom
