"""Cavity parameters, polariton basis, pump geometry, and drive envelopes.

Units: hbar = 1, frequencies and rates in rad/ps, times in ps, in-plane wave
vectors in inverse micrometers.  Pump amplitudes are dimensionless; the
density normalization is absorbed into ``n_sat`` and ``v_xx`` so that only
the product ``delta = g_pair * amplitude**2`` matters downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "CavityParams",
    "HopfieldModes",
    "PumpGeometry",
    "PumpDrive",
    "ParametricCoupling",
    "PhaseMatch",
    "GeometryError",
    "parabolic_dispersion",
    "hopfield_diagonalize",
    "parametric_coupling",
    "pump_amplitude",
    "validate_geometry",
]

# A dispersion is either a flat value or a callable of the in-plane k vector.
Dispersion = Union[float, Callable[[Sequence[float]], float]]


def parabolic_dispersion(omega0: float, curvature: float) -> Callable[[Sequence[float]], float]:
    """Return ``omega(k) = omega0 + curvature * |k|^2`` (rad/ps)."""

    def omega(k: Sequence[float]) -> float:
        kx, ky = float(k[0]), float(k[1])
        return omega0 + curvature * (kx * kx + ky * ky)

    return omega


def _eval_dispersion(disp: Dispersion, k: Sequence[float]) -> float:
    if callable(disp):
        return float(disp(k))
    return float(disp)


@dataclass(frozen=True)
class CavityParams:
    """Bare exciton/photon inputs of the coupled cavity.

    ``omega_c`` and ``omega_x`` may be plain numbers (flat dispersion) or
    callables of the in-plane wave vector; only the handful of mode points
    actually used by a run are ever evaluated.

    Attributes
    ----------
    omega_c : float or callable
        Cavity-photon frequency (rad/ps).
    omega_x : float or callable
        Exciton frequency (rad/ps).
    omega_r : float
        Exciton-photon (Rabi) coupling, half the zero-detuning branch
        splitting (rad/ps).
    n_sat : float
        Exciton saturation density in the chosen normalization.
    v_xx : float
        Exciton-exciton interaction strength (rad/ps per unit density).
    """

    omega_c: Dispersion
    omega_x: Dispersion
    omega_r: float
    n_sat: float
    v_xx: float

    def __post_init__(self):
        if not (self.omega_r > 0 and math.isfinite(self.omega_r)):
            raise ValueError(f"omega_r must be positive and finite, got {self.omega_r}")
        if not (self.n_sat > 0 and math.isfinite(self.n_sat)):
            raise ValueError(f"n_sat must be positive and finite, got {self.n_sat}")
        if not math.isfinite(self.v_xx):
            raise ValueError(f"v_xx must be finite, got {self.v_xx}")


@dataclass(frozen=True)
class HopfieldModes:
    """Polariton branches at one wave vector.

    ``x_*`` are exciton fractions, ``c_*`` photon fractions; each branch
    satisfies ``x**2 + c**2 == 1`` and ``x >= 0`` by convention.
    """

    omega_lower: float
    omega_upper: float
    x_lower: float
    c_lower: float
    x_upper: float
    c_upper: float


def hopfield_diagonalize(params: CavityParams, k: Sequence[float] = (0.0, 0.0)) -> HopfieldModes:
    """Diagonalize the linear exciton-photon block at wave vector ``k``.

    The 2x2 single-particle matrix in the (exciton, photon) basis is
    ``[[omega_x, -omega_r], [-omega_r, omega_c]]``; its orthonormal
    eigenvectors are the lower/upper polariton modes.  At zero detuning the
    branch splitting is exactly ``2 * omega_r``.
    """
    omega_c = _eval_dispersion(params.omega_c, k)
    omega_x = _eval_dispersion(params.omega_x, k)
    if not (math.isfinite(omega_c) and math.isfinite(omega_x)):
        raise ValueError("mode frequencies must be finite")

    mean = 0.5 * (omega_c + omega_x)
    half_det = 0.5 * (omega_c - omega_x)
    root = math.hypot(half_det, params.omega_r)

    omega_lower = mean - root
    omega_upper = mean + root

    # Lower-branch eigenvector: (omega_x - omega_lower) x = omega_r c.
    x_lo = params.omega_r
    c_lo = omega_x - omega_lower  # = root - half_det >= 0
    norm = math.hypot(x_lo, c_lo)
    x_lo, c_lo = x_lo / norm, c_lo / norm
    # Upper branch is the orthogonal complement with x >= 0.
    x_up, c_up = c_lo, -x_lo
    if x_up < 0:
        x_up, c_up = -x_up, -c_up

    return HopfieldModes(omega_lower, omega_upper, x_lo, c_lo, x_up, c_up)


@dataclass(frozen=True)
class ParametricCoupling:
    """Pair-scattering coupling ``g_pair`` and drive strength ``delta``.

    ``delta = g_pair * amplitude**2`` is the only combination the five-mode
    dynamics depends on for a continuous drive.
    """

    g_pair: float
    delta: float

    @classmethod
    def from_delta(cls, delta: float) -> "ParametricCoupling":
        """Coupling for a unit-amplitude drive with the given ``delta``."""
        return cls(g_pair=delta, delta=delta)

    @classmethod
    def from_g_pair(cls, g_pair: float, amplitude: float) -> "ParametricCoupling":
        return cls(g_pair=g_pair, delta=g_pair * amplitude * amplitude)


def parametric_coupling(x_idler: float, x_signal: float, x_pump: float,
                        c_pump: float, params: CavityParams) -> float:
    """Pair-production coupling of the pumped idler/signal system.

    ``2 * x_i * x_s * x_p * (omega_r / n_sat * c_p + v_xx * x_p)``; symmetric
    under exchange of the idler and signal exciton fractions.
    """
    for name, val in (("x_idler", x_idler), ("x_signal", x_signal),
                      ("x_pump", x_pump), ("c_pump", c_pump)):
        if not -1.0 <= val <= 1.0:
            raise ValueError(f"{name} must lie in [-1, 1], got {val}")
    return 2.0 * x_idler * x_signal * x_pump * (
        params.omega_r / params.n_sat * c_pump + params.v_xx * x_pump)


@dataclass(frozen=True)
class PumpDrive:
    """Semiclassical pump field.

    ``kind='continuous'`` gives ``amplitude * exp(-i omega_p t)``;
    ``kind='gaussian'`` multiplies in the envelope
    ``exp(-(t - t0)^2 / (2 sigma^2))``.  ``sigma`` is the standard deviation
    of the *amplitude* envelope (a deliberate, configurable convention).
    """

    kind: str
    amplitude: float
    omega_p: float = 0.0
    t0: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("continuous", "gaussian"):
            raise ValueError(f"unknown drive kind {self.kind!r}")
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be >= 0 and finite, got {self.amplitude}")
        if self.kind == "gaussian" and not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive for a gaussian drive, got {self.sigma}")

    def envelope(self, t):
        """Real envelope factor in [0, 1]; vectorizes over ``t``."""
        if self.kind == "continuous":
            return np.ones_like(np.asarray(t, dtype=float))
        arg = (np.asarray(t, dtype=float) - self.t0) / self.sigma
        return np.exp(-0.5 * arg * arg)


def pump_amplitude(drive: PumpDrive, t):
    """Complex pump amplitude at time ``t`` (ps); vectorizes over ``t``."""
    t = np.asarray(t, dtype=float)
    return drive.amplitude * drive.envelope(t) * np.exp(-1j * drive.omega_p * t)


@dataclass(frozen=True)
class PumpGeometry:
    """Four-pump arrangement with a shared idler at the zone center.

    Pumps sit at the corners ``(+-k_p, +-k_p)``; the four signal modes at
    ``(0, +-2 k_p)`` and ``(+-2 k_p, 0)`` each take the total momentum of one
    neighboring pump pair, with the idler at ``(0, 0)``.
    """

    k_p: float
    pump_k: tuple = ()
    signal_k: tuple = ()
    idler_k: tuple = (0.0, 0.0)

    @classmethod
    def square(cls, k_p: float) -> "PumpGeometry":
        if not (k_p > 0 and math.isfinite(k_p)):
            raise ValueError(f"k_p must be positive and finite, got {k_p}")
        pumps = ((k_p, k_p), (-k_p, k_p), (-k_p, -k_p), (k_p, -k_p))
        signals = ((0.0, 2 * k_p), (-2 * k_p, 0.0), (0.0, -2 * k_p), (2 * k_p, 0.0))
        return cls(k_p=k_p, pump_k=pumps, signal_k=signals)


@dataclass(frozen=True)
class PhaseMatch:
    """One momentum-conserving pump-pair process.

    ``kind='signal'`` means the pair feeds (signal ``signal_index``, idler);
    ``kind='idler-pair'`` marks an opposite-corner pair whose total momentum
    is twice the idler momentum.  Only the signal processes survive the
    energy selection and enter the drift matrix.
    """

    pump_pair: tuple
    kind: str
    signal_index: int = field(default=-1)
    k_total: tuple = (0.0, 0.0)


class GeometryError(ValueError):
    """Pump/signal/idler arrangement violates momentum conservation."""


def validate_geometry(geom: PumpGeometry, tol: float = 1e-9) -> list:
    """Classify every unordered pump pair by its total in-plane momentum.

    Each pair must either sum to twice the idler momentum (opposite corners)
    or to ``idler + signal`` for exactly one signal mode with
    ``|k_signal| = 2 k_p``.  Raises :class:`GeometryError` otherwise.
    """
    if len(geom.pump_k) != 4 or len(geom.signal_k) != 4:
        raise GeometryError("geometry needs four pump and four signal modes")

    pumps = [np.asarray(k, dtype=float) for k in geom.pump_k]
    signals = [np.asarray(k, dtype=float) for k in geom.signal_k]
    idler = np.asarray(geom.idler_k, dtype=float)
    scale = max(1.0, 2.0 * abs(geom.k_p))

    for n, k_s in enumerate(signals, start=1):
        if abs(np.hypot(*k_s) - 2.0 * geom.k_p) > tol * scale:
            raise GeometryError(
                f"signal {n} at {tuple(k_s)} is off the |k| = 2 k_p ring")

    processes = []
    for n in range(4):
        for m in range(n + 1, 4):
            total = pumps[n] + pumps[m]
            if np.max(np.abs(total - 2.0 * idler)) <= tol * scale:
                processes.append(PhaseMatch(pump_pair=(n + 1, m + 1), kind="idler-pair",
                                            k_total=tuple(total)))
                continue
            matches = [s for s, k_s in enumerate(signals)
                       if np.max(np.abs(total - (idler + k_s))) <= tol * scale]
            if len(matches) != 1:
                raise GeometryError(
                    f"pump pair ({n + 1}, {m + 1}) with total momentum {tuple(total)} "
                    "does not match the idler plus exactly one signal mode")
            processes.append(PhaseMatch(pump_pair=(n + 1, m + 1), kind="signal",
                                        signal_index=matches[0] + 1, k_total=tuple(total)))

    fed = sorted(p.signal_index for p in processes if p.kind == "signal")
    if fed != [1, 2, 3, 4]:
        raise GeometryError(f"signal modes fed by pump pairs are {fed}, expected [1, 2, 3, 4]")
    return processes
