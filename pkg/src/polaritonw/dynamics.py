"""Five-mode signal/idler Langevin dynamics.

The working vector is the doubled basis ``P = (p_i, p_s1^+, ..., p_s4^+)``:
slot 0 carries the idler annihilation operator, slots 1-4 the four signal
creation operators.  The drift matrix couples the idler to every signal
through the pump-pair amplitude while the signal-signal block stays
diagonal; damping enters as ``omega - i gamma`` on the diagonal.

All production numerics run in the pump rotating frame, where the drive
enters as the real coefficient ``delta(t) = g_pair * amplitude^2 *
envelope(t)^2`` and the carrier frequency drops out.  Populations,
signal-signal correlators, and all tomography products are frame
independent; the overall idler-frequency phase cancels in every quantity
used downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Callable, Optional, Sequence

import numpy as np

from .cavity import ParametricCoupling, PumpDrive, pump_amplitude
from .integrate import rk45

__all__ = [
    "Mode",
    "Drift",
    "NoiseModel",
    "Green",
    "MomentState",
    "TwoTimeCorrelators",
    "CorrelatorTables",
    "Stability",
    "thermal_occupation",
    "build_drift",
    "drift_source",
    "diffusion_matrix",
    "propagate_green",
    "propagate_moments",
    "two_time_correlators",
    "stability_check",
    "relax_to_steady",
    "correlator_tables",
    "stationary_tables",
]

N_MODES = 5

BOLTZMANN_MEV_PER_K = 0.08617333262  # meV per kelvin


class Mode(IntEnum):
    """Slot assignment of the doubled basis vector."""

    IDLER = 0
    S1 = 1
    S2 = 2
    S3 = 3
    S4 = 4


def thermal_occupation(energy_mev: float, temperature_k: float) -> float:
    """Bose occupation of a reservoir mode at ``energy_mev``."""
    if temperature_k <= 0.0:
        return 0.0
    x = energy_mev / (BOLTZMANN_MEV_PER_K * temperature_k)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class NoiseModel:
    """Reservoir damping and background occupation.

    ``gamma_i``/``gamma_s`` are half damping rates (the full loss rate of a
    mode is ``2 * gamma``).  ``n_b`` is a uniform background occupation; the
    pump-induced part is modeled as ``pl_coeff`` times the squared
    instantaneous drive strength times the thermal occupation of a single
    activation energy - a deliberately phenomenological stand-in for the
    microscopic photoluminescence channel.  For a pulsed drive that
    background rides the pulse and relaxes with the mode lifetime instead
    of filling the whole detection window.
    """

    gamma_i: float
    gamma_s: float
    n_b: float = 0.0
    temperature: float = 0.0
    activation_energy_mev: float = 5.0
    pl_coeff: float = 0.0

    def __post_init__(self):
        if not (self.gamma_i > 0 and math.isfinite(self.gamma_i)):
            raise ValueError(f"gamma_i must be positive and finite, got {self.gamma_i}")
        if not (self.gamma_s > 0 and math.isfinite(self.gamma_s)):
            raise ValueError(f"gamma_s must be positive and finite, got {self.gamma_s}")
        if not (self.n_b >= 0 and math.isfinite(self.n_b)):
            raise ValueError(f"n_b must be >= 0 and finite, got {self.n_b}")

    def background_occupation(self, delta_instant: float = 0.0) -> float:
        """Uniform plus pump-induced background at drive strength ``delta_instant``."""
        pumped = self.pl_coeff * delta_instant * delta_instant * thermal_occupation(
            self.activation_energy_mev, self.temperature)
        return self.n_b + pumped

    def effective(self, delta_instant: float = 0.0) -> "NoiseModel":
        """Fold the pump-induced background into a plain ``n_b`` model.

        Exact for a continuous drive, where the instantaneous drive strength
        is constant.
        """
        return replace(self, n_b=self.background_occupation(delta_instant), pl_coeff=0.0)

    @property
    def gammas(self) -> np.ndarray:
        return np.array([self.gamma_i] + [self.gamma_s] * 4)


@dataclass(frozen=True)
class Drift:
    """5x5 drift matrix of the doubled basis at one instant."""

    matrix: np.ndarray
    rotating_frame: bool


def _check_finite(**values):
    for name, val in values.items():
        if val is None:
            continue
        arr = np.asarray(val, dtype=complex)
        if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
            raise ValueError(f"{name} must be finite, got {val}")


def build_drift(coupling: ParametricCoupling, gamma_i: float, gamma_s: float,
                drive: Optional[PumpDrive] = None, t: float = 0.0,
                frame: str = "rotating", omega_i: float = 0.0,
                omega_s: float = 0.0) -> Drift:
    """Drift matrix of the doubled basis at time ``t``.

    ``frame='rotating'`` removes the pump carrier: the matrix has
    ``-gamma_i`` and ``-gamma_s`` on the diagonal, ``-i delta(t)`` on the
    idler row, ``+i delta(t)`` on the idler column, all shifted by
    ``-i omega_i`` times the identity; it is time independent for a
    continuous drive.  ``frame='lab'`` keeps the optical carrier and
    requires ``drive`` (for the complex pump amplitude) together with the
    bare ``omega_i`` and ``omega_s``.
    """
    _check_finite(g_pair=coupling.g_pair, delta=coupling.delta, gamma_i=gamma_i,
                  gamma_s=gamma_s, t=t, omega_i=omega_i, omega_s=omega_s)
    if gamma_i <= 0 or gamma_s <= 0:
        raise ValueError("damping rates must be positive")

    m = np.zeros((N_MODES, N_MODES), dtype=complex)
    if frame == "rotating":
        env = 1.0 if drive is None else float(drive.envelope(t))
        delta_t = coupling.delta * env * env
        m[0, 0] = -gamma_i
        m[1:, 1:] = -gamma_s * np.eye(4)
        m[0, 1:] = -1j * delta_t
        m[1:, 0] = 1j * delta_t
        m -= 1j * omega_i * np.eye(N_MODES)
        return Drift(matrix=m, rotating_frame=True)
    if frame == "lab":
        if drive is None:
            raise ValueError("lab-frame drift requires a drive")
        pump = complex(pump_amplitude(drive, t))
        pump_sq = coupling.g_pair * pump * pump
        m[0, 0] = -1j * (omega_i - 1j * gamma_i)
        m[1:, 1:] = 1j * np.conj(omega_s - 1j * gamma_s) * np.eye(4)
        m[0, 1:] = -1j * pump_sq
        m[1:, 0] = 1j * np.conj(pump_sq)
        return Drift(matrix=m, rotating_frame=False)
    raise ValueError(f"unknown frame {frame!r}")


def _envelope_sq(drive: Optional[PumpDrive]) -> Callable[[float], float]:
    """Fast scalar closure for the squared drive envelope."""
    if drive is None or drive.kind == "continuous":
        return lambda t: 1.0
    t_c, sigma = drive.t0, drive.sigma

    def env_sq(t: float) -> float:
        arg = (t - t_c) / sigma
        return math.exp(-arg * arg)

    return env_sq


def drift_source(coupling: ParametricCoupling, gamma_i: float, gamma_s: float,
                 drive: Optional[PumpDrive] = None, frame: str = "rotating",
                 omega_i: float = 0.0, omega_s: float = 0.0) -> Callable[[float], np.ndarray]:
    """Return ``t -> drift matrix`` for the requested frame and drive.

    Inputs are validated once up front; the returned closure only rewrites
    the time-dependent entries, since it sits in the integrator's inner
    loop.
    """
    if frame == "rotating":
        if drive is None or drive.kind == "continuous":
            constant = build_drift(coupling, gamma_i, gamma_s, drive=None,
                                   frame="rotating", omega_i=omega_i).matrix
            return lambda t: constant
        base = build_drift(coupling, gamma_i, gamma_s, drive=drive, t=drive.t0,
                           frame="rotating", omega_i=omega_i).matrix
        base[0, 1:] = 0.0
        base[1:, 0] = 0.0
        delta_peak = coupling.delta
        env_sq = _envelope_sq(drive)

        def source(t: float) -> np.ndarray:
            delta_t = delta_peak * env_sq(t)
            m = base.copy()
            m[0, 1:] = -1j * delta_t
            m[1:, 0] = 1j * delta_t
            return m

        return source

    build_drift(coupling, gamma_i, gamma_s, drive=drive, t=0.0, frame=frame,
                omega_i=omega_i, omega_s=omega_s)  # validate once

    def lab_source(t: float) -> np.ndarray:
        return build_drift(coupling, gamma_i, gamma_s, drive=drive, t=t,
                           frame=frame, omega_i=omega_i, omega_s=omega_s).matrix

    return lab_source


def diffusion_matrix(noise: NoiseModel):
    """Normal- and anti-normal-ordered noise correlator strengths.

    Returns the diagonal 5x5 matrices ``<F^+ F>`` with entries
    ``n_b * Gamma_x`` and ``<F F^+>`` with entries ``(n_b + 1) * Gamma_x``,
    where ``Gamma_x = 2 * gamma_x``.  Cross-mode and anomalous noise
    correlators vanish identically.
    """
    big_gamma = 2.0 * noise.gammas
    normal = np.diag(noise.n_b * big_gamma).astype(complex)
    antinormal = np.diag((noise.n_b + 1.0) * big_gamma).astype(complex)
    return normal, antinormal


@dataclass(frozen=True)
class Green:
    """Propagator of the doubled basis from ``t_start`` to ``t_end``."""

    matrix: np.ndarray
    t_start: float
    t_end: float


def propagate_green(source: Callable[[float], np.ndarray], t_start: float,
                    t_end: float, rtol: float = 1e-9, atol: float = 1e-12,
                    t_eval: Optional[Sequence[float]] = None):
    """Solve ``dG/dt = M(t) G`` with ``G(t_start) = I``.

    With ``t_eval`` given, returns one :class:`Green` per requested time
    (steps land exactly on those times); otherwise the single propagator to
    ``t_end``.  For a time-independent rotating-frame matrix this agrees
    with the matrix exponential of ``M (t_end - t_start)``.
    """
    if t_end < t_start:
        raise ValueError(f"propagation must run forward: t_end={t_end} < t_start={t_start}")
    eye = np.eye(N_MODES, dtype=complex)
    if t_end == t_start and t_eval is None:
        return Green(matrix=eye, t_start=t_start, t_end=t_end)

    def rhs(t, g):
        return source(t) @ g

    if t_eval is None:
        final = rk45(rhs, eye, t_start, t_end, rtol=rtol, atol=atol)
        return Green(matrix=final, t_start=t_start, t_end=t_end)
    samples = rk45(rhs, eye, t_start, t_end, rtol=rtol, atol=atol, t_eval=t_eval)
    return [Green(matrix=g, t_start=t_start, t_end=float(tv))
            for g, tv in zip(samples, t_eval)]


@dataclass(frozen=True)
class MomentState:
    """Equal-time second moments in the physical five-mode basis.

    ``normal[x, y] = <p_x^+ p_y>`` (Hermitian, nonnegative diagonal) and
    ``anomalous[x, y] = <p_x p_y>`` (symmetric).  Mode order follows
    :class:`Mode`.
    """

    normal: np.ndarray
    anomalous: np.ndarray
    t: float

    @classmethod
    def vacuum(cls, t: float = 0.0) -> "MomentState":
        z = np.zeros((N_MODES, N_MODES), dtype=complex)
        return cls(normal=z, anomalous=z.copy(), t=t)


def _split_doubled(m: np.ndarray):
    """Annihilation-sector (alpha) and pair-creation (beta) blocks of a
    doubled-basis drift matrix."""
    alpha = np.zeros((N_MODES, N_MODES), dtype=complex)
    beta = np.zeros((N_MODES, N_MODES), dtype=complex)
    alpha[0, 0] = m[0, 0]
    alpha[1:, 1:] = np.conj(m[1:, 1:])
    beta[0, 1:] = m[0, 1:]
    beta[1:, 0] = np.conj(m[1:, 0])
    return alpha, beta


def propagate_moments(initial: Optional[MomentState],
                      source: Callable[[float], np.ndarray],
                      noise: NoiseModel, t_grid: Sequence[float],
                      rtol: float = 1e-9, atol: float = 1e-12,
                      background: Optional[Callable[[float], float]] = None) -> list:
    """Propagate the equal-time second moments along ``t_grid``.

    The moment matrices obey a closed linear ODE: the drift acts from the
    left and right while the normal block receives the normal-ordered
    diffusion inflow and the anomalous block the spontaneous pair seed.
    ``background`` optionally adds a time-dependent occupation on top of
    ``noise.n_b`` (the pump-induced channel).  Starting state defaults to
    vacuum at ``t_grid[0]``.
    """
    t_grid = [float(t) for t in t_grid]
    if initial is None:
        initial = MomentState.vacuum(t=t_grid[0])
    if abs(initial.t - t_grid[0]) > 1e-12 * max(1.0, abs(t_grid[0])):
        raise ValueError(f"initial state at t={initial.t} does not match grid start {t_grid[0]}")

    d_normal, _ = diffusion_matrix(noise)
    big_gamma = np.diag(2.0 * noise.gammas).astype(complex)
    eye = np.eye(N_MODES, dtype=complex)

    def rhs(t, y):
        alpha, beta = _split_doubled(source(t))
        n, a = y[0], y[1]
        inflow = d_normal if background is None else d_normal + background(t) * big_gamma
        dn = (np.conj(alpha) @ n + n @ alpha.T
              + np.conj(beta) @ a + np.conj(a) @ beta.T + inflow)
        da = alpha @ a + a @ alpha.T + beta @ n + (n.T + eye) @ beta.T
        return np.stack([dn, da])

    y0 = np.stack([initial.normal.astype(complex), initial.anomalous.astype(complex)])
    samples = rk45(rhs, y0, t_grid[0], t_grid[-1], rtol=rtol, atol=atol, t_eval=t_grid)
    return [MomentState(normal=s[0], anomalous=s[1], t=tv)
            for s, tv in zip(samples, t_grid)]


@dataclass(frozen=True)
class TwoTimeCorrelators:
    """Second moments between ``t_early`` and ``t_late >= t_early``.

    ``pair_anomalous[m] = <p_i^+(t_early) p_sm^+(t_late)>`` for the four
    signals; ``normal[x, y] = <p_x^+(t_early) p_y(t_late)>`` over all five
    modes.
    """

    t_early: float
    t_late: float
    pair_anomalous: np.ndarray
    normal: np.ndarray


def two_time_correlators(moments: MomentState, green: Green) -> TwoTimeCorrelators:
    """Correlators between the moment time and the later Green time.

    Noise with support after ``t_early`` has zero mean and no correlation
    with the earlier operators, so the later-time operator is just the
    propagated earlier one: each correlator is the Green matrix applied to
    the matching equal-time moment vector.  At coincidence this reduces to
    the :class:`MomentState` entries.
    """
    if abs(green.t_start - moments.t) > 1e-9 * max(1.0, abs(moments.t)):
        raise ValueError(
            f"Green start {green.t_start} does not match moment time {moments.t}")
    if green.t_end < green.t_start:
        raise ValueError(f"need t_late >= t_early, got {green.t_end} < {green.t_start}")

    n, a = moments.normal, moments.anomalous
    g = green.matrix

    # <p_x^+(t1) P_c(t1)> stacked over x as columns.
    u = np.empty((N_MODES, N_MODES), dtype=complex)
    u[0, :] = n[:, 0]
    u[1:, :] = np.conj(a[:, 1:]).T
    gu = g @ u

    # <P_d(t1) p_x(t1)> stacked over x as columns.
    w = np.empty((N_MODES, N_MODES), dtype=complex)
    w[0, :] = a[0, :]
    w[1:, :] = n[1:, :]
    gw = g @ w

    normal = np.empty((N_MODES, N_MODES), dtype=complex)
    normal[:, 0] = gu[0, :]
    normal[:, 1:] = np.conj(gw[1:, :]).T
    return TwoTimeCorrelators(t_early=moments.t, t_late=green.t_end,
                              pair_anomalous=gu[1:, 0].copy(), normal=normal)


@dataclass(frozen=True)
class Stability:
    stable: bool
    margin: float


def stability_check(gamma_i: float, gamma_s: float, delta: float) -> Stability:
    """Long-time convergence criterion ``gamma_i * gamma_s > 4 * delta^2``.

    The margin is ``gamma_i * gamma_s - 4 delta^2``; the boundary itself is
    reported unstable.  The sign of the margin matches the sign of the
    largest real part of the rotating-frame drift spectrum.
    """
    margin = gamma_i * gamma_s - 4.0 * delta * delta
    return Stability(stable=margin > 0.0, margin=margin)


def relax_to_steady(coupling: ParametricCoupling, noise: NoiseModel,
                    omega_i: float = 0.0, rtol: float = 1e-9,
                    atol: float = 1e-12, horizon: float = 0.0) -> MomentState:
    """Propagate a continuous drive from vacuum until the moments settle.

    The slowest moment transient decays at ``gamma_i + gamma_s - Omega``
    with ``Omega = sqrt((gamma_i - gamma_s)^2 + 16 delta^2)``; the default
    horizon covers both that rate and plain thermal relaxation with a wide
    safety factor.
    """
    st = stability_check(noise.gamma_i, noise.gamma_s, coupling.delta)
    if not st.stable:
        raise ValueError(
            f"no steady state: gamma_i*gamma_s - 4*delta^2 = {st.margin:.6g} <= 0")
    if horizon <= 0.0:
        omega = math.hypot(noise.gamma_i - noise.gamma_s, 4.0 * coupling.delta)
        rate = noise.gamma_i + noise.gamma_s - omega
        horizon = max(40.0 / min(noise.gamma_i, noise.gamma_s), 22.0 / rate)
    source = drift_source(coupling, noise.gamma_i, noise.gamma_s,
                          frame="rotating", omega_i=omega_i)
    return propagate_moments(None, source, noise, [0.0, horizon],
                             rtol=rtol, atol=atol)[-1]


@dataclass(frozen=True)
class CorrelatorTables:
    """Everything the tomography integral needs on a detection grid.

    ``pair_anomalous[j, k, m] = <p_i^+(t_j) p_sm^+(t_k)>`` over the full
    two-time square; ``idler_population[j]`` and ``signal_normal[j, m, n] =
    <p_sm^+ p_sn>(t_j)`` are the equal-time normal moments.
    """

    times: np.ndarray
    idler_population: np.ndarray
    signal_normal: np.ndarray
    pair_anomalous: np.ndarray


def correlator_tables(coupling: ParametricCoupling, noise: NoiseModel,
                      drive: PumpDrive, t_grid: Sequence[float],
                      omega_i: float = 0.0, rtol: float = 1e-9,
                      atol: float = 1e-12) -> CorrelatorTables:
    """Build the two-time correlator tables for a pulsed (or any) drive.

    Equal-time moments are propagated once along the grid; per-interval
    propagators then advance the two-time correlators column by column, so
    the table costs one sweep of 5x5 products per later-time node instead
    of a fresh integration per pair.  The pump-induced background of the
    noise model follows the squared instantaneous drive strength.
    """
    times = np.asarray([float(t) for t in t_grid])
    n_t = times.size
    if n_t < 2:
        raise ValueError("need at least two grid times")

    source = drift_source(coupling, noise.gamma_i, noise.gamma_s, drive=drive,
                          frame="rotating", omega_i=omega_i)
    background = None
    pumped_scale = noise.pl_coeff * thermal_occupation(
        noise.activation_energy_mev, noise.temperature)
    if pumped_scale > 0.0:
        env_sq = _envelope_sq(drive)
        delta_peak = coupling.delta

        def background(t: float) -> float:
            delta_t = delta_peak * env_sq(t)
            return pumped_scale * delta_t * delta_t

    moments = propagate_moments(None, source, noise, times, rtol=rtol, atol=atol,
                                background=background)
    normals = np.stack([m.normal for m in moments])
    anoms = np.stack([m.anomalous for m in moments])

    steps = [propagate_green(source, times[j], times[j + 1], rtol=rtol, atol=atol).matrix
             for j in range(n_t - 1)]

    # <p_i^+(t) P_c(t)> per grid node (columns of the forward march).
    u = np.empty((n_t, N_MODES), dtype=complex)
    u[:, 0] = normals[:, 0, 0]
    u[:, 1:] = np.conj(anoms[:, 0, 1:])
    # <P_c^+(t) p_sm^+(t)> per grid node, for the reversed-order triangle.
    v = np.empty((n_t, N_MODES, 4), dtype=complex)
    v[:, 0, :] = np.conj(anoms[:, 0, 1:])
    v[:, 1:, :] = normals[:, 1:, 1:].transpose(0, 2, 1) + np.eye(4)

    pair = np.empty((n_t, n_t, 4), dtype=complex)
    act = np.empty((n_t, N_MODES, N_MODES), dtype=complex)  # G(t_j, t_k) for k <= j
    for j in range(n_t):
        if j:
            act[:j] = steps[j - 1] @ act[:j]
        act[j] = np.eye(N_MODES)
        # later time on the signal side: t_early = t_k, t_late = t_j
        pair[: j + 1, j, :] = np.einsum("kcd,kd->kc", act[: j + 1], u[: j + 1])[:, 1:]
        if j:
            # later time on the idler side: t_early = t_k, t_late = t_j
            pair[j, :j, :] = np.einsum("kc,kcm->km", np.conj(act[:j, 0, :]), v[:j])

    return CorrelatorTables(times=times, idler_population=normals[:, 0, 0].real,
                            signal_normal=normals[:, 1:, 1:], pair_anomalous=pair)


def stationary_tables(moments: MomentState, t_d: float, steps: int = 8) -> CorrelatorTables:
    """Constant correlator tables for a stationary (continuous-drive) state.

    In the long-time limit the equal-time moments are time independent and
    the reconstruction uses their stationary values across the whole
    detection window, which collapses the double integral to the
    closed-form population/correlator ratios.
    """
    if t_d <= 0 or steps < 1:
        raise ValueError("need t_d > 0 and steps >= 1")
    times = np.linspace(0.0, t_d, steps + 1)
    here = two_time_correlators(
        moments, Green(matrix=np.eye(N_MODES, dtype=complex),
                       t_start=moments.t, t_end=moments.t))
    n_t = times.size
    idler = np.full(n_t, moments.normal[0, 0].real)
    signal = np.broadcast_to(moments.normal[1:, 1:], (n_t, 4, 4)).copy()
    pair = np.broadcast_to(here.pair_anomalous, (n_t, n_t, 4)).copy()
    return CorrelatorTables(times=times, idler_population=idler,
                            signal_normal=signal, pair_anomalous=pair)
