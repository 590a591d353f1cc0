"""Coincidence tomography of the post-selected idler/signal photon state.

Post-selecting on an idler click leaves a 4x4 density matrix over the
one-photon-per-channel basis (idler, signal m).  Its matrix elements are
double time integrals over the detection window of the Gaussian-factorized
fourth-order correlator: an uncorrelated populations product plus the
squared idler-signal pair correlation.  The reconstructed matrix is then
decomposed as a mixture of the flat W projector and the maximally mixed
state, with a single weight as the entanglement figure of merit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import CorrelatorTables

__all__ = [
    "DensityMatrix4",
    "WMixture",
    "RhoDiagnostics",
    "ReconstructionError",
    "W_PROJECTOR",
    "trapezoid_weights",
    "reconstruct_rho",
    "fit_w_mixture",
    "validate_rho",
]

# Flat projector of the symmetric shared-excitation state of four channels.
W_PROJECTOR = np.full((4, 4), 0.25)


class ReconstructionError(ValueError):
    """The correlator tables carry no emission; the state is undefined."""


@dataclass(frozen=True)
class DensityMatrix4:
    """Reconstructed signal/idler density matrix and its normalization."""

    matrix: np.ndarray
    norm: float


@dataclass(frozen=True)
class WMixture:
    """W-plus-identity decomposition of a reconstructed state.

    ``w_weight`` is the W-projector fraction clamped to [0, 1], ``w_raw``
    the unclamped least-squares value, ``residual`` the Frobenius distance
    to the fitted form (``residual_rel`` relative to the state norm), and
    ``form_ok`` whether the state is of the mixture form within the
    configured threshold.
    """

    w_weight: float
    w_raw: float
    residual: float
    residual_rel: float
    form_ok: bool


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    """Composite-trapezoid quadrature weights for a strictly increasing grid."""
    diffs = np.diff(times)
    if times.size < 2 or np.any(diffs <= 0):
        raise ValueError("detection grid must be strictly increasing with >= 2 points")
    w = np.zeros_like(times)
    w[:-1] += 0.5 * diffs
    w[1:] += 0.5 * diffs
    return w


def reconstruct_rho(tables: CorrelatorTables) -> DensityMatrix4:
    """Density matrix from the correlator tables by trapezoid quadrature.

    Entry (m, n) integrates ``<p_i^+ p_i>(t1) <p_sm^+ p_sn>(t2)`` plus the
    pair product ``<p_i^+(t1) p_sm^+(t2)> <p_sn(t2) p_i(t1)>`` over the full
    two-time square, then normalizes to unit trace.  Rows and columns of
    the quadrature are summed in fixed order, so the result is bitwise
    reproducible.
    """
    w = trapezoid_weights(tables.times)
    idler_sum = float(w @ tables.idler_population)
    signal_sum = np.einsum("j,jmn->mn", w, tables.signal_normal)
    uncorrelated = idler_sum * signal_sum

    sq = np.sqrt(w)
    weighted = tables.pair_anomalous * sq[:, None, None] * sq[None, :, None]
    paired = np.einsum("jkm,jkn->mn", weighted, np.conj(weighted))

    raw = uncorrelated + paired
    trace = float(np.trace(raw).real)
    if trace <= 0.0 or not math.isfinite(trace):
        raise ReconstructionError("zero emission over the detection window")
    return DensityMatrix4(matrix=raw / trace, norm=trace)


def fit_w_mixture(rho: DensityMatrix4, residual_threshold: float = 1e-3,
                  weight_tol: float = 1e-6) -> WMixture:
    """Least-squares weight of the W projector in a trace-one mixture.

    With the trace fixed, the mixture has a single free parameter; its
    least-squares value is the mean real part of the off-diagonal entries
    times 4/3.  The fit is flagged (``form_ok=False``) when the relative
    residual exceeds ``residual_threshold`` or the raw weight leaves
    ``[-weight_tol, 1 + weight_tol]``.
    """
    m = rho.matrix
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    off_sum = float(np.sum(m).real - np.trace(m).real)
    w_raw = off_sum / 3.0

    fitted = w_raw * W_PROJECTOR + (1.0 - w_raw) * np.eye(4) / 4.0
    residual = float(np.linalg.norm(m - fitted))
    norm = float(np.linalg.norm(m))
    residual_rel = residual / norm if norm > 0 else math.inf

    in_range = -weight_tol <= w_raw <= 1.0 + weight_tol
    form_ok = residual_rel <= residual_threshold and in_range
    w_weight = min(1.0, max(0.0, w_raw))
    return WMixture(w_weight=w_weight, w_raw=w_raw, residual=residual,
                    residual_rel=residual_rel, form_ok=form_ok)


@dataclass(frozen=True)
class RhoDiagnostics:
    """Defect report for a reconstructed density matrix.

    ``diag_spread``/``offdiag_spread`` measure how far the entries deviate
    from the permutation symmetry of the four signal channels (all
    diagonals equal, all off-diagonals equal), which the mixture form
    requires.
    """

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    diag_spread: float
    offdiag_spread: float


def validate_rho(rho: DensityMatrix4) -> RhoDiagnostics:
    """Diagnostic-only checks; never raises.

    Spreads are the largest pairwise distance within the diagonal and
    off-diagonal entry sets, so a single perturbed entry is reported at its
    full size.
    """
    m = rho.matrix
    herm = float(np.max(np.abs(m - m.conj().T)))
    trace = float(abs(np.trace(m) - 1.0))
    eigs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    diag = np.diag(m).real
    off = m[~np.eye(4, dtype=bool)]
    return RhoDiagnostics(
        hermiticity_defect=herm,
        trace_defect=trace,
        min_eigenvalue=float(eigs[0]),
        diag_spread=float(diag.max() - diag.min()),
        offdiag_spread=float(np.max(np.abs(off[:, None] - off[None, :]))),
    )
