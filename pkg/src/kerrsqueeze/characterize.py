"""Inverse problems: parameter fits and measurement trace reduction.

Covers the classical characterization workflow: fit the linear resonance
lineshape for (omega_r, kappa, gamma), fit the power-dependent resonance
shift for the summed per-photon gain, invert the threshold power for the
Kerr gain alone, fit mode dispersion coefficients, and reduce zero-span
homodyne traces to squeezing / anti-squeezing dB values.

Only the SUM g_opt + g_th is identifiable from classical transmission
traces (the classical detuning shift depends on nothing else), so the shift
fitter returns that sum and the Kerr part must come from the threshold
route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import least_squares

from .core import HBAR, PumpConfig, ResonatorParams, omega_from_wavelength
from .errors import (
    Degenerate,
    EmptyTrace,
    MetadataMismatch,
    NoDip,
    NonPositive,
    PoorFit,
    RankDeficient,
)
from .steady_state import sweep


@dataclass(frozen=True)
class TransmissionTrace:
    """Sampled transmission against pump frequency (absolute or detuning).

    ``freq`` may be the absolute pump frequency or the detuning from a
    nominal resonance, both in rad/s; fitted centers come back in the same
    coordinates. For shift fitting the axis must be the detuning from the
    cold resonance found by the linear fit.
    """

    freq: np.ndarray
    transmission: np.ndarray
    p_in: float = 0.0
    direction: str = "down"

    def __post_init__(self) -> None:
        freq = np.asarray(self.freq, dtype=float)
        trans = np.asarray(self.transmission, dtype=float)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "transmission", trans)
        if freq.ndim != 1 or freq.shape != trans.shape:
            raise ValueError("freq and transmission must be 1-d and equal length")
        if freq.size > 1:
            steps = np.diff(freq)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError("frequency axis must be strictly monotone")


@dataclass(frozen=True)
class ResonanceList:
    """Measured resonance frequencies per relative mode number."""

    entries: Tuple[Tuple[int, float], ...]

    def __post_init__(self) -> None:
        entries = tuple((int(m), float(w)) for m, w in self.entries)
        object.__setattr__(self, "entries", entries)
        mus = [m for m, _ in entries]
        if len(set(mus)) != len(mus):
            raise ValueError("mode numbers must be distinct")


@dataclass(frozen=True)
class ZeroSpanTrace:
    """Spectrum-analyzer noise power against time at a fixed frequency."""

    t: np.ndarray
    power_dbm: np.ndarray
    center_hz: float
    rbw_hz: float
    vbw_hz: float

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.power_dbm, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "power_dbm", p)
        if t.ndim != 1 or t.shape != p.shape:
            raise ValueError("t and power_dbm must be 1-d and equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("time axis must be strictly monotone")


class ResonanceFit(NamedTuple):
    omega_r: float
    kappa: float
    gamma: float
    residual: float


class DispersionFit(NamedTuple):
    omega_0: float
    d1: float
    d2: float
    d_int: np.ndarray


def _lineshape(freq: np.ndarray, center: float, kappa: float, gamma: float) -> np.ndarray:
    d = freq - center
    num = (kappa - gamma) ** 2 / 4.0 + d * d
    den = (kappa + gamma) ** 2 / 4.0 + d * d
    return num / den


def fit_linear_resonance(
    trace: TransmissionTrace,
    coupling_regime: str,
    *,
    max_residual: float = 0.05,
) -> ResonanceFit:
    """Least-squares fit of the linear-cavity lineshape.

    The lineshape only determines |kappa - gamma| and kappa + gamma; the
    caller's ``coupling_regime`` ("over": kappa > gamma, "under": kappa <
    gamma) picks the physical assignment. ``residual`` is the 2-norm of the
    misfit relative to the 2-norm of the data.

    Raises NoDip when the trace never dips below 0.95 and PoorFit when the
    converged relative residual exceeds ``max_residual`` or the parameters
    come out unphysical.
    """
    if coupling_regime not in ("over", "under"):
        raise ValueError(f"coupling_regime must be 'over' or 'under', got {coupling_regime!r}")
    if trace.freq.size == 0:
        raise EmptyTrace("transmission trace has no samples")
    if trace.freq.size < 4:
        raise ValueError("need at least 4 samples to fit 3 parameters")
    data = trace.transmission
    if float(np.min(data)) > 0.95:
        raise NoDip(f"no resonance dip: min transmission {np.min(data):.4f} > 0.95")

    i0 = int(np.argmin(data))
    center0 = float(trace.freq[i0])
    depth = 1.0 - float(data[i0])
    below = np.flatnonzero(data < float(data[i0]) + 0.5 * depth)
    width = abs(float(trace.freq[below[-1]] - trace.freq[below[0]]))
    grid_step = float(np.min(np.abs(np.diff(trace.freq)))) if trace.freq.size > 1 else 1.0
    loss0 = max(width, grid_step)  # FWHM of the dip equals kappa + gamma
    split0 = loss0 * math.sqrt(max(float(data[i0]), 0.0))
    kappa0 = (loss0 + split0) / 2.0
    gamma0 = (loss0 - split0) / 2.0

    def resid(theta: np.ndarray) -> np.ndarray:
        return _lineshape(trace.freq, theta[0], theta[1], theta[2]) - data

    sol = least_squares(
        resid,
        x0=[center0, kappa0, gamma0],
        method="lm",
        x_scale=[loss0, loss0, loss0],
    )
    center, k_fit, g_fit = sol.x
    # the model sees only |k - g| and |k + g|; canonicalize, then assign
    loss_fit = abs(k_fit + g_fit)
    split_fit = abs(k_fit - g_fit)
    if split_fit > loss_fit:
        raise PoorFit("fit converged to an unphysical (negative-rate) lineshape")
    hi = (loss_fit + split_fit) / 2.0
    lo = (loss_fit - split_fit) / 2.0
    kappa, gamma = (hi, lo) if coupling_regime == "over" else (lo, hi)

    rel = float(np.linalg.norm(resid(sol.x)) / np.linalg.norm(data))
    if rel > max_residual:
        raise PoorFit(f"relative residual {rel:.3g} exceeds {max_residual:.3g}")
    return ResonanceFit(float(center), float(kappa), float(gamma), rel)


def resonance_fit_stderr(trace: TransmissionTrace, fit: ResonanceFit) -> Tuple[float, float, float]:
    """Standard errors of (omega_r, kappa, gamma) from the local Jacobian."""
    theta = np.array([fit.omega_r, fit.kappa, fit.gamma])
    r0 = _lineshape(trace.freq, *theta) - trace.transmission
    m, n = trace.freq.size, 3
    if m <= n:
        return (math.inf, math.inf, math.inf)
    jac = np.empty((m, n))
    for j in range(n):
        h = 1e-6 * max(abs(theta[j]), 1e-30)
        tp = theta.copy()
        tp[j] += h
        jac[:, j] = (_lineshape(trace.freq, *tp) - _lineshape(trace.freq, *theta)) / h
    s2 = float(r0 @ r0) / (m - n)
    cov = s2 * np.linalg.inv(jac.T @ jac)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return (float(se[0]), float(se[1]), float(se[2]))


def fit_shift_coefficient(
    traces: Sequence[TransmissionTrace],
    kappa: float,
    gamma: float,
    omega_p: float,
) -> float:
    """Summed per-photon shift g_opt + g_th from multi-power transmission.

    All traces are fit simultaneously by the branch-continued sweep model
    with kappa and gamma held fixed; the trace frequency axes must be
    detunings from the cold resonance. Raises Degenerate when the pump
    powers are too low for the model to show any measurable shift.
    """
    if len(traces) < 2:
        raise ValueError("need traces at two or more pump powers")
    if kappa <= 0 or gamma < 0 or omega_p <= 0:
        raise NonPositive("kappa and omega_p must be > 0, gamma >= 0")
    loss = kappa + gamma
    n_locks = [4.0 * kappa * tr.p_in / (HBAR * omega_p) / loss**2 for tr in traces]
    n_max = max(n_locks)
    if n_max == 0.0:
        raise Degenerate("all traces at zero pump power")
    # per-photon shift that would move the resonance by half a linewidth
    g_probe = (loss / 2.0) / n_max

    def model(g_sum: float) -> np.ndarray:
        params = ResonatorParams(kappa=kappa, gamma=gamma, g_opt=g_sum, g_th=0.0)
        parts = []
        for tr in traces:
            pump = PumpConfig(
                p_in=tr.p_in, delta_p=tr.freq, omega_p=omega_p, direction=tr.direction
            )
            parts.append(sweep(params, pump).transmission)
        return np.concatenate(parts)

    # initial guess from the observed dip offset of the strongest trace
    strongest = int(np.argmax([tr.p_in for tr in traces]))
    dip = float(traces[strongest].freq[int(np.argmin(traces[strongest].transmission))])
    g0 = -dip / n_locks[strongest]
    if not math.isfinite(g0) or g0 <= g_probe * 1e-9:
        g0 = g_probe * 1e-3

    data = np.concatenate([tr.transmission for tr in traces])
    sol = least_squares(
        lambda th: model(th[0]) - data,
        x0=[g0],
        bounds=([0.0], [np.inf]),
        x_scale=[max(g0, g_probe * 1e-3)],
    )
    g_sum = float(sol.x[0])
    # identifiability: the fitted shift must explain the data measurably
    # better than no shift at all, otherwise the powers were too low and
    # any g_sum in a flat cost valley would do
    r_hat = model(g_sum) - data
    r_null = model(0.0) - data
    improvement = float(np.dot(r_null, r_null) - np.dot(r_hat, r_hat))
    if improvement < 1e-10 * max(float(np.dot(data, data)), 1e-300):
        raise Degenerate(
            "pump powers too low: fit indistinguishable from the zero-shift model"
        )
    return g_sum


def g_opt_from_threshold(p_th: float, kappa: float, gamma: float, lambda_p: float) -> float:
    """Kerr gain per photon from an observed threshold power."""
    if p_th <= 0:
        raise NonPositive(f"p_th must be > 0, got {p_th}")
    if kappa <= 0 or gamma < 0:
        raise NonPositive("kappa must be > 0 and gamma >= 0")
    omega_p = omega_from_wavelength(lambda_p)
    return (kappa + gamma) ** 3 * HBAR * omega_p / (8.0 * kappa * p_th)


def _dispersion_design(mus: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """Centered and scaled quadratic design matrix for conditioning."""
    k = float(np.mean(mus))
    s = float(np.max(np.abs(mus - k))) or 1.0
    t = (mus - k) / s
    return np.column_stack([np.ones_like(t), t, t * t]), k, s


def fit_dispersion(
    resonances: Union[ResonanceList, Sequence[Tuple[int, float]]],
) -> DispersionFit:
    """Ordinary least squares of resonance frequencies against mode number.

    Fits omega_mu = omega_0 + d1 * mu + d2 * mu^2 / 2 and reports the
    per-mode integrated dispersion d_int = omega_mu - omega_0 - d1 * mu.
    The design matrix is centered and scaled, so exact quadratic data is
    recovered at rounding level.
    """
    if not isinstance(resonances, ResonanceList):
        resonances = ResonanceList(tuple(resonances))
    entries = resonances.entries
    if len(entries) < 3:
        raise RankDeficient(f"need >= 3 distinct mode numbers, got {len(entries)}")
    mus = np.array([m for m, _ in entries], dtype=float)
    omegas = np.array([w for _, w in entries], dtype=float)

    design, k, s = _dispersion_design(mus)
    w_mean = float(np.mean(omegas))
    coef, *_ = np.linalg.lstsq(design, omegas - w_mean, rcond=None)
    a, b, c = (float(v) for v in coef)
    d2 = 2.0 * c / (s * s)
    d1 = b / s - 2.0 * c * k / (s * s)
    omega_0 = w_mean + a - b * k / s + c * k * k / (s * s)
    d_int = omegas - (omega_0 + d1 * mus)
    return DispersionFit(omega_0, d1, d2, d_int)


def dispersion_fit_stderr(
    resonances: Union[ResonanceList, Sequence[Tuple[int, float]]],
) -> Tuple[float, float, float]:
    """Standard errors of (omega_0, d1, d2) from the OLS covariance."""
    if not isinstance(resonances, ResonanceList):
        resonances = ResonanceList(tuple(resonances))
    entries = resonances.entries
    if len(entries) < 3:
        raise RankDeficient(f"need >= 3 distinct mode numbers, got {len(entries)}")
    mus = np.array([m for m, _ in entries], dtype=float)
    omegas = np.array([w for _, w in entries], dtype=float)
    fit = fit_dispersion(resonances)
    dof = len(entries) - 3
    if dof <= 0:
        return (0.0, 0.0, 0.0)
    design, k, s = _dispersion_design(mus)
    resid = omegas - (fit.omega_0 + fit.d1 * mus + 0.5 * fit.d2 * mus * mus)
    s2 = float(resid @ resid) / dof
    cov_scaled = s2 * np.linalg.inv(design.T @ design)
    # map scaled-basis coefficients (a, b, c) to (omega_0, d1, d2)
    lmap = np.array(
        [
            [1.0, -k / s, k * k / (s * s)],
            [0.0, 1.0 / s, -2.0 * k / (s * s)],
            [0.0, 0.0, 2.0 / (s * s)],
        ]
    )
    cov = lmap @ cov_scaled @ lmap.T
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return (float(se[0]), float(se[1]), float(se[2]))


def dispersion_regime(d2: float) -> str:
    """Classify the quadratic coefficient: anomalous (> 0) or normal (< 0)."""
    if d2 > 0:
        return "anomalous"
    if d2 < 0:
        return "normal"
    return "flat"


def reduce_homodyne_trace(
    trace: ZeroSpanTrace,
    reference: ZeroSpanTrace,
    *,
    low_percentile: float = 1.0,
    high_percentile: float = 99.0,
    detrend: bool = False,
) -> Tuple[float, float]:
    """Squeezing and anti-squeezing dB relative to the reference noise level.

    Robust percentiles (1st / 99th by default) of the trace stand in for its
    extrema, because raw min/max are contaminated by phase noise. The
    reference enters as its mean level, or, with ``detrend``, as a linear
    drift fit evaluated on the trace's own time axis.
    """
    if trace.t.size == 0 or reference.t.size == 0:
        raise EmptyTrace("zero-span trace has no samples")
    meta_a = (trace.center_hz, trace.rbw_hz, trace.vbw_hz)
    meta_b = (reference.center_hz, reference.rbw_hz, reference.vbw_hz)
    if meta_a != meta_b:
        raise MetadataMismatch(
            f"trace metadata {meta_a} does not match reference metadata {meta_b}"
        )
    if not 0.0 <= low_percentile < high_percentile <= 100.0:
        raise ValueError("percentiles must satisfy 0 <= low < high <= 100")

    if detrend and reference.t.size > 1:
        slope, intercept = np.polyfit(reference.t, reference.power_dbm, 1)
        level = intercept + slope * trace.t
    else:
        level = float(np.mean(reference.power_dbm))
    rel = trace.power_dbm - level
    v_s_db = float(np.percentile(rel, low_percentile))
    v_as_db = float(np.percentile(rel, high_percentile))
    return v_s_db, v_as_db
