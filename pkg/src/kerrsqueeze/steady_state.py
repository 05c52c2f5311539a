"""Classical steady states of the driven Kerr ring: bistability and sweeps.

The intracavity photon number N at cold detuning d solves the real cubic

    N * ((Gamma/2)^2 + (d + G*N)^2) = kappa * |beta_in|^2,   G = g_opt + g_th,

with Gamma = kappa + gamma and |beta_in|^2 = P_in / (hbar * omega_p) the input
photon flux. Every physical root satisfies 0 < N <= N_lock = 4*kappa*
|beta_in|^2 / Gamma^2, so the solver works in the scaled variable
u = N / N_lock where all coefficients are O(1):

    g^2 u^3 + 2 g d' u^2 + (1/4 + d'^2) u - 1/4 = 0,

with g = G*N_lock/Gamma (peak shift in linewidths) and d' = d/Gamma. Roots
come from the depressed-cubic closed form and are polished with a few Newton
steps, so the residual is at rounding level rather than at some iteration
tolerance. The middle branch (negative df/dN, equivalently negative slope of
N against drive) is flagged unstable; tangency points count as unstable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .core import HBAR, PumpConfig, ResonatorParams, total_loss
from .errors import NonPositive

# Below this nonlinearity ratio the cubic terms are under 1e-8 of the linear
# ones for every u in (0, 1]; the closed form would lose the root to
# cancellation, while one Newton step from the linear solution is exact.
_LINEAR_RATIO = 1e-8


@dataclass(frozen=True)
class SteadyStateBranch:
    """One classical steady-state root with its derived detunings.

    ``delta_cl = delta_p + (g_opt + g_th) * n`` is the detuning seen by the
    coherent field, ``delta_f = delta_cl + g_opt * n`` the one seen by the
    fluctuations, and ``alpha_phase`` the intracavity field phase relative to
    the input field.
    """

    n: float
    delta_cl: float
    delta_f: float
    stable: bool
    alpha_phase: float


@dataclass(frozen=True)
class SweepTrace:
    """Branch-continued solution along a detuning grid, plus transmission."""

    delta_p: np.ndarray
    branches: Tuple[SteadyStateBranch, ...]
    transmission: np.ndarray
    direction: str
    p_in: float
    omega_p: float

    @property
    def n(self) -> np.ndarray:
        """Selected intracavity photon number per grid point."""
        return np.array([b.n for b in self.branches])


def _solve_scaled(g: float, delta: np.ndarray) -> np.ndarray:
    """All roots u in (0, 1] of the scaled cubic, per detuning grid point.

    Returns an (K, 3) array, ascending per row, NaN-padded. ``g`` may carry
    either sign (fitters probe negative shifts); physical inputs give g >= 0.
    """
    delta = np.asarray(delta, dtype=float)
    lin_c = 0.25 + delta * delta
    cand = np.full((delta.size, 3), np.nan)

    if g == 0.0:
        cand[:, 0] = 0.25 / lin_c
    else:
        rho = (g * g + 2.0 * abs(g) * np.abs(delta)) / lin_c
        lin_mask = rho < _LINEAR_RATIO
        cand[lin_mask, 0] = 0.25 / lin_c[lin_mask]

        cub = ~lin_mask
        if np.any(cub):
            d = delta[cub]
            # depressed cubic t^3 + p t + q after u = t - 2 d / (3 g)
            p = (0.25 - d * d / 3.0) / (g * g)
            q = -((2.0 / 27.0) * d**3 + d / 6.0) / g**3 - 0.25 / (g * g)
            shift = 2.0 * d / (3.0 * g)
            disc = -4.0 * p**3 - 27.0 * q * q

            roots = np.full((d.size, 3), np.nan)
            three = disc > 0.0  # implies p < 0
            if np.any(three):
                pt, qt = p[three], q[three]
                m = 2.0 * np.sqrt(-pt / 3.0)
                cosarg = np.clip(3.0 * qt / (2.0 * pt) * np.sqrt(-3.0 / pt), -1.0, 1.0)
                theta = np.arccos(cosarg)
                for k in range(3):
                    roots[three, k] = m * np.cos(theta / 3.0 - 2.0 * math.pi * k / 3.0)
            one = ~three
            if np.any(one):
                po, qo = p[one], q[one]
                s = np.sqrt(np.maximum(qo * qo / 4.0 + po**3 / 27.0, 0.0))
                w = -qo / 2.0 - np.sign(qo) * s
                alpha = np.cbrt(w)
                t = np.where(alpha != 0.0, alpha - po / (3.0 * np.where(alpha != 0.0, alpha, 1.0)), 0.0)
                roots[one, 0] = t
            cand[cub] = roots - shift[:, None]

    # Newton polish on the well-conditioned original form; NaNs pass through.
    dd = delta[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        for _ in range(5):
            shifted = dd + g * cand
            f = cand * (0.25 + shifted * shifted) - 0.25
            fp = 0.25 + shifted * shifted + 2.0 * g * cand * shifted
            step = f / fp
            step = np.clip(step, -0.5, 0.5)
            cand = cand - step
        # reject non-physical or unconverged candidates
        shifted = dd + g * cand
        resid = np.abs(cand * (0.25 + shifted * shifted) - 0.25)
        bad = (cand <= 0.0) | (resid > 1e-9 * 0.25)
    cand[bad] = np.nan

    cand = np.sort(cand, axis=1)  # NaNs sort to the end
    # merge numerically identical roots (tangency collapses to a double root)
    for j in (1, 2):
        with np.errstate(invalid="ignore"):
            dup = np.abs(cand[:, j] - cand[:, j - 1]) <= 1e-11 * np.abs(cand[:, j])
        cand[dup, j] = np.nan
    return np.sort(cand, axis=1)


def _grid_roots(
    params: ResonatorParams, delta_p: np.ndarray, p_in: float, omega_p: float
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Scaled roots and stability flags for a whole detuning grid.

    Returns (u_roots, stable, n_lock) where u_roots is (K, 3) NaN-padded.
    """
    if p_in < 0:
        raise NonPositive(f"p_in must be >= 0, got {p_in}")
    if omega_p <= 0:
        raise NonPositive(f"omega_p must be > 0, got {omega_p}")
    loss = total_loss(params)
    drive = params.kappa * p_in / (HBAR * omega_p)
    n_lock = 4.0 * drive / loss**2
    if drive == 0.0:
        u = np.full((delta_p.size, 3), np.nan)
        u[:, 0] = 0.0
        stable = np.zeros_like(u, dtype=bool)
        stable[:, 0] = True
        return u, stable, 0.0

    g = (params.g_opt + params.g_th) * n_lock / loss
    d = delta_p / loss
    u = _solve_scaled(g, d)
    shifted = d[:, None] + g * u
    with np.errstate(invalid="ignore"):
        fprime = 0.25 + shifted * shifted + 2.0 * g * u * shifted
        stable = fprime > 0.0
    return u, stable, n_lock


def _branch(
    params: ResonatorParams, delta_p: float, n: float, stable: bool
) -> SteadyStateBranch:
    n = float(n)
    shift_sum = params.g_opt + params.g_th
    delta_cl = float(delta_p) + shift_sum * n
    return SteadyStateBranch(
        n=n,
        delta_cl=delta_cl,
        delta_f=delta_cl + params.g_opt * n,
        stable=stable,
        alpha_phase=math.atan2(delta_cl, total_loss(params) / 2.0),
    )


def steady_roots(
    params: ResonatorParams,
    delta_p: float,
    p_in: float,
    omega_p: Optional[float] = None,
) -> List[SteadyStateBranch]:
    """All real steady-state branches at one cold detuning, ascending in n.

    Root count is 1, 2 (at a tangency) or 3. Zero pump power returns the
    single vacuum root n = 0.
    """
    if omega_p is None:
        omega_p = params.resonance_omega
    grid = np.array([delta_p], dtype=float)
    u, stable, n_lock = _grid_roots(params, grid, p_in, omega_p)
    out = []
    for j in range(3):
        if math.isnan(u[0, j]):
            continue
        out.append(_branch(params, delta_p, u[0, j] * n_lock, bool(stable[0, j])))
    return out


def transmission(params: ResonatorParams, branch: SteadyStateBranch) -> float:
    """Power transmission past the ring at the branch's operating point."""
    half_loss = total_loss(params) / 2.0
    num = (params.kappa - params.gamma) ** 2 / 4.0 + branch.delta_cl**2
    return num / (half_loss**2 + branch.delta_cl**2)


def sweep(params: ResonatorParams, pump: PumpConfig) -> SweepTrace:
    """Branch-continued steady states along the pump's detuning grid.

    Traversal order follows ``pump.direction`` ("down" = decreasing pump
    frequency); output arrays stay in the grid's stored order. At each step
    the root closest in n to the previous selection is kept; if that root is
    unstable the previous branch has folded away and the nearest stable root
    is taken instead, which is what produces hysteresis between directions.
    """
    grid = np.asarray(pump.delta_p, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("sweep needs a non-empty 1-d delta_p grid")
    if grid.size > 1:
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("delta_p grid must be strictly monotone")

    omega_p = pump.omega_p if pump.omega_p is not None else params.resonance_omega
    u, stable, n_lock = _grid_roots(params, grid, pump.p_in, omega_p)

    ascending = grid.size == 1 or grid[1] > grid[0]
    forward = ascending == (pump.direction == "up")
    order = range(grid.size) if forward else range(grid.size - 1, -1, -1)

    chosen = np.empty(grid.size, dtype=int)
    prev = None
    for i in order:
        finite = np.flatnonzero(~np.isnan(u[i]))
        if prev is None:
            stable_j = finite[stable[i, finite]]
            pick = stable_j[0] if stable_j.size else finite[0]
        else:
            gaps = np.abs(u[i, finite] - prev)
            pick = finite[np.argmin(gaps)]
            if not stable[i, pick]:
                stable_j = finite[stable[i, finite]]
                if stable_j.size:
                    pick = stable_j[np.argmin(np.abs(u[i, stable_j] - prev))]
        chosen[i] = pick
        prev = u[i, pick]

    branches = tuple(
        _branch(params, grid[i], u[i, chosen[i]] * n_lock, bool(stable[i, chosen[i]]))
        for i in range(grid.size)
    )
    trans = np.array([transmission(params, b) for b in branches])
    return SweepTrace(
        delta_p=grid.copy(),
        branches=branches,
        transmission=trans,
        direction=pump.direction,
        p_in=pump.p_in,
        omega_p=omega_p,
    )


def injection_locking_point(
    params: ResonatorParams,
    p_in: float,
    omega_p: Optional[float] = None,
) -> Tuple[float, SteadyStateBranch]:
    """Detuning and branch where the shifted resonance meets the pump.

    At this point delta_cl = 0, the photon number takes its global maximum
    n_lock = 4 kappa |beta_in|^2 / Gamma^2, and the intracavity field is in
    phase with the input.
    """
    if omega_p is None:
        omega_p = params.resonance_omega
    if p_in < 0:
        raise NonPositive(f"p_in must be >= 0, got {p_in}")
    if omega_p <= 0:
        raise NonPositive(f"omega_p must be > 0, got {omega_p}")
    loss = total_loss(params)
    n_lock = 4.0 * params.kappa * p_in / (HBAR * omega_p) / loss**2
    delta_p_lock = -(params.g_opt + params.g_th) * n_lock
    branch = _branch(params, delta_p_lock, n_lock, stable=True)
    return delta_p_lock, branch
