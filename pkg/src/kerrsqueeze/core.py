"""Scalar physics of a single Kerr microring mode.

Holds the parameter records shared by every other module and the closed-form
scalar quantities derived from them: total loss rate, loaded quality factor,
parametric threshold power, the dimensionless drive numbers, and dB helpers.

Unit convention
---------------
All rates, detunings and gains are angular frequencies in rad/s, stored as
plain floats. Published linewidth-style values quoted in "MHz" or "Hz" enter
numerically as x1e6 / x1 rad/s; this is the only convention under which the
loaded quality factor and the threshold power cross-checks agree, so the
package refuses to guess anything else. Powers are watts, wavelengths metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import NonPositive, ZeroGain

# CODATA values; fixed rather than imported so results are bit-stable.
HBAR = 1.054571817e-34   # reduced Planck constant [J s]
C_VACUUM = 2.99792458e8  # speed of light in vacuum [m/s]


def omega_from_wavelength(lambda_m: float) -> float:
    """Angular frequency [rad/s] of a vacuum wavelength [m]."""
    if lambda_m <= 0:
        raise NonPositive(f"wavelength must be positive, got {lambda_m}")
    return 2.0 * math.pi * C_VACUUM / lambda_m


@dataclass(frozen=True)
class ResonatorParams:
    """One ring mode: loss rates, per-photon gains, and its cold resonance.

    Parameters
    ----------
    kappa : float
        Waveguide coupling rate [rad/s], > 0.
    gamma : float
        Intrinsic loss rate [rad/s], >= 0.
    g_opt : float
        Kerr gain per intracavity photon [rad/s], >= 0.
    g_th : float
        Thermal shift per intracavity photon [rad/s], >= 0.
    lambda_r : float, optional
        Cold resonance wavelength [m].
    omega_r : float, optional
        Cold resonance angular frequency [rad/s]. If both this and
        ``lambda_r`` are given they must agree to 1e-12 relative.
    radius : float, optional
        Ring radius [m]; only used for circulating-power reporting.
    n_eff : float, optional
        Effective mode index; only used for circulating-power reporting.
    """

    kappa: float
    gamma: float
    g_opt: float = 0.0
    g_th: float = 0.0
    lambda_r: Optional[float] = None
    omega_r: Optional[float] = None
    radius: Optional[float] = None
    n_eff: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kappa <= 0:
            raise NonPositive(f"kappa must be > 0, got {self.kappa}")
        if self.gamma < 0:
            raise NonPositive(f"gamma must be >= 0, got {self.gamma}")
        if self.g_opt < 0:
            raise NonPositive(f"g_opt must be >= 0, got {self.g_opt}")
        if self.g_th < 0:
            raise NonPositive(f"g_th must be >= 0, got {self.g_th}")
        if self.lambda_r is not None and self.lambda_r <= 0:
            raise NonPositive(f"lambda_r must be > 0, got {self.lambda_r}")
        if self.omega_r is not None and self.omega_r <= 0:
            raise NonPositive(f"omega_r must be > 0, got {self.omega_r}")
        if self.lambda_r is not None and self.omega_r is not None:
            expected = omega_from_wavelength(self.lambda_r)
            if abs(self.omega_r - expected) > 1e-12 * expected:
                raise ValueError(
                    "lambda_r and omega_r disagree: "
                    f"2*pi*c/lambda_r = {expected!r}, omega_r = {self.omega_r!r}"
                )

    @property
    def resonance_omega(self) -> float:
        """Cold resonance angular frequency [rad/s]."""
        if self.omega_r is not None:
            return self.omega_r
        if self.lambda_r is not None:
            return omega_from_wavelength(self.lambda_r)
        raise ValueError("resonance unspecified: set lambda_r or omega_r")


@dataclass(frozen=True)
class PumpConfig:
    """Pump drive: power, frequency placement, and sweep direction.

    ``delta_p`` is the cold-cavity detuning omega_p - omega_r [rad/s]; it may
    be a scalar or a strictly monotone grid (for sweeps). ``direction`` is the
    frequency sweep direction: "down" means decreasing pump frequency.
    """

    p_in: float
    delta_p: Union[float, Sequence[float], None] = None
    omega_p: Optional[float] = None
    direction: str = "down"

    def __post_init__(self) -> None:
        if self.p_in < 0:
            raise NonPositive(f"p_in must be >= 0, got {self.p_in}")
        if self.direction not in ("up", "down"):
            raise ValueError(f"direction must be 'up' or 'down', got {self.direction!r}")


@dataclass(frozen=True)
class DriveState:
    """Dimensionless drive numbers at the injection-locked operating point."""

    sigma_tilde: float   # P_in / P_th
    x: float             # distance to the critical point, always < 1
    n_fluct_out: float   # detected fluctuation photon flux factor
    r: float             # squeezing parameter, asinh(n_fluct_out)


def total_loss(params: ResonatorParams) -> float:
    """Total loss rate kappa + gamma [rad/s]."""
    return params.kappa + params.gamma


def quality_factor(params: ResonatorParams) -> float:
    """Loaded quality factor: resonance frequency over total loss rate."""
    return params.resonance_omega / total_loss(params)


def threshold_power(
    params: ResonatorParams,
    omega_p: float,
    *,
    allow_infinite: bool = False,
) -> float:
    """Pump power [W] at which classical four-wave mixing reaches threshold.

    Parameters
    ----------
    params : ResonatorParams
    omega_p : float
        Pump angular frequency [rad/s].
    allow_infinite : bool
        With ``g_opt == 0`` the threshold does not exist. By default that
        raises :class:`ZeroGain`; with this flag it returns ``math.inf`` so
        linear-resonator workflows stay usable.
    """
    if omega_p <= 0:
        raise NonPositive(f"omega_p must be > 0, got {omega_p}")
    if params.g_opt == 0:
        if allow_infinite:
            return math.inf
        raise ZeroGain("g_opt = 0: no parametric threshold")
    loss = total_loss(params)
    return loss**3 * HBAR * omega_p / (8.0 * params.g_opt * params.kappa)


def drive_state(
    params: ResonatorParams,
    p_in: float,
    omega_p: float,
    eta: float = 1.0,
    p_th: Optional[float] = None,
) -> DriveState:
    """Dimensionless drive numbers for a pump locked to the shifted resonance.

    ``n_fluct_out`` uses the locked first-power flux form
    ``(4 eta kappa / Gamma) * (P_in / P_th)``; the general quadratic-in-drive
    flux lives in :func:`kerrsqueeze.spectrum.fluctuation_flux`. Passing
    ``p_th`` substitutes a measured threshold for the modelled one.
    """
    if p_in < 0:
        raise NonPositive(f"p_in must be >= 0, got {p_in}")
    if not 0.0 <= eta <= 1.0:
        from .errors import InvalidEfficiency

        raise InvalidEfficiency(f"eta must be in [0, 1], got {eta}")
    if p_th is None:
        p_th = threshold_power(params, omega_p, allow_infinite=True)
    elif p_th <= 0:
        raise NonPositive(f"p_th must be > 0, got {p_th}")
    sigma_tilde = 0.0 if math.isinf(p_th) else p_in / p_th
    x = sigma_tilde / math.sqrt(1.0 + sigma_tilde * sigma_tilde)
    n_fluct = 4.0 * eta * params.kappa / total_loss(params) * sigma_tilde
    return DriveState(
        sigma_tilde=sigma_tilde,
        x=x,
        n_fluct_out=n_fluct,
        r=math.asinh(n_fluct),
    )


def db_from_linear(v: float) -> float:
    """Power ratio to dB. Raises NonPositive for v <= 0."""
    if v <= 0:
        raise NonPositive(f"ratio must be > 0 for dB conversion, got {v}")
    return 10.0 * math.log10(v)


def linear_from_db(db: float) -> float:
    """dB to power ratio; exact inverse of :func:`db_from_linear`."""
    return 10.0 ** (db / 10.0)
