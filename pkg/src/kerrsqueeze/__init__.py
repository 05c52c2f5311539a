"""Single-mode Kerr microresonator squeezing model.

Classical steady states and injection locking, intracavity quadrature
variance spectra, detection-chain loss propagation, and the inverse fits
used to characterize a device from measured traces. All rates, detunings,
and gains are angular frequencies in rad/s; powers are in W.
"""

from .characterize import (
    DispersionFit,
    ResonanceFit,
    ResonanceList,
    TransmissionTrace,
    ZeroSpanTrace,
    dispersion_fit_stderr,
    dispersion_regime,
    fit_dispersion,
    fit_linear_resonance,
    fit_shift_coefficient,
    g_opt_from_threshold,
    reduce_homodyne_trace,
    resonance_fit_stderr,
)
from .core import (
    C_VACUUM,
    HBAR,
    DriveState,
    PumpConfig,
    ResonatorParams,
    db_from_linear,
    drive_state,
    linear_from_db,
    omega_from_wavelength,
    quality_factor,
    threshold_power,
    total_loss,
)
from .detection import (
    LossBudget,
    efficiency_from_budget,
    infer_chip_variance,
    propagate_variance,
)
from .errors import (
    Degenerate,
    EmptyTrace,
    InfeasibleMeasurement,
    InvalidEfficiency,
    LinearizationWarning,
    MetadataMismatch,
    ModelError,
    NoDip,
    NonPositive,
    PoorFit,
    PositiveLossEntry,
    RankDeficient,
    SchemaError,
    SingularMatrix,
    UnstablePoint,
    ZeroGain,
    ZeroPower,
)
from .spectrum import (
    SpectrumPoint,
    SqueezingResult,
    fluctuation_flux,
    locked_raw_variance,
    locked_variances,
    optimal_phase,
    variance_extrema,
    variance_spectrum,
)
from .steady_state import (
    SteadyStateBranch,
    SweepTrace,
    injection_locking_point,
    steady_roots,
    sweep,
    transmission,
)

__version__ = "0.1.0"

__all__ = [
    "C_VACUUM",
    "HBAR",
    "Degenerate",
    "DispersionFit",
    "DriveState",
    "EmptyTrace",
    "InfeasibleMeasurement",
    "InvalidEfficiency",
    "LinearizationWarning",
    "LossBudget",
    "MetadataMismatch",
    "ModelError",
    "NoDip",
    "NonPositive",
    "PoorFit",
    "PositiveLossEntry",
    "PumpConfig",
    "RankDeficient",
    "ResonanceFit",
    "ResonanceList",
    "ResonatorParams",
    "SchemaError",
    "SingularMatrix",
    "SpectrumPoint",
    "SqueezingResult",
    "SteadyStateBranch",
    "SweepTrace",
    "TransmissionTrace",
    "UnstablePoint",
    "ZeroGain",
    "ZeroPower",
    "ZeroSpanTrace",
    "db_from_linear",
    "dispersion_fit_stderr",
    "dispersion_regime",
    "drive_state",
    "efficiency_from_budget",
    "fit_dispersion",
    "fit_linear_resonance",
    "fit_shift_coefficient",
    "fluctuation_flux",
    "g_opt_from_threshold",
    "infer_chip_variance",
    "injection_locking_point",
    "linear_from_db",
    "locked_raw_variance",
    "locked_variances",
    "omega_from_wavelength",
    "optimal_phase",
    "propagate_variance",
    "quality_factor",
    "reduce_homodyne_trace",
    "resonance_fit_stderr",
    "steady_roots",
    "sweep",
    "threshold_power",
    "total_loss",
    "transmission",
    "variance_extrema",
    "variance_spectrum",
]
