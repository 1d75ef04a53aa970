"""Multimode optomechanical coupling and quantum noise for imaging-based readout.

A laser imaging a vibrating membrane couples to the mechanical mode both
dispersively (scattering back into its own spatial mode) and spatially
(scattering into orthogonal modes). This package computes the coupling
coefficients, the resulting quantum-noise spectra (backaction,
imprecision, ponderomotive correlations, two-mode entanglement criteria),
and the performance of structured-homodyne and far-field camera
receivers, all validated by a semiclassical Monte-Carlo shot-noise
simulator.
"""

__version__ = "0.1.0"

from .constants import HBAR, KB
from .coupling import (
    CouplingSet,
    DegenerateCouplingError,
    beam_scan,
    beta_overlap,
    couple_beam,
    hg_expansion,
    parallel_perp_split,
    scattered_mode,
)
from .fields import (
    AliasingError,
    Grid2D,
    GridMismatchError,
    MembraneModeShape,
    SinusoidalMode,
    SpatialField,
    TiltMode,
    default_grid,
    far_field,
    hg_mode,
    inner_product,
    membrane_cosine_mode,
    tilt_mode,
)
from .mc_oracle import (
    ArrivalBatch,
    ForceSeries,
    McRunParams,
    McValidationReport,
    force_series,
    psd_estimate,
    simulate_arrivals,
    subsurface_flux_checks,
    validate_backaction,
    white_level,
)
from .mechanics import (
    OscillatorParams,
    bose_occupation,
    susceptibility,
    thermal_force_psd,
    zero_point_amplitude,
)
from .receivers import (
    CameraConfig,
    HomodyneConfig,
    NoInformationError,
    camera_forward_model,
    camera_intensity,
    homodyne_imprecision,
    homodyne_signal,
    ideality_kappa,
    pixelate,
    wls_estimate,
)
from .spectra import (
    ApparentDisplacementSpectrum,
    IlluminationParams,
    SpectrumSeries,
    TorqueView,
    UndefinedMeasurementError,
    apparent_displacement_psd,
    backaction_force_psd,
    backaction_force_psd_split,
    dgcz_criterion,
    imprecision_psd,
    mode_block_cross_spectrum,
    quadrature_cross_spectrum,
    resonance_omega_grid,
    sql_product,
    torque_view,
    two_mode_cross_spectrum,
)
