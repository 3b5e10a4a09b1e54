"""Saddle-point scars: classical saddle data, semiclassical scar densities and exact quantum checks."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .potentials import (  # noqa: F401
    CosinePotential,
    CoulombRegularized,
    CriticalPoint,
    PotentialField,
    QuadraticSaddle,
    SaddleFrame,
    SampledGridPotential,
    coulomb_regularized,
    find_critical_point,
    make_potential,
    saddle_frame,
)
from .classical import (  # noqa: F401
    MonodromyMatrix,
    SaddleOrbitSpec,
    TransverseCoefficients,
    analytic_saddle_coefficients,
    closed_form_monodromy,
    coefficients_from_monodromy,
    integrate_monodromy,
    integrate_orbit,
    limiting_W,
    multi_pass_coefficients,
)
from .semiclassical import (  # noqa: F401
    PassingSum,
    ScarDensityModel,
    SmoothedGreen,
    passing_sum,
    scar_density,
    scar_energy_estimate,
    scar_model,
    smoothed_green_density,
)
from .spectra import GridSpectrum, Spectrum1D, Spectrum2D, solve_grid_1d, solve_grid_2d, solve_periodic_1d  # noqa: F401
from .wavepacket import (  # noqa: F401
    GaussianPacket,
    PeriodicGrid,
    SpectralWeights,
    WavePacketRun,
    heller_analysis,
    propagate_splitstep,
)
from .analysis import (  # noqa: F401
    PeakAnalysis,
    ScarScore,
    Tube,
    detect_scars,
    fig1_comparison,
    level_density,
    peak_and_decay_analysis,
    scar_rank,
)
