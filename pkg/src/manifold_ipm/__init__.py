"""Wavelet-based integral probability metrics between measures on curves.

Daubechies tensor wavelets turn a finite measure into a sparse multilevel
coefficient field; weighted coefficient sums give Besov norms and the dual
norms used as stand-ins for Hölder IPMs.  On top of that sit scaling
experiments for oscillating circles, the explicit potential construction and
a grid minimum-distance estimator.
"""

from .besov import (
    BesovParams,
    CoefficientField,
    analyze_measure,
    besov_norm,
    ipm_dual,
    ipm_log_weighted,
    potential_pairing,
    shift_smoothness,
)
from .errors import (
    ConfigError,
    DegenerateDataError,
    DomainError,
    IncompatibleFieldsError,
    InvalidParameterError,
    MassMismatchError,
    ResolutionError,
    SingularProjectionError,
)
from .estimator import ModelFamily, EstimatorResult, minimum_ipm_estimate, radius_grid, rate_experiment
from .interpolation import (
    ExperimentSpec,
    ExponentFit,
    check_classical,
    check_coeff_interpolation,
    fit_exponent,
    predicted_exponent,
    run_family,
)
from .measures import (
    DiscreteMeasure,
    ParametricCurve,
    circular_w1,
    displacement_cost,
    hausdorff_distance,
    make_curve,
    project_to_circle,
    quadrature_measure,
    sample_iid,
)
from .oscillation import (
    PotentialSpec,
    cost_integral,
    example_report,
    oscillating_potential,
    plateau_bump,
    sobolev_sup,
)
from .wavelets import TensorIndex, WaveletFamily, active_indices, build_family, eval_tensor

__version__ = "0.1.0"
