"""Model discrimination for digital-twin behavioral matching.

A small numpy/scipy toolkit that simulates a Peltier thermal twin, fits its
unknown physical parameters to recorded step responses, identifies families
of Box-Jenkins SIMO models at each operating point, scores them with
code-length information gain and nAIC/BIC/MDL, and picks the nominal
parameter set with the Vinnicombe nu-gap metric.
"""

from .lti import (
    DiscretePolynomial,
    DiscreteTransferFunction,
    InvalidModelError,
    NearPoleError,
    SimoModel,
    frequency_response,
    pole_magnitudes,
    simulate,
)
from .coding import (
    CodeLengthReport,
    CodingConfig,
    InformationGainReport,
    SimoGainReport,
    code_length,
    encode_number,
    information_gain,
    model_length,
    simo_information_gain,
    table_length,
    trivial_length,
)
from .criteria import (
    CriteriaReport,
    ResidualSummary,
    SimoCriteriaReport,
    bic,
    criteria_report,
    loss_function,
    mdl,
    naic,
    simo_criteria,
)
from .nugap import (
    NuGapMatrix,
    UnitCirclePoleError,
    chordal_distance,
    nugap,
    select_nominal,
)
from .twin import (
    PeltierParams,
    PidConfig,
    SensorConfig,
    SimConfig,
    SimulationDivergedError,
    TimeSeriesDataset,
    generate_campaign,
    peltier_derivatives,
    peltier_heat_flows,
    simulate_closed_loop,
    terminal_voltage,
)
from .sysid import (
    BoxJenkinsModel,
    FitOptions,
    FitResult,
    FitFailureError,
    OrderSpec,
    fit_noise_model,
    fit_output_error,
    identify_family,
    one_step_residuals,
)
from .matching import (
    INITIAL_GUESS_PRESETS,
    MatchFailureError,
    MatchOptions,
    MatchProblem,
    MatchResult,
    ParameterBounds,
    match_parameters,
    sse_cost,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
