"""Worst-case expectations over scenario families.

Core objects: finite families of discrete measures with exact sublinear
expectations (:mod:`subexp.scenarios`), the one-dimensional maximal
distribution with certified grid evaluation (:mod:`subexp.maximal`),
sequentially independent joints (:mod:`subexp.joint`), simulation and
rate checks for averages under mean ambiguity (:mod:`subexp.lln`),
minimax interval estimation (:mod:`subexp.mle`), and rolling variance
envelopes (:mod:`subexp.envelope`).
"""

from .scenarios import (
    BoundedLipschitzFn,
    DiscreteMeasure,
    EvaluationError,
    ScenarioFamily,
    SublinearResult,
    capacity,
    expect_linear,
    sublinear_expect,
)
from .maximal import (
    GridMax,
    GridMax2,
    GridSpec,
    MaximalDist,
    convolve_scaled,
    dirac_family,
    eval_maximal,
    interval_distance,
)
from .joint import (
    BoundedLipschitzFnN,
    ComposeResult,
    JointSpec,
    PointCapacity,
    ProbeResult,
    asymmetry_probe,
    compose_independent,
    indicator_approx,
    point_capacity,
)
from .lln import (
    MeanPolicy,
    NoiseSpec,
    SimConfig,
    SimReport,
    SimRow,
    SimulationError,
    empirical_lln,
    log_schedule,
    rate_check,
    second_moment_upper,
    simulate_path,
)
from .mle import (
    MleResult,
    SampleSet,
    UnbiasednessResult,
    likelihood,
    mle_estimate,
    solve_minimax_oracle,
    unbiasedness_check,
)
from .envelope import (
    ColumnSpec,
    DataError,
    EnvelopeConfig,
    TimeSeries,
    VarianceEnvelope,
    ingest_csv,
    rolling_local_variance,
    variance_envelope,
)
from .axioms import AxiomSuiteReport, run_axiom_suite

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # scenarios
    "BoundedLipschitzFn",
    "DiscreteMeasure",
    "EvaluationError",
    "ScenarioFamily",
    "SublinearResult",
    "capacity",
    "expect_linear",
    "sublinear_expect",
    # maximal
    "GridMax",
    "GridMax2",
    "GridSpec",
    "MaximalDist",
    "convolve_scaled",
    "dirac_family",
    "eval_maximal",
    "interval_distance",
    # joint
    "BoundedLipschitzFnN",
    "ComposeResult",
    "JointSpec",
    "PointCapacity",
    "ProbeResult",
    "asymmetry_probe",
    "compose_independent",
    "indicator_approx",
    "point_capacity",
    # lln
    "MeanPolicy",
    "NoiseSpec",
    "SimConfig",
    "SimReport",
    "SimRow",
    "SimulationError",
    "empirical_lln",
    "log_schedule",
    "rate_check",
    "second_moment_upper",
    "simulate_path",
    # mle
    "MleResult",
    "SampleSet",
    "UnbiasednessResult",
    "likelihood",
    "mle_estimate",
    "solve_minimax_oracle",
    "unbiasedness_check",
    # envelope
    "ColumnSpec",
    "DataError",
    "EnvelopeConfig",
    "TimeSeries",
    "VarianceEnvelope",
    "ingest_csv",
    "rolling_local_variance",
    "variance_envelope",
    # axioms
    "AxiomSuiteReport",
    "run_axiom_suite",
]
