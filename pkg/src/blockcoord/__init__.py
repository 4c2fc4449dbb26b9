"""Randomized block-coordinate descent solvers and a rate-verification harness."""

from .blocks import BlockPartition, LWeights, l_dual_norm, l_norm
from .oracles import (
    BoxIndicator,
    L1Reg,
    LeastSquaresOracle,
    NumericalError,
    ProblemFormatError,
    ProblemInstance,
    QuadraticOracle,
    Regularizer,
    SmoothOracle,
    SquaredL2Reg,
    ZeroReg,
    quadratic_mu,
    soft_threshold_block,
)
from .mapping import MappingResult, block_prox_step, full_mapping, surrogate_h
from .rng import Xoshiro256StarStar
from .rbcd import (
    MultiRunResult,
    RunTrace,
    SolverConfig,
    VerificationError,
    rbcd_multi_run,
    rbcd_run,
)
from .arcd import (
    EsCheckReport,
    EstimateSeqState,
    EstimateSeqTrace,
    alpha_schedule,
    arcd_run_gamma,
    arcd_run_simple,
    estimate_sequence_check,
    solve_alpha,
)
from .rates import (
    BoundInputs,
    arcd_bound,
    arcd_envelope_bound,
    arcd_lambda,
    arcd_lambda_envelope,
    bound_report,
    nesterov_arcd_bounds,
    rbcd_bound_general,
    rbcd_bound_strong,
    rbcd_highprob_K,
    rbcd_highprob_K_strong,
    rbcd_multirun_K,
    rbcd_strong_factor,
    rt_bounds,
)
from .harness import (
    CertReport,
    ExpectationCurve,
    RbarEstimate,
    Reference,
    build_bound_inputs,
    certify,
    es_statistical_check,
    estimate_expectation,
    estimate_rbar0,
    exact_one_step_expectation,
    reference_solve,
    run_es_verification,
)
from .io import (
    BUNDLED_PROBLEMS,
    bundled_problem,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    save_problem,
)

__version__ = "0.1.0"
