from qdetco.analysis import (
    ComparisonTable,
    CrosstalkFlag,
    conditioned_table,
    flag_crosstalk,
    individual_vs_parallel,
)
from qdetco.detector_model import (
    AVector,
    DetectorPovm,
    check_povm,
    detector_distance,
    ideal_computational_povm,
    povm_from_avectors,
    product_povm,
    reduce_detector,
)
from qdetco.detector_simulator import (
    CountsDataset,
    NoisySpec,
    make_noisy_detector,
    simulate_qdt_experiment,
    simulate_state_measurement,
)
from qdetco.mitigation import (
    ResponseMatrix,
    build_response_matrix,
    build_response_matrix_crosstalk,
    mitigate_inversion,
    mitigate_lsq,
)
from qdetco.state_library import TestState, product_state, test_state_set
from qdetco.tomography_engine import (
    BootstrapReport,
    MleConfig,
    MleResult,
    bootstrap,
    run_mle,
)
from qdetco.validation import (
    ConvergenceError,
    IllConditionedError,
    NumericalError,
    QdtError,
    ValidationError,
)

__all__ = [
    "AVector",
    "DetectorPovm",
    "check_povm",
    "detector_distance",
    "ideal_computational_povm",
    "povm_from_avectors",
    "product_povm",
    "reduce_detector",
    "TestState",
    "product_state",
    "test_state_set",
    "CountsDataset",
    "NoisySpec",
    "make_noisy_detector",
    "simulate_qdt_experiment",
    "simulate_state_measurement",
    "MleConfig",
    "MleResult",
    "BootstrapReport",
    "run_mle",
    "bootstrap",
    "ResponseMatrix",
    "build_response_matrix",
    "build_response_matrix_crosstalk",
    "mitigate_inversion",
    "mitigate_lsq",
    "ComparisonTable",
    "CrosstalkFlag",
    "conditioned_table",
    "individual_vs_parallel",
    "flag_crosstalk",
    "QdtError",
    "ValidationError",
    "NumericalError",
    "ConvergenceError",
    "IllConditionedError",
]
