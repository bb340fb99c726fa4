"""Numeric defaults and environment configuration."""

import os

from qdetco.validation import ValidationError

__all__ = [
    "HERMITIAN_TOL",
    "IMAG_COEFF_TOL",
    "ROUND_TRIP_TOL",
    "EIGENVALUE_FLOOR",
    "NEGATIVE_EIGENVALUE_TOL",
    "EIG_ITERATION_FACTOR",
    "COMPLETENESS_TOL",
    "POSITIVITY_TOL",
    "MAX_TEST_STATE_QUBITS",
    "DEFAULT_SHOTS",
    "INFINITE_SHOTS",
    "PROBABILITY_NEGATIVE_TOL",
    "MLE_EPSILON",
    "MLE_MAX_ITERATIONS",
    "PROBABILITY_FLOOR",
    "LIKELIHOOD_SAMPLE_EVERY",
    "LIKELIHOOD_SLACK",
    "BOOTSTRAP_RESAMPLES",
    "BOOTSTRAP_MAX_EXCLUDED_FRACTION",
    "LSQ_TOL",
    "LSQ_MAX_ITERATIONS",
    "MAX_CONDITION_NUMBER",
    "STOCHASTIC_TOL",
    "CROSSTALK_MULTIPLIER",
    "FLUCTUATION_SCALE",
    "THREADS_ENV",
    "worker_count",
]


HERMITIAN_TOL = 1e-10
IMAG_COEFF_TOL = 1e-8
ROUND_TRIP_TOL = 1e-12
EIGENVALUE_FLOOR = 1e-12
NEGATIVE_EIGENVALUE_TOL = 1e-8
EIG_ITERATION_FACTOR = 10**4

COMPLETENESS_TOL = 1e-8
POSITIVITY_TOL = 1e-8

MAX_TEST_STATE_QUBITS = 3

DEFAULT_SHOTS = 8192
INFINITE_SHOTS = 0
PROBABILITY_NEGATIVE_TOL = 1e-10

MLE_EPSILON = 1e-10
MLE_MAX_ITERATIONS = 10**6
PROBABILITY_FLOOR = 1e-12
LIKELIHOOD_SAMPLE_EVERY = 100
LIKELIHOOD_SLACK = 1e-9

BOOTSTRAP_RESAMPLES = 100
BOOTSTRAP_MAX_EXCLUDED_FRACTION = 0.1

LSQ_TOL = 1e-10
LSQ_MAX_ITERATIONS = 10**5
MAX_CONDITION_NUMBER = 1e8
STOCHASTIC_TOL = 1e-10

CROSSTALK_MULTIPLIER = 10.0
FLUCTUATION_SCALE = 2e-3

THREADS_ENV = "QDT_THREADS"


def worker_count():
    # type: () -> int
    """
    Get the number of parallel workers from the environment.

    :return: Value of `QDT_THREADS`, 1 when unset.
    :raise ValidationError: Value is not an integer of at least 1.
    """
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        error = "{} must be an integer >= 1, got {!r}".format(THREADS_ENV, raw)
        raise ValidationError(error)
    return count
