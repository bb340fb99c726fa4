"""
Maximum-likelihood reconstruction of detector POVMs.

The estimator maximizes `sum f(n, i) log Tr(Pi(n) rho_i)` over complete POVMs with
the fixed-point iteration

    Pi'(n) = S^-1/2 A(n) Pi(n) A(n) S^-1/2,
    A(n) = sum_i f(n, i) / p(n, i) rho_i,
    S = sum_m A(m) Pi(m) A(m),

which keeps every iterate positive and complete.
"""

import logging

import numpy as np
from joblib import Parallel, delayed
from tippo import List, Optional, Sequence, Tuple

from qdetco import config
from qdetco._bases import Value, frozen_array
from qdetco.detector_model import DetectorPovm, check_povm
from qdetco.detector_simulator import CountsDataset, substream
from qdetco.state_library import TestState, informational_completeness_check
from qdetco.tensor_algebra import frobenius_norm, inv_sqrt_psd
from qdetco.validation import ConvergenceError, ValidationError, assert_positive

__all__ = [
    "MleConfig",
    "MleResult",
    "BootstrapReport",
    "frequencies",
    "log_likelihood",
    "mle_step",
    "run_mle_frequencies",
    "run_mle",
    "bootstrap",
]

logger = logging.getLogger(__name__)


class MleConfig(Value):
    """Termination and numerical settings of the likelihood iteration."""

    __slots__ = (
        "epsilon",
        "max_iterations",
        "probability_floor",
        "initial_povm",
        "sample_every",
    )
    __fields__ = (
        "epsilon",
        "max_iterations",
        "probability_floor",
        "initial_povm",
        "sample_every",
    )

    def __init__(
        self,
        epsilon=config.MLE_EPSILON,  # type: float
        max_iterations=config.MLE_MAX_ITERATIONS,  # type: int
        probability_floor=config.PROBABILITY_FLOOR,  # type: float
        initial_povm=None,  # type: Optional[DetectorPovm]
        sample_every=config.LIKELIHOOD_SAMPLE_EVERY,  # type: int
    ):
        # type: (...) -> None
        """
        :param epsilon: Stop once the summed Frobenius step is below this.
        :param max_iterations: Iteration cap.
        :param probability_floor: Floor of `Tr(Pi rho)` in logs and denominators.
        :param initial_povm: Starting POVM, every element `1 / 2**N` when None.
        :param sample_every: Likelihood trace sampling period.
        :raise ValidationError: Non-positive settings or invalid initial POVM.
        """
        assert_positive("epsilon", epsilon)
        assert_positive("max_iterations", max_iterations)
        assert_positive("probability_floor", probability_floor)
        assert_positive("sample_every", sample_every)
        if initial_povm is not None:
            report = check_povm(initial_povm)
            if not report.is_valid:
                error = (
                    "initial POVM is invalid (completeness residual {:.3e}, "
                    "min eigenvalue {:.3e})"
                ).format(report.completeness_residual, report.min_eigenvalue)
                raise ValidationError(error)
        self.epsilon = float(epsilon)
        self.max_iterations = int(max_iterations)
        self.probability_floor = float(probability_floor)
        self.initial_povm = initial_povm
        self.sample_every = int(sample_every)


class MleResult(Value):
    """
    Outcome of the likelihood iteration.

    Besides the estimate it records what was observed over all iterates: the
    largest completeness residual, the smallest eigenvalue, the largest
    likelihood decrease between consecutive iterates and the largest
    anti-Hermitian part of `S` before symmetrization.
    """

    __slots__ = (
        "povm",
        "iterations",
        "final_step_norm",
        "log_likelihood_trace",
        "converged",
        "max_completeness_residual",
        "min_iterate_eigenvalue",
        "max_likelihood_drop",
        "max_s_asymmetry",
    )
    __fields__ = __slots__

    def __init__(
        self,
        povm,  # type: DetectorPovm
        iterations,  # type: int
        final_step_norm,  # type: float
        log_likelihood_trace,  # type: Sequence[float]
        converged,  # type: bool
        max_completeness_residual=0.0,  # type: float
        min_iterate_eigenvalue=0.0,  # type: float
        max_likelihood_drop=0.0,  # type: float
        max_s_asymmetry=0.0,  # type: float
    ):
        # type: (...) -> None
        self.povm = povm
        self.iterations = int(iterations)
        self.final_step_norm = float(final_step_norm)
        self.log_likelihood_trace = frozen_array(log_likelihood_trace, dtype=float)
        self.converged = bool(converged)
        self.max_completeness_residual = float(max_completeness_residual)
        self.min_iterate_eigenvalue = float(min_iterate_eigenvalue)
        self.max_likelihood_drop = float(max_likelihood_drop)
        self.max_s_asymmetry = float(max_s_asymmetry)


class BootstrapReport(Value):
    """
    Spread of reconstructed coefficients over resampled datasets.

    `std` and `mean` have the shape of :attr:`DetectorPovm.coeffs`.
    """

    __slots__ = ("num_qubits", "std", "mean", "num_resamples", "num_excluded")
    __fields__ = ("num_qubits", "std", "mean", "num_resamples", "num_excluded")

    def __init__(self, num_qubits, std, mean, num_resamples, num_excluded=0):
        # type: (int, np.ndarray, np.ndarray, int, int) -> None
        """
        :param num_qubits: Number of qubits.
        :param std: Per-coefficient standard deviations.
        :param mean: Per-coefficient means.
        :param num_resamples: Number of resamples drawn.
        :param num_excluded: Resamples left out for not converging.
        :raise ValidationError: Shapes don't match or a deviation is negative.
        """
        std = np.asarray(std, dtype=float)
        mean = np.asarray(mean, dtype=float)
        shape = (2**num_qubits, 4**num_qubits)
        if std.shape != shape or mean.shape != shape:
            error = "expected statistics of shape {!r}, got {!r} and {!r}".format(
                shape, std.shape, mean.shape
            )
            raise ValidationError(error)
        if (std < 0).any():
            raise ValidationError("standard deviations must be non-negative")
        self.num_qubits = int(num_qubits)
        self.std = frozen_array(std)
        self.mean = frozen_array(mean)
        self.num_resamples = int(num_resamples)
        self.num_excluded = int(num_excluded)


def frequencies(d):
    # type: (CountsDataset) -> np.ndarray
    """
    Pool the runs of a dataset into relative frequencies.

    :param d: Dataset.
    :return: Table of shape `(2**N, circuits)` whose columns sum to 1.
    :raise ValidationError: A circuit has no shots.
    """
    pooled = d.counts.sum(axis=0)
    totals = pooled.sum(axis=1)
    if (totals == 0).any():
        circuit = int(np.flatnonzero(totals == 0)[0])
        error = "state {!r} has no shots".format(",".join(d.labels[circuit]))
        raise ValidationError(error)
    return (pooled / totals[:, None].astype(float)).T


def _densities(states, f):
    # type: (Sequence[TestState], np.ndarray) -> Tuple[int, np.ndarray, np.ndarray]
    if not states:
        raise ValidationError("no test states given")
    num_qubits = states[0].num_qubits
    if any(s.num_qubits != num_qubits for s in states):
        raise ValidationError("test states act on different numbers of qubits")
    f = np.asarray(f, dtype=float)
    if f.shape != (2**num_qubits, len(states)):
        error = "frequency table of shape {!r} doesn't match {} states on {} qubits"
        raise ValidationError(error.format(f.shape, len(states), num_qubits))
    if (f < 0).any():
        raise ValidationError("frequencies must be non-negative")
    return num_qubits, np.array([s.density for s in states]), f


def _probabilities(matrices, densities, floor):
    # type: (np.ndarray, np.ndarray, float) -> np.ndarray
    return np.maximum(np.einsum("nab,sba->ns", matrices, densities).real, floor)


def _log_likelihood(matrices, densities, f, floor):
    # type: (np.ndarray, np.ndarray, np.ndarray, float) -> float
    probabilities = _probabilities(matrices, densities, floor)
    logs = np.log(probabilities, where=f > 0, out=np.zeros_like(probabilities))
    return float(np.sum(f * logs))


def _step(matrices, densities, f, floor):
    # type: (np.ndarray, np.ndarray, np.ndarray, float) -> Tuple[np.ndarray, float]
    probabilities = _probabilities(matrices, densities, floor)
    weights = np.divide(
        f, probabilities, where=f > 0, out=np.zeros_like(probabilities)
    )
    a = np.einsum("ns,sij->nij", weights, densities)
    s = np.einsum("nij,njk,nkl->il", a, matrices, a)
    asymmetry = frobenius_norm(s - s.conj().T)
    logger.debug("S asymmetry before symmetrization %.3e", asymmetry)
    root = inv_sqrt_psd((s + s.conj().T) / 2)
    updated = root @ (a @ matrices @ a) @ root
    return (updated + np.conj(np.swapaxes(updated, 1, 2))) / 2, asymmetry


def log_likelihood(p, states, f, floor=config.PROBABILITY_FLOOR):
    # type: (DetectorPovm, Sequence[TestState], np.ndarray, float) -> float
    """
    Log-likelihood of observed frequencies.

    Terms with zero frequency contribute nothing; probabilities are floored at
    `floor` before taking logs.

    :param p: Detector.
    :param states: Test states.
    :param f: Frequencies of shape `(2**N, len(states))`.
    :param floor: Probability floor.
    :return: `sum f(n, i) log Tr(Pi(n) rho_i)`.
    """
    _, densities, f = _densities(states, f)
    return _log_likelihood(p.matrices(), densities, f, floor)


def mle_step(p, states, f, floor=config.PROBABILITY_FLOOR):
    # type: (DetectorPovm, Sequence[TestState], np.ndarray, float) -> DetectorPovm
    """
    Apply one likelihood iteration.

    :param p: Current POVM.
    :param states: Test states.
    :param f: Frequencies of shape `(2**N, len(states))`.
    :param floor: Probability floor.
    :return: Next POVM.
    :raise NotPsdError: `S` has an eigenvalue below tolerance.
    """
    num_qubits, densities, f = _densities(states, f)
    if p.num_qubits != num_qubits:
        error = "POVM on {} qubits can't be fit to {}-qubit states".format(
            p.num_qubits, num_qubits
        )
        raise ValidationError(error)
    updated, _ = _step(p.matrices(), densities, f, floor)
    return DetectorPovm.from_matrices(updated)


def _validity(matrices):
    # type: (np.ndarray) -> Tuple[float, float]
    total = matrices.sum(axis=0)
    residual = float(np.max(np.abs(total - np.eye(total.shape[0]))))
    return residual, float(np.linalg.eigvalsh(matrices).min())


def run_mle_frequencies(f, states, cfg=None):
    # type: (np.ndarray, Sequence[TestState], Optional[MleConfig]) -> MleResult
    """
    Reconstruct a POVM from a frequency table.

    Iterates until the summed Frobenius step over all elements is below
    `cfg.epsilon` or `cfg.max_iterations` is reached.

    :param f: Frequencies of shape `(2**N, len(states))`.
    :param states: Informationally complete test states.
    :param cfg: Settings, defaults when None.
    :return: Result, with `converged` False when the iteration cap was hit.
    """
    cfg = cfg if cfg is not None else MleConfig()
    num_qubits, densities, f = _densities(states, f)
    dim = 2**num_qubits
    if cfg.initial_povm is None:
        matrices = np.repeat(np.eye(dim, dtype=complex)[None] / dim, dim, axis=0)
    elif cfg.initial_povm.num_qubits != num_qubits:
        error = "initial POVM has {} qubits, states have {}".format(
            cfg.initial_povm.num_qubits, num_qubits
        )
        raise ValidationError(error)
    else:
        matrices = np.array(cfg.initial_povm.matrices())

    floor = cfg.probability_floor
    likelihood = _log_likelihood(matrices, densities, f, floor)
    trace = [likelihood]  # type: List[float]
    max_residual, min_eigenvalue = _validity(matrices)
    max_drop = max_asymmetry = 0.0
    step_norm = float("inf")
    converged = False
    iterations = 0
    logger.info("MLE on %d qubits over %d states", num_qubits, len(states))

    while iterations < cfg.max_iterations:
        updated, asymmetry = _step(matrices, densities, f, floor)
        iterations += 1
        step_norm = float(np.linalg.norm(updated - matrices, axis=(1, 2)).sum())
        matrices = updated

        residual, lowest = _validity(matrices)
        max_residual = max(max_residual, residual)
        min_eigenvalue = min(min_eigenvalue, lowest)
        max_asymmetry = max(max_asymmetry, asymmetry)
        next_likelihood = _log_likelihood(matrices, densities, f, floor)
        drop = likelihood - next_likelihood
        if drop > config.LIKELIHOOD_SLACK:
            logger.warning(
                "log-likelihood decreased by %.3e at iteration %d", drop, iterations
            )
        max_drop = max(max_drop, drop)
        likelihood = next_likelihood
        if iterations % cfg.sample_every == 0:
            trace.append(likelihood)

        if step_norm < cfg.epsilon:
            converged = True
            break

    if iterations % cfg.sample_every != 0:
        trace.append(likelihood)
    if converged:
        logger.info(
            "MLE converged after %d iterations, step norm %.3e", iterations, step_norm
        )
    else:
        logger.warning(
            "MLE stopped at %d iterations without converging, step norm %.3e",
            iterations,
            step_norm,
        )
    return MleResult(
        DetectorPovm.from_matrices(matrices),
        iterations,
        step_norm,
        trace,
        converged,
        max_residual,
        min_eigenvalue,
        max_drop,
        max_asymmetry,
    )


def run_mle(d, cfg=None):
    # type: (CountsDataset, Optional[MleConfig]) -> MleResult
    """
    Reconstruct a POVM from the pooled runs of a dataset.

    :param d: Dataset.
    :param cfg: Settings, defaults when None.
    :return: Result.
    :raise ValidationError: The dataset's states are not informationally complete.
    """
    states = d.states
    if not d.is_canonical:
        completeness = informational_completeness_check(states)
        if not completeness:
            error = "dataset states span rank {} of {}, can't reconstruct".format(
                completeness.rank, 4**d.num_qubits
            )
            raise ValidationError(error)
    return run_mle_frequencies(frequencies(d), states, cfg)


def _resample(d, seed, index, cfg):
    # type: (CountsDataset, int, int, Optional[MleConfig]) -> MleResult
    rng = substream(seed, index)
    return run_mle(d.select_runs(rng.integers(0, d.num_runs, size=d.num_runs)), cfg)


def bootstrap(d, num_resamples=config.BOOTSTRAP_RESAMPLES, seed=0, cfg=None):
    # type: (CountsDataset, int, int, Optional[MleConfig]) -> BootstrapReport
    """
    Estimate coefficient uncertainties by resampling runs.

    Resample `k` draws the original number of runs with replacement from
    `substream(seed, k)`, pools them and runs the reconstruction. Resamples that
    don't converge are excluded.

    :param d: Dataset with at least 2 runs.
    :param num_resamples: Number of resamples, at least 2.
    :param seed: Seed.
    :param cfg: Settings, defaults when None.
    :return: Sample standard deviation and mean of every coefficient.
    :raise ValidationError: Fewer than 2 runs or resamples.
    :raise ConvergenceError: More than 10% of the resamples were excluded.
    """
    if d.num_runs < 2:
        error = "bootstrap needs at least 2 runs, got {}".format(d.num_runs)
        raise ValidationError(error)
    if num_resamples < 2:
        error = "bootstrap needs at least 2 resamples, got {!r}".format(num_resamples)
        raise ValidationError(error)
    results = Parallel(n_jobs=config.worker_count(), prefer="threads")(
        delayed(_resample)(d, seed, k, cfg) for k in range(num_resamples)
    )
    kept = np.array([r.povm.coeffs for r in results if r.converged])
    excluded = num_resamples - len(kept)
    if excluded:
        logger.warning("excluded %d of %d bootstrap resamples", excluded, num_resamples)
    limit = config.BOOTSTRAP_MAX_EXCLUDED_FRACTION * num_resamples
    if excluded > limit or len(kept) < 2:
        error = "{} of {} bootstrap resamples did not converge".format(
            excluded, num_resamples
        )
        raise ConvergenceError(error)
    return BootstrapReport(
        d.num_qubits,
        kept.std(axis=0, ddof=1),
        kept.mean(axis=0),
        num_resamples,
        excluded,
    )
