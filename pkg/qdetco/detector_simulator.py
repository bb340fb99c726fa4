"""
Synthetic shot counts from known detectors.

Every circuit draws from its own counter-based random stream, derived from the
dataset seed and the `(run, circuit)` indices, so results never depend on the
order or parallelism of sampling.
"""

import logging

import numpy as np
from joblib import Parallel, delayed
from tippo import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

from qdetco import config
from qdetco._bases import Value, frozen_array
from qdetco.detector_model import DetectorPovm, povm_from_avectors, product_povm
from qdetco.state_library import TOKENS, TestState, product_state, test_state_set
from qdetco.validation import ValidationError, assert_positive, assert_square_matrix

__all__ = [
    "NoisySpec",
    "CountsDataset",
    "substream",
    "make_noisy_detector",
    "born_probabilities",
    "sample_counts",
    "exact_frequencies",
    "simulate_qdt_experiment",
    "simulate_parallel_experiment",
    "simulate_state_measurement",
    "marginal_dataset",
    "merge_datasets",
]

logger = logging.getLogger(__name__)


def substream(seed, *keys):
    # type: (int, *int) -> np.random.Generator
    """
    Get an independent random stream.

    :param seed: Non-negative 64-bit seed.
    :param keys: Substream indices, e.g. `(run, circuit)`.
    :return: Philox generator seeded by `SeedSequence(seed, spawn_key=keys)`.
    :raise ValidationError: Negative seed.
    """
    if seed < 0:
        error = "seed must be non-negative, got {!r}".format(seed)
        raise ValidationError(error)
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(sequence))


class NoisySpec(Value):
    """Readout noise of one qubit."""

    __slots__ = ("p01", "p10", "tilt_x", "tilt_y")
    __fields__ = ("p01", "p10", "tilt_x", "tilt_y")

    def __init__(self, p01, p10, tilt_x=0.0, tilt_y=0.0):
        # type: (float, float, float, float) -> None
        """
        :param p01: Probability of reading 1 when 0 was prepared.
        :param p10: Probability of reading 0 when 1 was prepared.
        :param tilt_x: X coefficient of the outcome-0 element.
        :param tilt_y: Y coefficient of the outcome-0 element.
        :raise ValidationError: Flip probabilities outside `[0, 1]`.
        """
        for name, value in (("p01", p01), ("p10", p10)):
            if not 0.0 <= value <= 1.0:
                error = "{} must be in [0, 1], got {!r}".format(name, value)
                raise ValidationError(error)
        self.p01 = float(p01)
        self.p10 = float(p10)
        self.tilt_x = float(tilt_x)
        self.tilt_y = float(tilt_y)

    @property
    def max_tilt(self):
        # type: () -> float
        """Largest tilt radius that keeps both elements positive."""
        return float(
            np.sqrt(min(self.p10 * (1 - self.p01), self.p01 * (1 - self.p10)))
        )


class CountsDataset(Value):
    """
    Outcome counts of repeated runs over a list of circuits.

    `counts` has shape `(runs, circuits, 2**N)`, outcomes in canonical bitstring
    order; `labels` holds the state label of each circuit.
    """

    __slots__ = ("num_qubits", "shots", "labels", "counts", "seed", "metadata")
    __fields__ = ("num_qubits", "shots", "labels", "counts", "seed", "metadata")

    def __init__(
        self,
        num_qubits,  # type: int
        shots,  # type: int
        labels,  # type: Sequence[Sequence[str]]
        counts,  # type: Any
        seed=0,  # type: int
        metadata=None,  # type: Optional[Mapping[str, str]]
    ):
        # type: (...) -> None
        """
        :param num_qubits: Number of qubits.
        :param shots: Shots per circuit.
        :param labels: State label of each circuit.
        :param counts: Counts of shape `(runs, circuits, 2**N)`.
        :param seed: Seed the counts were drawn with.
        :param metadata: Free-form string mapping.
        :raise ValidationError: Shapes or totals are inconsistent.
        """
        labels = tuple(tuple(label) for label in labels)
        array = np.asarray(counts)
        if array.ndim != 3 or array.shape[1:] != (len(labels), 2**num_qubits):
            error = "counts of shape {!r} don't match {} circuits on {} qubits".format(
                array.shape, len(labels), num_qubits
            )
            raise ValidationError(error)
        if array.shape[0] < 1:
            raise ValidationError("a dataset needs at least one run")
        if not np.issubdtype(array.dtype, np.integer) or (array < 0).any():
            raise ValidationError("counts must be non-negative integers")
        for label in labels:
            if len(label) != num_qubits or set(label).difference(TOKENS):
                error = "invalid state label {!r} for {} qubits".format(
                    label, num_qubits
                )
                raise ValidationError(error)
        totals = array.sum(axis=2)
        if (totals != shots).any():
            run, circuit = np.argwhere(totals != shots)[0]
            error = "run {} circuit {} has {} counts, expected {} shots".format(
                run, circuit, totals[run, circuit], shots
            )
            raise ValidationError(error)
        self.num_qubits = int(num_qubits)
        self.shots = int(shots)
        self.labels = labels
        self.counts = frozen_array(array, dtype=np.int64)
        self.seed = int(seed)
        self.metadata = dict(metadata or {})  # type: Dict[str, str]

    @property
    def num_runs(self):
        # type: () -> int
        """Number of runs."""
        return int(self.counts.shape[0])

    @property
    def states(self):
        # type: () -> Tuple[TestState, ...]
        """Test state of each circuit."""
        return tuple(product_state(label) for label in self.labels)

    @property
    def is_canonical(self):
        # type: () -> bool
        """Whether circuits are the `6**N` test states in canonical order."""
        if self.num_qubits > config.MAX_TEST_STATE_QUBITS:
            expected = test_state_set(self.num_qubits, allow_large=True)
        else:
            expected = test_state_set(self.num_qubits)
        return self.labels == tuple(s.label for s in expected)

    def select_runs(self, indices):
        # type: (Sequence[int]) -> CountsDataset
        """
        Get a dataset made of some runs, repetitions allowed.

        :param indices: Run indices.
        :return: Dataset.
        """
        return self.evolve(counts=self.counts[np.asarray(indices, dtype=int)])


def make_noisy_detector(specs):
    # type: (Union[NoisySpec, Sequence[NoisySpec]]) -> DetectorPovm
    """
    Build a product detector from per-qubit readout noise.

    Each qubit's outcome-0 element is
    `((1 - p01 + p10) / 2, tilt_x, tilt_y, (1 - p01 - p10) / 2)`, so that
    `<0|Pi(0)|0> = 1 - p01` and `<1|Pi(0)|1> = p10`.

    :param specs: Noise of each qubit, qubit 0 first.
    :return: Detector.
    :raise ValidationError: A tilt makes an element non-positive.
    """
    if isinstance(specs, NoisySpec):
        specs = (specs,)
    if not specs:
        raise ValidationError("need the noise of at least one qubit")
    factors = []
    for qubit, spec in enumerate(specs):
        tilt = float(np.hypot(spec.tilt_x, spec.tilt_y))
        if tilt > spec.max_tilt + config.POSITIVITY_TOL:
            error = "qubit {} tilt {:.6g} makes the detector non-positive".format(
                qubit, tilt
            )
            error += ", max {:.6g}".format(spec.max_tilt)
            raise ValidationError(error)
        a0 = (1.0 - spec.p01 + spec.p10) / 2
        a3 = (1.0 - spec.p01 - spec.p10) / 2
        factors.append(povm_from_avectors((a0, spec.tilt_x, spec.tilt_y, a3)))
    return product_povm(factors)


def born_probabilities(p, densities):
    # type: (DetectorPovm, np.ndarray) -> np.ndarray
    """
    Get outcome probabilities `Tr(rho Pi(n))`.

    Values are clipped to `[0, 1]` and renormalized.

    :param p: Detector.
    :param densities: Density matrices, shape `(S, 2**N, 2**N)`.
    :return: Probabilities of shape `(S, 2**N)`.
    :raise ValidationError: A probability is below -1e-10 or a total deviates
        from 1 by more than 1e-8.
    """
    probabilities = np.einsum("nab,sba->sn", p.matrices(), densities).real
    lowest = float(probabilities.min())
    if lowest < -config.PROBABILITY_NEGATIVE_TOL:
        error = "negative outcome probability {:.3e}, invalid detector or state".format(
            lowest
        )
        raise ValidationError(error)
    probabilities = np.clip(probabilities, 0.0, 1.0)
    totals = probabilities.sum(axis=1)
    deviation = float(np.max(np.abs(totals - 1.0)))
    if deviation > config.COMPLETENESS_TOL:
        error = "outcome probabilities sum to 1 within {:.3e} only".format(deviation)
        raise ValidationError(error)
    return probabilities / totals[:, None]


def _draw(probabilities, shots, rng):
    # type: (np.ndarray, int, np.random.Generator) -> np.ndarray
    cumulative = np.cumsum(probabilities)
    cumulative[-1] = 1.0
    draws = np.searchsorted(cumulative, rng.random(shots), side="right")
    return np.bincount(draws, minlength=probabilities.shape[0])


def sample_counts(p, s, shots, rng):
    # type: (DetectorPovm, TestState, int, np.random.Generator) -> np.ndarray
    """
    Sample the outcome counts of measuring a state.

    Draws are inverse-CDF lookups of uniform variates on the cumulative outcome
    distribution.

    :param p: Detector.
    :param s: Test state.
    :param shots: Number of shots.
    :param rng: Random generator.
    :return: Counts over `2**N` outcomes in canonical order.
    """
    assert_positive("shots", shots)
    probabilities = born_probabilities(p, np.asarray([s.density]))[0]
    return _draw(probabilities, int(shots), rng)


def exact_frequencies(p, states):
    # type: (DetectorPovm, Sequence[TestState]) -> np.ndarray
    """
    Get infinite-shot outcome frequencies.

    :param p: Detector.
    :param states: Test states.
    :return: Table of shape `(2**N, len(states))`.
    """
    densities = np.array([s.density for s in states])
    return born_probabilities(p, densities).T


def _sample_run(probabilities, shots, seed, run):
    # type: (np.ndarray, int, int, int) -> np.ndarray
    return np.array(
        [
            _draw(row, shots, substream(seed, run, circuit))
            for circuit, row in enumerate(probabilities)
        ]
    )


def _simulate(
    p,  # type: DetectorPovm
    states,  # type: Sequence[TestState]
    shots,  # type: int
    runs,  # type: int
    seed,  # type: int
    metadata,  # type: Optional[Mapping[str, str]]
):
    # type: (...) -> CountsDataset
    assert_positive("shots", shots)
    assert_positive("runs", runs)
    probabilities = born_probabilities(p, np.array([s.density for s in states]))
    runs_counts = Parallel(n_jobs=config.worker_count(), prefer="threads")(
        delayed(_sample_run)(probabilities, shots, seed, run) for run in range(runs)
    )
    logger.info(
        "sampled %d runs of %d circuits at %d shots (seed %d)",
        runs,
        len(states),
        shots,
        seed,
    )
    return CountsDataset(
        p.num_qubits,
        shots,
        [s.label for s in states],
        np.array(runs_counts),
        seed,
        metadata,
    )


def simulate_qdt_experiment(
    p,  # type: DetectorPovm
    shots=config.DEFAULT_SHOTS,  # type: int
    runs=1,  # type: int
    seed=0,  # type: int
    metadata=None,  # type: Optional[Mapping[str, str]]
    allow_large=False,  # type: bool
):
    # type: (...) -> CountsDataset
    """
    Simulate detector tomography over the full product test state set.

    Circuit `c` of run `r` samples from `substream(seed, r, c)`.

    :param p: True detector.
    :param shots: Shots per circuit.
    :param runs: Number of runs.
    :param seed: Seed.
    :param metadata: Free-form metadata stored in the dataset.
    :param allow_large: Allow more than 3 qubits.
    :return: Dataset with `runs` runs of `6**N` circuits.
    """
    states = test_state_set(p.num_qubits, allow_large=allow_large)
    return _simulate(p, states, shots, runs, seed, metadata)


def simulate_parallel_experiment(
    p,  # type: DetectorPovm
    shots=config.DEFAULT_SHOTS,  # type: int
    runs=1,  # type: int
    seed=0,  # type: int
    metadata=None,  # type: Optional[Mapping[str, str]]
):
    # type: (...) -> CountsDataset
    """
    Simulate single-qubit tomography carried out on every qubit at once.

    Each of the 6 circuits prepares the same single-qubit test state on all
    qubits; :func:`marginal_dataset` extracts the data of one qubit.

    :param p: True detector.
    :param shots: Shots per circuit.
    :param runs: Number of runs.
    :param seed: Seed.
    :param metadata: Free-form metadata stored in the dataset.
    :return: Dataset with `runs` runs of 6 circuits.
    """
    states = [product_state((token,) * p.num_qubits) for token in TOKENS]
    return _simulate(p, states, shots, runs, seed, metadata)


def simulate_state_measurement(
    p,  # type: DetectorPovm
    rho,  # type: np.ndarray
    shots=config.DEFAULT_SHOTS,  # type: int
    runs=1,  # type: int
    seed=0,  # type: int
    stream=(),  # type: Tuple[int, ...]
):
    # type: (...) -> np.ndarray
    """
    Simulate measuring one state and pool the observed frequencies.

    With `shots` equal to :data:`~qdetco.config.INFINITE_SHOTS` the exact
    probabilities are returned.

    :param p: Detector.
    :param rho: Density matrix with unit trace.
    :param shots: Shots per run, 0 for exact probabilities.
    :param runs: Number of runs.
    :param seed: Seed, run `r` samples from `substream(seed, *stream, r)`.
    :param stream: Leading substream keys, to keep related measurements apart.
    :return: Observed distribution over `2**N` outcomes.
    :raise ValidationError: `rho` is not a unit-trace PSD matrix.
    """
    rho = assert_square_matrix(rho, p.num_qubits)
    if abs(np.trace(rho) - 1.0) > config.COMPLETENESS_TOL:
        error = "state has trace {!r}, expected 1".format(complex(np.trace(rho)))
        raise ValidationError(error)
    lowest = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    if lowest < -config.POSITIVITY_TOL:
        error = "state is not positive, min eigenvalue {:.3e}".format(lowest)
        raise ValidationError(error)
    probabilities = born_probabilities(p, rho[None])[0]
    if shots == config.INFINITE_SHOTS:
        return probabilities
    assert_positive("shots", shots)
    assert_positive("runs", runs)
    total = np.zeros(probabilities.shape[0], dtype=np.int64)
    for run in range(runs):
        total += _draw(probabilities, int(shots), substream(seed, *stream, run))
    return total / float(shots * runs)


def marginal_dataset(d, qubit):
    # type: (CountsDataset, int) -> CountsDataset
    """
    Get the single-qubit data of one qubit.

    Circuits are grouped by the state prepared on `qubit` and counts are summed
    over the outcomes of the other qubits and over the grouped circuits.

    :param d: Dataset.
    :param qubit: Qubit to keep.
    :return: Single-qubit dataset with the 6 test states in canonical order.
    :raise ValidationError: Qubit out of range, or groups of unequal size or a
        test state is never prepared on `qubit`.
    """
    if not 0 <= qubit < d.num_qubits:
        error = "qubit {!r} out of range for {} qubits".format(qubit, d.num_qubits)
        raise ValidationError(error)
    shape = (d.num_runs, len(d.labels)) + (2,) * d.num_qubits
    other_axes = tuple(2 + q for q in range(d.num_qubits) if q != qubit)
    marginal = d.counts.reshape(shape).sum(axis=other_axes)
    groups = {token: [] for token in TOKENS}  # type: Dict[str, list]
    for circuit, label in enumerate(d.labels):
        groups[label[qubit]].append(circuit)
    sizes = {len(g) for g in groups.values()}
    if len(sizes) != 1 or 0 in sizes:
        error = "qubit {} isn't prepared equally often in every test state".format(
            qubit
        )
        raise ValidationError(error)
    counts = np.stack([marginal[:, groups[t]].sum(axis=1) for t in TOKENS], axis=1)
    metadata = dict(d.metadata, marginal_qubit=str(qubit))
    return CountsDataset(
        1, d.shots * sizes.pop(), [(t,) for t in TOKENS], counts, d.seed, metadata
    )


def merge_datasets(datasets):
    # type: (Sequence[CountsDataset]) -> CountsDataset
    """
    Concatenate the runs of compatible datasets.

    :param datasets: Datasets with equal qubit count, shots and circuits.
    :return: Dataset with the runs of all inputs in order; seed and metadata of
        the first.
    :raise ValidationError: No datasets or incompatible datasets.
    """
    if not datasets:
        raise ValidationError("no datasets to merge")
    first = datasets[0]
    for other in datasets[1:]:
        if (other.num_qubits, other.shots, other.labels) != (
            first.num_qubits,
            first.shots,
            first.labels,
        ):
            raise ValidationError("datasets differ in qubits, shots or circuits")
    counts = np.concatenate([d.counts for d in datasets], axis=0)
    return first.evolve(counts=counts)
