"""Informationally complete sets of product test states."""

import functools
import itertools

import numpy as np
from tippo import Dict, List, Sequence, Tuple

from qdetco import config
from qdetco._bases import Value, frozen_array
from qdetco.tensor_algebra import IDENTITY, PAULIS, pauli_expand
from qdetco.validation import ValidationError

__all__ = [
    "TOKENS",
    "GATES",
    "PREP_SEQUENCES",
    "TestState",
    "CompletenessCheck",
    "prep_unitary",
    "pauli_eigenstate",
    "single_qubit_state",
    "product_state",
    "test_state_set",
    "informational_completeness_check",
    "ghz_state",
    "parse_label",
    "format_label",
]


TOKENS = ("0", "1", "+", "-", "+i", "-i")

_SQRT_HALF = 1.0 / np.sqrt(2.0)

GATES = {
    "X": frozen_array([[0, 1], [1, 0]], dtype=complex),
    "H": frozen_array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]]),
    "S": frozen_array([[1, 0], [0, 1j]], dtype=complex),
}  # type: Dict[str, np.ndarray]

# Gates listed in application order, leftmost first.
PREP_SEQUENCES = {
    "0": (),
    "1": ("X",),
    "+": ("H",),
    "-": ("X", "H"),
    "+i": ("H", "S"),
    "-i": ("X", "H", "S"),
}  # type: Dict[str, Tuple[str, ...]]

_AXES = {"x": 1, "y": 2, "z": 3}
_EIGEN_TOKENS = {
    ("z", "+"): "0",
    ("z", "-"): "1",
    ("x", "+"): "+",
    ("x", "-"): "-",
    ("y", "+"): "+i",
    ("y", "-"): "-i",
}
_TOKEN_AXES = {token: key for key, token in _EIGEN_TOKENS.items()}


def prep_unitary(sequence):
    # type: (Sequence[str]) -> np.ndarray
    """
    Get the unitary of a gate sequence.

    :param sequence: Gate names in application order.
    :return: `U_last ... U_first`.
    :raise ValidationError: Unknown gate.
    """
    unitary = np.eye(2, dtype=complex)
    for name in sequence:
        try:
            gate = GATES[name]
        except KeyError:
            error = "unknown gate {!r}, expected one of {}".format(name, sorted(GATES))
            raise ValidationError(error)
        unitary = gate @ unitary
    return unitary


@functools.lru_cache(maxsize=None)
def single_qubit_state(token):
    # type: (str) -> np.ndarray
    """
    Get the density matrix of a single-qubit state token.

    :param token: One of :data:`TOKENS`.
    :return: Read-only `(1 + s sigma_axis) / 2`.
    :raise ValidationError: Unknown token.
    """
    try:
        axis, sign = _TOKEN_AXES[token]
    except KeyError:
        error = "unknown state token {!r}, expected one of {}".format(token, TOKENS)
        raise ValidationError(error)
    pauli = PAULIS[_AXES[axis]]
    return frozen_array((IDENTITY + (1 if sign == "+" else -1) * pauli) / 2)


class TestState(Value):
    """Labeled product density matrix and how to prepare it from `|0..0>`."""

    __test__ = False

    __slots__ = ("num_qubits", "label", "density", "prep_sequence")
    __fields__ = ("num_qubits", "label", "density", "prep_sequence")

    def __init__(self, num_qubits, label, density, prep_sequence):
        # type: (int, Sequence[str], np.ndarray, Sequence[Sequence[str]]) -> None
        """
        :param num_qubits: Number of qubits.
        :param label: One token per qubit.
        :param density: Density matrix.
        :param prep_sequence: Gate list per qubit.
        :raise ValidationError: Sizes don't match.
        """
        label = tuple(label)
        prep_sequence = tuple(tuple(s) for s in prep_sequence)
        density = np.asarray(density, dtype=complex)
        if len(label) != num_qubits or len(prep_sequence) != num_qubits:
            error = "label and preparation must have {} entries".format(num_qubits)
            raise ValidationError(error)
        if density.shape != (2**num_qubits, 2**num_qubits):
            error = "density of shape {!r} doesn't match {} qubits".format(
                density.shape, num_qubits
            )
            raise ValidationError(error)
        self.num_qubits = int(num_qubits)
        self.label = label
        self.density = frozen_array(density)
        self.prep_sequence = prep_sequence

    @property
    def label_text(self):
        # type: () -> str
        """Label as written in files, tokens joined by commas."""
        return format_label(self.label)


class CompletenessCheck(Value):
    """Result of an informational completeness check."""

    __slots__ = ("is_complete", "rank", "condition_number")
    __fields__ = ("is_complete", "rank", "condition_number")

    def __init__(self, is_complete, rank, condition_number):
        # type: (bool, int, float) -> None
        self.is_complete = bool(is_complete)
        self.rank = int(rank)
        self.condition_number = float(condition_number)

    def __bool__(self):
        # type: () -> bool
        return self.is_complete


def product_state(label):
    # type: (Sequence[str]) -> TestState
    """
    Build a product test state from its tokens.

    :param label: One token per qubit, qubit 0 first.
    :return: Test state.
    """
    label = tuple(label)
    if not label:
        raise ValidationError("a test state needs at least one qubit")
    density = np.ones((1, 1), dtype=complex)
    for token in label:
        density = np.kron(density, single_qubit_state(token))
    return TestState(len(label), label, density, [PREP_SEQUENCES[t] for t in label])


def pauli_eigenstate(axis, sign):
    # type: (str, str) -> TestState
    """
    Get a single-qubit Pauli eigenstate.

    :param axis: "x", "y" or "z".
    :param sign: "+" or "-".
    :return: Test state `(1 +/- sigma_axis) / 2`.
    :raise ValidationError: Unknown axis or sign.
    """
    try:
        token = _EIGEN_TOKENS[(axis, sign)]
    except KeyError:
        error = "no Pauli eigenstate for axis {!r} and sign {!r}".format(axis, sign)
        raise ValidationError(error)
    return product_state((token,))


@functools.lru_cache(maxsize=None)
def _test_state_set(num_qubits):
    # type: (int) -> Tuple[TestState, ...]
    return tuple(
        product_state(label) for label in itertools.product(TOKENS, repeat=num_qubits)
    )


def test_state_set(num_qubits, allow_large=False):
    # type: (int, bool) -> Tuple[TestState, ...]
    """
    Get the `6**N` product test states in canonical order.

    Labels are ordered lexicographically with tokens ranked as in :data:`TOKENS`.

    :param num_qubits: Number of qubits.
    :param allow_large: Allow more than 3 qubits.
    :return: Test states.
    :raise ValidationError: Fewer than 1 qubit, or above the cap without override.
    """
    if num_qubits < 1:
        error = "number of qubits must be at least 1, got {!r}".format(num_qubits)
        raise ValidationError(error)
    if num_qubits > config.MAX_TEST_STATE_QUBITS and not allow_large:
        error = "{} qubits need {} circuits, pass allow_large to go above {}".format(
            num_qubits, 6**num_qubits, config.MAX_TEST_STATE_QUBITS
        )
        raise ValidationError(error)
    return _test_state_set(num_qubits)


test_state_set.__test__ = False  # type: ignore


def informational_completeness_check(states):
    # type: (Sequence[TestState]) -> CompletenessCheck
    """
    Check whether states span the space of Hermitian operators.

    :param states: States on the same number of qubits.
    :return: Whether the stacked Pauli coefficient vectors have full rank `4**N`,
        with the condition number of the stacked matrix (infinite when not).
    :raise ValidationError: No states or mixed qubit counts.
    """
    if not states:
        raise ValidationError("no states given")
    num_qubits = states[0].num_qubits
    rows = []  # type: List[np.ndarray]
    for state in states:
        if state.num_qubits != num_qubits:
            raise ValidationError("states act on different numbers of qubits")
        rows.append(pauli_expand(state.density, num_qubits).coeffs)
    stacked = np.array(rows)
    singular_values = np.linalg.svd(stacked, compute_uv=False)
    dim = 4**num_qubits
    rank = int(np.linalg.matrix_rank(stacked))
    if rank < dim:
        condition_number = float("inf")
    else:
        condition_number = float(singular_values[0] / singular_values[dim - 1])
    return CompletenessCheck(rank == dim, rank, condition_number)


def ghz_state(num_qubits):
    # type: (int) -> np.ndarray
    """
    Get the GHZ density matrix, the Bell state for two qubits.

    :param num_qubits: Number of qubits, at least 2.
    :return: `|psi><psi|` with `|psi> = (|0..0> + |1..1>) / sqrt(2)`.
    """
    if num_qubits < 2:
        error = "a GHZ state needs at least 2 qubits, got {!r}".format(num_qubits)
        raise ValidationError(error)
    psi = np.zeros(2**num_qubits, dtype=complex)
    psi[0] = psi[-1] = _SQRT_HALF
    return np.outer(psi, psi.conj())


def parse_label(text):
    # type: (str) -> Tuple[str, ...]
    """
    Parse a state label as written in files.

    :param text: Tokens joined by commas.
    :return: Tokens.
    :raise ValidationError: Unknown token.
    """
    tokens = tuple(t.strip() for t in text.split(","))
    for token in tokens:
        if token not in TOKENS:
            error = "unknown state token {!r} in label {!r}".format(token, text)
            raise ValidationError(error)
    return tokens


def format_label(label):
    # type: (Sequence[str]) -> str
    """
    Format a state label for files.

    :param label: Tokens.
    :return: Tokens joined by commas.
    """
    return ",".join(label)
