"""Error types and input assertions shared by all modules."""

import numpy as np
from tippo import Any, Iterable, Optional, Sequence, Tuple

__all__ = [
    "QdtError",
    "ValidationError",
    "NotHermitianError",
    "NotPsdError",
    "SchemaError",
    "IdentityReductionError",
    "NumericalError",
    "ConvergenceError",
    "IllConditionedError",
    "qubit_count_for_dim",
    "assert_square_matrix",
    "assert_hermitian",
    "assert_qubit_subset",
    "assert_bitstring",
    "assert_probability_vector",
    "assert_positive",
]


class QdtError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QdtError, ValueError):
    """Raised when an input fails validation."""


class NotHermitianError(ValidationError):
    """Raised when a matrix that must be Hermitian is not."""


class NotPsdError(ValidationError):
    """Raised when a matrix that must be positive semi-definite is not."""

    def __init__(self, message, min_eigenvalue):
        # type: (str, float) -> None
        super(NotPsdError, self).__init__(message)
        self.min_eigenvalue = min_eigenvalue


class SchemaError(ValidationError):
    """Raised when a serialized document does not match its schema."""

    def __init__(self, message, field=""):
        # type: (str, str) -> None
        if field:
            message = "{}: {}".format(field, message)
        super(SchemaError, self).__init__(message)
        self.field = field


class IdentityReductionError(ValidationError):
    """Raised when a reduction would keep every qubit; `povm` is the input."""

    def __init__(self, message, povm):
        # type: (str, Any) -> None
        super(IdentityReductionError, self).__init__(message)
        self.povm = povm


class NumericalError(QdtError, ArithmeticError):
    """Raised when a numerical procedure fails."""


class ConvergenceError(NumericalError):
    """Raised when an iterative procedure does not converge."""

    def __init__(self, message, residual=float("nan")):
        # type: (str, float) -> None
        super(ConvergenceError, self).__init__(message)
        self.residual = residual


class IllConditionedError(NumericalError):
    """Raised when a matrix is singular or too ill-conditioned to invert."""

    def __init__(self, message, condition_number):
        # type: (str, float) -> None
        super(IllConditionedError, self).__init__(message)
        self.condition_number = condition_number


def qubit_count_for_dim(dim):
    # type: (int) -> int
    """
    Get the number of qubits of a Hilbert space dimension.

    :param dim: Dimension.
    :return: Number of qubits.
    :raise ValidationError: Dimension is not a positive power of two.
    """
    if dim < 2 or dim & (dim - 1):
        error = "dimension {!r} is not a power of two".format(dim)
        raise ValidationError(error)
    return int(dim).bit_length() - 1


def assert_square_matrix(m, num_qubits=None):
    # type: (Any, Optional[int]) -> np.ndarray
    """
    Assert a value is a square complex matrix over qubits.

    :param m: Matrix-like value.
    :param num_qubits: Expected number of qubits.
    :return: The matrix as a complex array.
    :raise ValidationError: Not square, not a power of two, or wrong size.
    """
    array = np.asarray(m, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        error = "expected a square matrix, got shape {!r}".format(array.shape)
        raise ValidationError(error)
    n = qubit_count_for_dim(array.shape[0])
    if num_qubits is not None and n != num_qubits:
        error = "expected a {}-qubit matrix, got {} qubits".format(num_qubits, n)
        raise ValidationError(error)
    return array


def assert_hermitian(m, tol=1e-10):
    # type: (np.ndarray, float) -> None
    """
    Assert a matrix is Hermitian.

    :param m: Matrix.
    :param tol: Largest tolerated entry of `m - m^dagger`.
    :raise NotHermitianError: Not Hermitian.
    """
    deviation = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if deviation > tol:
        error = "matrix is not Hermitian, largest deviation {:.3e}".format(deviation)
        raise NotHermitianError(error)


def assert_qubit_subset(qubits, num_qubits, proper=True):
    # type: (Iterable[int], int, bool) -> Tuple[int, ...]
    """
    Assert a collection of qubit indices is a valid subset.

    :param qubits: Qubit indices.
    :param num_qubits: Number of qubits.
    :param proper: Whether the subset must leave at least one qubit out.
    :return: Indices as a tuple in the given order.
    :raise ValidationError: Empty, out of range, duplicated or not proper.
    """
    indices = tuple(int(q) for q in qubits)
    if not indices:
        raise ValidationError("qubit subset is empty")
    if len(set(indices)) != len(indices):
        error = "qubit subset {!r} has duplicates".format(indices)
        raise ValidationError(error)
    for q in indices:
        if not 0 <= q < num_qubits:
            error = "qubit {!r} out of range for {} qubits".format(q, num_qubits)
            raise ValidationError(error)
    if proper and len(indices) == num_qubits:
        error = "qubit subset {!r} is not a proper subset".format(indices)
        raise ValidationError(error)
    return indices


def assert_bitstring(bits, num_qubits):
    # type: (str, int) -> str
    """
    Assert a string is an outcome bitstring.

    :param bits: Bitstring.
    :param num_qubits: Expected length.
    :return: The bitstring.
    :raise ValidationError: Wrong length or characters.
    """
    if len(bits) != num_qubits or set(bits).difference("01"):
        error = "{!r} is not a {}-qubit outcome bitstring".format(bits, num_qubits)
        raise ValidationError(error)
    return bits


def assert_probability_vector(p, size=None, tol=1e-8):
    # type: (Sequence[float], Optional[int], float) -> np.ndarray
    """
    Assert a vector is a probability distribution.

    :param p: Vector.
    :param size: Expected length.
    :param tol: Tolerance on negativity and normalization.
    :return: The vector as a float array.
    :raise ValidationError: Wrong size, negative entries or not normalized.
    """
    vector = np.asarray(p, dtype=float)
    if vector.ndim != 1 or (size is not None and vector.shape[0] != size):
        error = "expected a probability vector of length {}, got shape {!r}".format(
            size, vector.shape
        )
        raise ValidationError(error)
    if not np.all(np.isfinite(vector)):
        raise ValidationError("probability vector has non-finite entries")
    if vector.min() < -tol:
        error = "probability vector has negative entry {:.3e}".format(vector.min())
        raise ValidationError(error)
    total = float(vector.sum())
    if abs(total - 1.0) > tol:
        error = "probability vector sums to {!r}".format(total)
        raise ValidationError(error)
    return vector


def assert_positive(name, value, allow_zero=False):
    # type: (str, float, bool) -> None
    """
    Assert a numeric option is positive.

    :param name: Option name.
    :param value: Value.
    :param allow_zero: Whether zero is accepted.
    :raise ValidationError: Not positive.
    """
    if not (value >= 0 if allow_zero else value > 0):
        error = "{} must be {}, got {!r}".format(
            name, "non-negative" if allow_zero else "positive", value
        )
        raise ValidationError(error)
