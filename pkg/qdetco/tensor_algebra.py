"""
Dense linear algebra over qubit Hilbert spaces.

Operators on `N` qubits are square complex128 numpy arrays of side `2**N`, with
qubit 0 as the most significant tensor factor. Hermitian operators are also
expanded over the Pauli basis, indexed by `i = sum(i_j * 4**(N - 1 - j))` with
`i_j` in `{0, 1, 2, 3}` standing for `{1, X, Y, Z}` on qubit `j`.
"""

import functools
import itertools
import logging

import numpy as np
import scipy.linalg
from tippo import Iterable, Sequence, Tuple

from qdetco import config
from qdetco._bases import Value, frozen_array
from qdetco.validation import (
    ConvergenceError,
    NotHermitianError,
    NotPsdError,
    ValidationError,
    assert_hermitian,
    assert_qubit_subset,
    assert_square_matrix,
    qubit_count_for_dim,
)

__all__ = [
    "IDENTITY",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULIS",
    "PauliCoeffTensor",
    "HermEigDecomp",
    "pauli_basis",
    "bitstrings",
    "pauli_expand",
    "pauli_reconstruct",
    "kron",
    "partial_trace",
    "permute_qubits",
    "herm_eig",
    "inv_sqrt_psd",
    "frobenius_norm",
    "frobenius_distance",
]

logger = logging.getLogger(__name__)

IDENTITY = frozen_array([[1, 0], [0, 1]], dtype=complex)
SIGMA_X = frozen_array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = frozen_array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = frozen_array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)


@functools.lru_cache(maxsize=None)
def pauli_basis(num_qubits):
    # type: (int) -> np.ndarray
    """
    Get all Pauli strings on a number of qubits.

    :param num_qubits: Number of qubits.
    :return: Read-only array of shape `(4**N, 2**N, 2**N)` in coefficient order.
    :raise ValidationError: Number of qubits below 1.
    """
    if num_qubits < 1:
        error = "number of qubits must be at least 1, got {!r}".format(num_qubits)
        raise ValidationError(error)
    basis = np.array(PAULIS)
    for _ in range(num_qubits - 1):
        basis = np.einsum("aij,bkl->abikjl", basis, np.array(PAULIS)).reshape(
            basis.shape[0] * 4, basis.shape[1] * 2, basis.shape[2] * 2
        )
    basis.flags.writeable = False
    return basis


@functools.lru_cache(maxsize=None)
def bitstrings(num_qubits):
    # type: (int) -> Tuple[str, ...]
    """
    Get all outcome bitstrings in canonical order.

    The leftmost character is qubit 0, which is also the most significant bit of
    the outcome index.

    :param num_qubits: Number of qubits.
    :return: Bitstrings, "00..0" first.
    """
    return tuple("".join(bits) for bits in itertools.product("01", repeat=num_qubits))


class PauliCoeffTensor(Value):
    """Real coefficients of a Hermitian operator over the Pauli basis."""

    __slots__ = ("num_qubits", "coeffs")
    __fields__ = ("num_qubits", "coeffs")

    def __init__(self, num_qubits, coeffs):
        # type: (int, Sequence[float]) -> None
        """
        :param num_qubits: Number of qubits.
        :param coeffs: `4**N` real coefficients.
        :raise ValidationError: Wrong length or non-real coefficients.
        """
        array = np.asarray(coeffs)
        if np.iscomplexobj(array):
            imag = float(np.max(np.abs(array.imag))) if array.size else 0.0
            if imag > config.IMAG_COEFF_TOL:
                error = "Pauli coefficients must be real, imaginary part {:.3e}".format(
                    imag
                )
                raise NotHermitianError(error)
            array = array.real
        if num_qubits < 1 or array.shape != (4**num_qubits,):
            error = "expected {} coefficients for {} qubits, got shape {!r}".format(
                4 ** max(num_qubits, 0), num_qubits, array.shape
            )
            raise ValidationError(error)
        self.num_qubits = int(num_qubits)
        self.coeffs = frozen_array(array, dtype=float)

    def __getitem__(self, index):
        # type: (Tuple[int, ...]) -> float
        """
        Get a coefficient by its per-qubit Pauli indices.

        :param index: One Pauli index per qubit.
        :return: Coefficient.
        """
        flat = 0
        for i in index:
            flat = flat * 4 + int(i)
        return float(self.coeffs[flat])

    def tensor(self):
        # type: () -> np.ndarray
        """
        Get coefficients reshaped with one axis of length 4 per qubit.

        :return: Read-only array of shape `(4,) * N`.
        """
        return self.coeffs.reshape((4,) * self.num_qubits)


class HermEigDecomp(Value):
    """Eigendecomposition of a Hermitian matrix, ascending eigenvalues."""

    __slots__ = ("eigenvalues", "eigenvectors")
    __fields__ = ("eigenvalues", "eigenvectors")

    def __init__(self, eigenvalues, eigenvectors):
        # type: (Sequence[float], np.ndarray) -> None
        """
        :param eigenvalues: Real eigenvalues in ascending order.
        :param eigenvectors: Unitary matrix with eigenvectors as columns.
        """
        self.eigenvalues = frozen_array(eigenvalues, dtype=float)
        self.eigenvectors = frozen_array(eigenvectors, dtype=complex)

    def reconstruct(self):
        # type: () -> np.ndarray
        """
        Rebuild the decomposed matrix.

        :return: `V diag(eigenvalues) V^dagger`.
        """
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def pauli_expand(m, num_qubits):
    # type: (np.ndarray, int) -> PauliCoeffTensor
    """
    Expand a Hermitian matrix over the Pauli basis.

    :param m: Hermitian matrix on `num_qubits` qubits.
    :param num_qubits: Number of qubits.
    :return: Coefficients `Tr(m P) / 2**N` for every Pauli string `P`.
    :raise NotHermitianError: A coefficient has an imaginary part above 1e-8.
    """
    matrix = assert_square_matrix(m, num_qubits)
    basis = pauli_basis(num_qubits)
    coeffs = np.einsum("kij,ji->k", basis, matrix) / matrix.shape[0]
    imag = float(np.max(np.abs(coeffs.imag)))
    if imag > config.IMAG_COEFF_TOL:
        error = "matrix is not Hermitian, imaginary Pauli coefficient {:.3e}".format(
            imag
        )
        raise NotHermitianError(error)
    return PauliCoeffTensor(num_qubits, coeffs.real)


def pauli_reconstruct(c):
    # type: (PauliCoeffTensor) -> np.ndarray
    """
    Rebuild a Hermitian matrix from Pauli coefficients.

    :param c: Coefficients.
    :return: `sum(c_i P_i)`.
    """
    return np.einsum("k,kij->ij", c.coeffs, pauli_basis(c.num_qubits))


def kron(a, b):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    """
    Kronecker product of two qubit operators.

    :param a: Operator on the leading qubits.
    :param b: Operator on the trailing qubits.
    :return: `a (x) b`.
    :raise ValidationError: Either side is not a power of two.
    """
    return np.kron(assert_square_matrix(a), assert_square_matrix(b))


def partial_trace(m, num_qubits, traced):
    # type: (np.ndarray, int, Iterable[int]) -> np.ndarray
    """
    Trace out a proper subset of qubits.

    :param m: Operator on `num_qubits` qubits.
    :param num_qubits: Number of qubits.
    :param traced: Qubits to trace out.
    :return: Operator on the remaining qubits, in ascending qubit order.
    :raise ValidationError: Empty, out of range or full subset.
    """
    matrix = assert_square_matrix(m, num_qubits)
    indices = assert_qubit_subset(traced, num_qubits, proper=False)
    if len(indices) == num_qubits:
        error = "can't trace out every qubit, use the scalar trace instead"
        raise ValidationError(error)
    tensor = matrix.reshape((2,) * (2 * num_qubits))
    remaining = num_qubits
    for q in sorted(indices, reverse=True):
        tensor = np.trace(tensor, axis1=q, axis2=q + remaining)
        remaining -= 1
    return tensor.reshape(2**remaining, 2**remaining)


def permute_qubits(m, num_qubits, order):
    # type: (np.ndarray, int, Sequence[int]) -> np.ndarray
    """
    Reorder the tensor factors of an operator.

    :param m: Operator on `num_qubits` qubits.
    :param num_qubits: Number of qubits.
    :param order: Old qubit index for each new position.
    :return: Operator whose qubit `k` is the old qubit `order[k]`.
    """
    matrix = assert_square_matrix(m, num_qubits)
    order = assert_qubit_subset(order, num_qubits, proper=False)
    if len(order) != num_qubits:
        raise ValidationError("order must name every qubit once")
    axes = list(order) + [q + num_qubits for q in order]
    tensor = matrix.reshape((2,) * (2 * num_qubits)).transpose(axes)
    return tensor.reshape(matrix.shape)


def herm_eig(m):
    # type: (np.ndarray) -> HermEigDecomp
    """
    Eigendecomposition of a Hermitian matrix.

    :param m: Hermitian matrix.
    :return: Ascending eigenvalues and unitary eigenvectors.
    :raise NotHermitianError: Not Hermitian to 1e-10.
    :raise ConvergenceError: The eigensolver failed or the decomposition does not
        reproduce the input.
    """
    matrix = assert_square_matrix(m)
    assert_hermitian(matrix, config.HERMITIAN_TOL * max(1.0, frobenius_norm(matrix)))
    hermitian = (matrix + matrix.conj().T) / 2
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(hermitian, driver="evd")
    except (np.linalg.LinAlgError, ValueError) as e:
        error = "Hermitian eigensolver failed on a {0}x{0} matrix: {1}".format(
            matrix.shape[0], e
        )
        raise ConvergenceError(error)
    decomposition = HermEigDecomp(eigenvalues, eigenvectors)
    residual = frobenius_distance(decomposition.reconstruct(), hermitian)
    if residual > config.HERMITIAN_TOL * max(1.0, frobenius_norm(hermitian)):
        error = "eigendecomposition residual {:.3e} above tolerance".format(residual)
        raise ConvergenceError(error, residual)
    return decomposition


def inv_sqrt_psd(m, eigenvalue_floor=config.EIGENVALUE_FLOOR):
    # type: (np.ndarray, float) -> np.ndarray
    """
    Inverse square root of a positive semi-definite matrix.

    Eigenvalues are floored at `eigenvalue_floor` before inversion.

    :param m: Hermitian positive semi-definite matrix.
    :param eigenvalue_floor: Smallest eigenvalue used in the inversion.
    :return: `V diag(max(l, floor) ** -1/2) V^dagger`.
    :raise NotPsdError: An eigenvalue is below `-1e-8 * max(1, largest)`.
    """
    decomposition = herm_eig(m)
    eigenvalues = decomposition.eigenvalues
    tolerance = config.NEGATIVE_EIGENVALUE_TOL * max(1.0, float(eigenvalues[-1]))
    if eigenvalues[0] < -tolerance:
        error = "matrix is not positive semi-definite, min eigenvalue {:.3e}".format(
            eigenvalues[0]
        )
        raise NotPsdError(error, float(eigenvalues[0]))
    scales = np.maximum(eigenvalues, eigenvalue_floor) ** -0.5
    v = decomposition.eigenvectors
    return (v * scales) @ v.conj().T


def frobenius_norm(m):
    # type: (np.ndarray) -> float
    """
    Frobenius norm.

    :param m: Matrix.
    :return: `sqrt(sum(|m_ij|**2))`.
    """
    return float(np.linalg.norm(m, "fro"))


def frobenius_distance(a, b):
    # type: (np.ndarray, np.ndarray) -> float
    """
    Frobenius distance between two matrices of equal shape.

    :param a: First matrix.
    :param b: Second matrix.
    :return: Norm of `a - b`.
    :raise ValidationError: Shapes differ.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        error = "can't compare matrices of shapes {!r} and {!r}".format(
            a.shape, b.shape
        )
        raise ValidationError(error)
    return frobenius_norm(a - b)
