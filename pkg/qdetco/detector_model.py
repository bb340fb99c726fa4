"""POVM model of N-qubit detectors."""

import logging

import numpy as np
from tippo import Dict, Mapping, Optional, Sequence, Tuple, Union

from qdetco import config
from qdetco._bases import Value, frozen_array
from qdetco.tensor_algebra import (
    PauliCoeffTensor,
    bitstrings,
    inv_sqrt_psd,
    pauli_basis,
)
from qdetco.validation import (
    IdentityReductionError,
    ValidationError,
    assert_bitstring,
    assert_qubit_subset,
    qubit_count_for_dim,
)

__all__ = [
    "AVector",
    "DetectorPovm",
    "PovmValidityReport",
    "ideal_computational_povm",
    "check_povm",
    "reduce_detector",
    "detector_distance",
    "separability_singular_values",
    "product_povm",
    "povm_from_avectors",
    "random_povm",
]

logger = logging.getLogger(__name__)


class AVector(Value):
    """Pauli coefficients `(a0, a1, a2, a3)` of one single-qubit POVM element."""

    __slots__ = ("a0", "a1", "a2", "a3")
    __fields__ = ("a0", "a1", "a2", "a3")

    def __init__(self, a0, a1, a2, a3):
        # type: (float, float, float, float) -> None
        """
        :param a0: Identity coefficient.
        :param a1: X coefficient.
        :param a2: Y coefficient.
        :param a3: Z coefficient.
        """
        self.a0 = float(a0)
        self.a1 = float(a1)
        self.a2 = float(a2)
        self.a3 = float(a3)

    @classmethod
    def from_sequence(cls, values):
        # type: (Sequence[float]) -> AVector
        """
        Build from four values.

        :param values: `(a0, a1, a2, a3)`.
        :return: A-vector.
        :raise ValidationError: Not four values.
        """
        if len(values) != 4:
            error = "an a-vector has 4 components, got {}".format(len(values))
            raise ValidationError(error)
        return cls(*values)

    def as_array(self):
        # type: () -> np.ndarray
        """
        :return: `[a0, a1, a2, a3]`.
        """
        return np.array([self.a0, self.a1, self.a2, self.a3])

    def complement(self):
        # type: () -> AVector
        """
        Get the other element of a two-outcome POVM.

        :return: `(1, 0, 0, 0) - self`.
        """
        return AVector(1.0 - self.a0, -self.a1, -self.a2, -self.a3)

    @property
    def radius(self):
        # type: () -> float
        """Length of `(a1, a2, a3)`."""
        return float(np.sqrt(self.a1**2 + self.a2**2 + self.a3**2))

    @property
    def eigenvalues(self):
        # type: () -> Tuple[float, float]
        """Eigenvalues `a0 - radius, a0 + radius`."""
        return self.a0 - self.radius, self.a0 + self.radius

    @property
    def bloch_vector(self):
        # type: () -> Tuple[float, float, float]
        """Vector `(a1, a2, a3) / a0`, zero when `a0` is zero."""
        if self.a0 == 0:
            return 0.0, 0.0, 0.0
        return self.a1 / self.a0, self.a2 / self.a0, self.a3 / self.a0

    def is_positive(self, tol=config.POSITIVITY_TOL):
        # type: (float) -> bool
        """
        Tell whether the represented element is positive semi-definite.

        :param tol: Tolerance.
        :return: True if `a0 >= radius - tol`.
        """
        return self.a0 >= self.radius - tol


class PovmValidityReport(Value):
    """Completeness and positivity of a POVM."""

    __slots__ = ("completeness_residual", "min_eigenvalue", "is_valid")
    __fields__ = ("completeness_residual", "min_eigenvalue", "is_valid")

    def __init__(self, completeness_residual, min_eigenvalue, is_valid):
        # type: (float, float, bool) -> None
        self.completeness_residual = float(completeness_residual)
        self.min_eigenvalue = float(min_eigenvalue)
        self.is_valid = bool(is_valid)


class DetectorPovm(Value):
    """
    Complete set of `2**N` POVM elements indexed by outcome bitstring.

    Coefficients are stored as an array of shape `(2**N, 4**N)`, one row per
    outcome in canonical bitstring order. Validity is not enforced on
    construction, use :func:`check_povm`.
    """

    __slots__ = ("num_qubits", "coeffs", "__matrices")
    __fields__ = ("num_qubits", "coeffs")

    def __init__(self, num_qubits, coeffs):
        # type: (int, Union[np.ndarray, Mapping[str, Sequence[float]]]) -> None
        """
        :param num_qubits: Number of qubits.
        :param coeffs: Array of shape `(2**N, 4**N)` or a mapping from bitstring to
            `4**N` coefficients.
        :raise ValidationError: Wrong shape or missing outcomes.
        """
        if isinstance(coeffs, Mapping):
            labels = bitstrings(num_qubits)
            missing = set(labels).difference(coeffs)
            extra = set(coeffs).difference(labels)
            if missing or extra:
                error = "outcomes don't match {} qubits (missing {}, extra {})".format(
                    num_qubits, sorted(missing), sorted(extra)
                )
                raise ValidationError(error)
            array = np.array([coeffs[b] for b in labels], dtype=float)
        else:
            array = np.asarray(coeffs, dtype=float)
        if num_qubits < 1 or array.shape != (2**num_qubits, 4**num_qubits):
            error = "expected coefficients of shape {!r}, got {!r}".format(
                (2 ** max(num_qubits, 0), 4 ** max(num_qubits, 0)), array.shape
            )
            raise ValidationError(error)
        self.num_qubits = int(num_qubits)
        self.coeffs = frozen_array(array)
        self.__matrices = None  # type: Optional[np.ndarray]

    @classmethod
    def from_matrices(cls, matrices):
        # type: (Union[np.ndarray, Sequence[np.ndarray]]) -> DetectorPovm
        """
        Build from POVM element matrices.

        :param matrices: `2**N` Hermitian matrices in canonical outcome order.
        :return: POVM.
        :raise ValidationError: Wrong count or shape.
        :raise NotHermitianError: An element is not Hermitian.
        """
        array = np.asarray(matrices, dtype=complex)
        if array.ndim != 3 or array.shape[1] != array.shape[2]:
            error = "expected a stack of square matrices, got shape {!r}".format(
                array.shape
            )
            raise ValidationError(error)
        num_qubits = qubit_count_for_dim(array.shape[1])
        if array.shape[0] != 2**num_qubits:
            error = "expected {} elements, got {}".format(2**num_qubits, array.shape[0])
            raise ValidationError(error)
        basis = pauli_basis(num_qubits)
        coeffs = np.einsum("kij,nji->nk", basis, array) / array.shape[1]
        rows = [PauliCoeffTensor(num_qubits, row).coeffs for row in coeffs]
        return cls(num_qubits, np.array(rows))

    @property
    def outcomes(self):
        # type: () -> Tuple[str, ...]
        """Outcome bitstrings in canonical order."""
        return bitstrings(self.num_qubits)

    @property
    def elements(self):
        # type: () -> Dict[str, PauliCoeffTensor]
        """Mapping from outcome bitstring to element coefficients."""
        return {
            b: PauliCoeffTensor(self.num_qubits, row)
            for b, row in zip(self.outcomes, self.coeffs)
        }

    def element(self, bits):
        # type: (str) -> PauliCoeffTensor
        """
        Get one element.

        :param bits: Outcome bitstring.
        :return: Element coefficients.
        """
        assert_bitstring(bits, self.num_qubits)
        return PauliCoeffTensor(self.num_qubits, self.coeffs[int(bits, 2)])

    def matrices(self):
        # type: () -> np.ndarray
        """
        Get element matrices.

        :return: Read-only array of shape `(2**N, 2**N, 2**N)`.
        """
        if self.__matrices is None:
            basis = pauli_basis(self.num_qubits)
            matrices = np.einsum("nk,kij->nij", self.coeffs, basis)
            matrices.flags.writeable = False
            object.__setattr__(self, "_DetectorPovm__matrices", matrices)
        assert self.__matrices is not None
        return self.__matrices

    def avector(self, outcome):
        # type: (Union[int, str]) -> AVector
        """
        Get the a-vector of a single-qubit element.

        :param outcome: 0, 1, "0" or "1".
        :return: A-vector.
        :raise ValidationError: Not a single-qubit POVM.
        """
        if self.num_qubits != 1:
            error = "a-vectors need a single-qubit POVM, got {} qubits".format(
                self.num_qubits
            )
            raise ValidationError(error)
        return AVector.from_sequence(self.coeffs[int(outcome)])


def ideal_computational_povm(num_qubits):
    # type: (int) -> DetectorPovm
    """
    Get the ideal projective measurement in the computational basis.

    :param num_qubits: Number of qubits.
    :return: Elements `(x)_j (1 + (-1)**n_j Z) / 2`.
    """
    single = DetectorPovm(1, [[0.5, 0.0, 0.0, 0.5], [0.5, 0.0, 0.0, -0.5]])
    return product_povm([single] * num_qubits)


def product_povm(factors):
    # type: (Sequence[DetectorPovm]) -> DetectorPovm
    """
    Tensor product of detectors.

    :param factors: Detectors, the first one on the leading qubits.
    :return: Detector whose element for `n = (n_a, n_b, ...)` is
        `Pi_a(n_a) (x) Pi_b(n_b) (x) ...`.
    :raise ValidationError: No factors.
    """
    if not factors:
        raise ValidationError("need at least one factor")
    coeffs = factors[0].coeffs
    num_qubits = factors[0].num_qubits
    for factor in factors[1:]:
        coeffs = np.einsum("nk,ml->nmkl", coeffs, factor.coeffs).reshape(
            coeffs.shape[0] * factor.coeffs.shape[0],
            coeffs.shape[1] * factor.coeffs.shape[1],
        )
        num_qubits += factor.num_qubits
    return DetectorPovm(num_qubits, coeffs)


def povm_from_avectors(a0):
    # type: (Union[AVector, Sequence[float]]) -> DetectorPovm
    """
    Build a single-qubit detector from its outcome-0 a-vector.

    :param a0: A-vector of the outcome-0 element.
    :return: Detector with `a(1) = (1, 0, 0, 0) - a(0)`.
    """
    vector = a0 if isinstance(a0, AVector) else AVector.from_sequence(a0)
    return DetectorPovm(1, [vector.as_array(), vector.complement().as_array()])


def check_povm(p, tol=config.COMPLETENESS_TOL, positivity_tol=config.POSITIVITY_TOL):
    # type: (DetectorPovm, float, float) -> PovmValidityReport
    """
    Check completeness and positivity.

    The completeness residual is the largest deviation of the summed coefficients
    from those of the identity.

    :param p: POVM.
    :param tol: Largest tolerated completeness residual.
    :param positivity_tol: Largest tolerated negative eigenvalue magnitude.
    :return: Report.
    """
    total = p.coeffs.sum(axis=0)
    total[0] -= 1.0
    residual = float(np.max(np.abs(total)))
    min_eigenvalue = float(np.linalg.eigvalsh(p.matrices()).min())
    is_valid = residual <= tol and min_eigenvalue >= -positivity_tol
    return PovmValidityReport(residual, min_eigenvalue, is_valid)


def reduce_detector(p, keep):
    # type: (DetectorPovm, Sequence[int]) -> DetectorPovm
    """
    Reduce a detector to a subset of its qubits.

    Each reduced element is `Tr_traced(sum_{n_traced} Pi(n)) / 2**(N - K)`. In the
    Pauli basis this keeps the coefficients whose traced indices are all 0,
    summed over the traced outcomes.

    :param p: Detector.
    :param keep: Qubits to keep, in output order.
    :return: Detector on `len(keep)` qubits.
    :raise IdentityReductionError: Every qubit is kept, the error carries `p`.
    :raise ValidationError: Invalid subset.
    """
    n = p.num_qubits
    keep = assert_qubit_subset(keep, n, proper=False)
    if len(keep) == n:
        error = "reduction keeping all {} qubits is the identity".format(n)
        raise IdentityReductionError(error, p)
    traced = tuple(q for q in range(n) if q not in keep)
    tensor = p.coeffs.reshape((2,) * n + (4,) * n)
    index = tuple(
        0 if (axis >= n and axis - n in traced) else slice(None)
        for axis in range(2 * n)
    )
    tensor = tensor[index].sum(axis=traced)
    # Remaining outcome axes are in ascending qubit order, as are Pauli axes.
    remaining = sorted(keep)
    order = [remaining.index(q) for q in keep]
    k = len(keep)
    tensor = tensor.transpose(order + [k + i for i in order])
    return DetectorPovm(k, tensor.reshape(2**k, 4**k))


def detector_distance(a, b):
    # type: (DetectorPovm, DetectorPovm) -> float
    """
    Euclidean distance between the outcome-0 a-vectors of two single-qubit
    detectors.

    :param a: Detector.
    :param b: Detector.
    :return: `|a(0) - b(0)|`.
    :raise ValidationError: Either detector is not single-qubit.
    """
    for povm in (a, b):
        if povm.num_qubits != 1:
            error = "detector distance needs single-qubit detectors, got {}".format(
                povm.num_qubits
            )
            raise ValidationError(error)
    return float(np.linalg.norm(a.coeffs[0] - b.coeffs[0]))


def separability_singular_values(p):
    # type: (DetectorPovm) -> Dict[str, np.ndarray]
    """
    Singular values of each two-qubit element's 4x4 coefficient matrix.

    A product element has exactly one nonzero singular value.

    :param p: Two-qubit detector.
    :return: Descending singular values per outcome bitstring.
    :raise ValidationError: Not a two-qubit detector.
    """
    if p.num_qubits != 2:
        error = "separability analysis needs a two-qubit detector, got {}".format(
            p.num_qubits
        )
        raise ValidationError(error)
    return {
        bits: frozen_array(np.linalg.svd(row.reshape(4, 4), compute_uv=False))
        for bits, row in zip(p.outcomes, p.coeffs)
    }


def random_povm(num_qubits, rng, mixing=0.0):
    # type: (int, np.random.Generator, float) -> DetectorPovm
    """
    Draw a random valid POVM.

    Gaussian Gram matrices `G_n` are normalized as `S^-1/2 G_n S^-1/2` with
    `S = sum(G_n)`, then mixed with the uniform POVM.

    :param num_qubits: Number of qubits.
    :param rng: Random generator.
    :param mixing: Weight of `1 / 2**N` in the result, in `[0, 1]`.
    :return: POVM.
    :raise ValidationError: Mixing out of range.
    """
    if not 0.0 <= mixing <= 1.0:
        error = "mixing must be in [0, 1], got {!r}".format(mixing)
        raise ValidationError(error)
    dim = 2**num_qubits
    x = rng.normal(size=(dim, dim, dim)) + 1j * rng.normal(size=(dim, dim, dim))
    grams = np.einsum("nij,nkj->nik", x, x.conj())
    root = inv_sqrt_psd(grams.sum(axis=0))
    elements = np.einsum("ij,njk,kl->nil", root, grams, root)
    elements = (1.0 - mixing) * elements + mixing * np.eye(dim) / dim
    elements = (elements + np.conj(np.swapaxes(elements, 1, 2))) / 2
    return DetectorPovm.from_matrices(elements)

