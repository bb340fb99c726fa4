"""
Readout error mitigation with characterized detectors.

Observed distributions are modeled as `P_obs = M P` with a left-stochastic
response matrix `M` built from the identity and Z coefficients of the detector.
The ideal distribution `P` is recovered by clipped inversion or by least squares
over the probability simplex. Z twirling, averaging over circuits with `Z`
gates inserted before the measurement, makes the model exact.
"""

import enum
import logging

import numpy as np
import scipy.linalg
from tippo import List, Optional, Sequence, Tuple, Union

from qdetco import config
from qdetco._bases import Value, frozen_array
from qdetco.detector_model import AVector, DetectorPovm
from qdetco.detector_simulator import simulate_state_measurement
from qdetco.tensor_algebra import IDENTITY, SIGMA_Z, bitstrings
from qdetco.validation import (
    IllConditionedError,
    ValidationError,
    assert_bitstring,
    assert_probability_vector,
    qubit_count_for_dim,
)

__all__ = [
    "MitigationMethod",
    "ResponseMatrix",
    "MitigationResult",
    "TwirlPlan",
    "build_response_matrix",
    "build_response_matrix_crosstalk",
    "project_simplex",
    "mitigate_inversion",
    "mitigate_lsq",
    "twirl_plan",
    "twirl_operator",
    "average_twirled",
    "simulate_twirled",
]

logger = logging.getLogger(__name__)

# Signs (-1)**(m * b) of the identity (b = 0) and Z (b = 1) terms for outcome m.
_Z_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0]])


class MitigationMethod(enum.Enum):
    """How a distribution was corrected."""

    INVERSION_CUTOFF = "inversion_cutoff"
    LEAST_SQUARES = "least_squares"


class ResponseMatrix(Value):
    """
    Left-stochastic map from ideal to observed outcome distributions.

    Entry `[n, m]` is the probability of observing `n` when the ideal outcome is
    `m`, both in canonical bitstring order.
    """

    __slots__ = ("num_qubits", "entries", "excluded_weight")
    __fields__ = ("num_qubits", "entries", "excluded_weight")

    def __init__(self, num_qubits, entries, excluded_weight=0.0):
        # type: (int, np.ndarray, float) -> None
        """
        :param num_qubits: Number of qubits.
        :param entries: Matrix of shape `(2**N, 2**N)`.
        :param excluded_weight: Summed magnitude of the X and Y type coefficients
            left out of the construction.
        :raise ValidationError: Wrong shape or a column doesn't sum to 1.
        """
        entries = np.asarray(entries, dtype=float)
        dim = 2**num_qubits
        if entries.shape != (dim, dim):
            error = "expected a response matrix of shape {!r}, got {!r}".format(
                (dim, dim), entries.shape
            )
            raise ValidationError(error)
        deviation = float(np.max(np.abs(entries.sum(axis=0) - 1.0)))
        if deviation > config.STOCHASTIC_TOL:
            error = "response matrix columns sum to 1 within {:.3e} only".format(
                deviation
            )
            raise ValidationError(error)
        self.num_qubits = int(num_qubits)
        self.entries = frozen_array(entries)
        self.excluded_weight = float(excluded_weight)

    @property
    def has_negative_entries(self):
        # type: () -> bool
        """Whether an entry is below `-1e-10`."""
        return bool((self.entries < -config.STOCHASTIC_TOL).any())

    @property
    def condition_number(self):
        # type: () -> float
        """2-norm condition number, infinite when singular."""
        return float(np.linalg.cond(self.entries))


class MitigationResult(Value):
    """Corrected distribution with solver diagnostics."""

    __slots__ = (
        "corrected",
        "method",
        "residual",
        "iterations",
        "converged",
        "gradient_norm",
        "kkt_residual",
        "objective_trace",
    )
    __fields__ = __slots__

    def __init__(
        self,
        corrected,  # type: np.ndarray
        method,  # type: MitigationMethod
        residual,  # type: float
        iterations=0,  # type: int
        converged=True,  # type: bool
        gradient_norm=0.0,  # type: float
        kkt_residual=0.0,  # type: float
        objective_trace=(),  # type: Sequence[float]
    ):
        # type: (...) -> None
        """
        :param corrected: Corrected probability vector.
        :param method: Correction method.
        :param residual: `|M P - P_obs|`.
        :param iterations: Solver iterations, 0 for inversion.
        :param converged: Whether the solver met its tolerance.
        :param gradient_norm: Final projected-gradient norm.
        :param kkt_residual: Largest violation of the optimality conditions on
            coordinates pinned at zero.
        :param objective_trace: Objective value per iteration.
        """
        self.corrected = frozen_array(corrected, dtype=float)
        self.method = MitigationMethod(method)
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.gradient_norm = float(gradient_norm)
        self.kkt_residual = float(kkt_residual)
        self.objective_trace = frozen_array(objective_trace, dtype=float)

    @property
    def num_qubits(self):
        # type: () -> int
        """Number of qubits."""
        return qubit_count_for_dim(self.corrected.shape[0])


class TwirlPlan(Value):
    """Z gate placements of a twirled circuit family, one bitstring per circuit."""

    __slots__ = ("num_qubits", "strings")
    __fields__ = ("num_qubits", "strings")

    def __init__(self, num_qubits, strings):
        # type: (int, Sequence[str]) -> None
        """
        :param num_qubits: Number of qubits.
        :param strings: Distinct bitstrings, `1` where a Z gate is inserted.
        :raise ValidationError: Invalid or repeated strings, or no all-zeros string.
        """
        strings = tuple(strings)
        for string in strings:
            assert_bitstring(string, num_qubits)
        if len(set(strings)) != len(strings):
            raise ValidationError("twirl strings must be distinct")
        if "0" * num_qubits not in strings:
            raise ValidationError("a twirl plan must contain the original circuit")
        self.num_qubits = int(num_qubits)
        self.strings = strings

    def __len__(self):
        # type: () -> int
        return len(self.strings)


def _qubit_pair(item):
    # type: (Union[AVector, Tuple[AVector, AVector]]) -> Tuple[AVector, AVector]
    if isinstance(item, AVector):
        return item, item.complement()
    zero, one = item
    return zero, one


def build_response_matrix(avectors):
    # type: (Sequence[Union[AVector, Tuple[AVector, AVector]]]) -> ResponseMatrix
    """
    Build the response matrix of a product detector.

    `M[n, m] = prod_j (a0_j(n_j) + (-1)**m_j a3_j(n_j))`; X and Y coefficients
    don't enter.

    :param avectors: Per qubit, qubit 0 first, the outcome 0 and 1 a-vectors as
        a pair or the outcome 0 a-vector alone.
    :return: Response matrix.
    :raise ValidationError: No qubits, or a pair doesn't sum to the identity.
    """
    if not avectors:
        raise ValidationError("need the a-vectors of at least one qubit")
    entries = np.ones((1, 1))
    for qubit, item in enumerate(avectors):
        zero, one = _qubit_pair(item)
        total = zero.as_array() + one.as_array()
        total[0] -= 1.0
        residual = float(np.max(np.abs(total)))
        if residual > config.COMPLETENESS_TOL:
            error = "qubit {} a-vectors violate completeness by {:.3e}".format(
                qubit, residual
            )
            raise ValidationError(error)
        single = np.array([[zero.a0, zero.a3], [one.a0, one.a3]]) @ _Z_SIGNS
        entries = np.kron(entries, single)
    return ResponseMatrix(len(avectors), entries)


def _z_type_indices(num_qubits):
    # type: (int) -> np.ndarray
    indices = np.zeros(2**num_qubits, dtype=int)
    for position, bits in enumerate(bitstrings(num_qubits)):
        indices[position] = sum(
            3 * 4 ** (num_qubits - 1 - j) for j, bit in enumerate(bits) if bit == "1"
        )
    return indices


def build_response_matrix_crosstalk(p):
    # type: (DetectorPovm) -> ResponseMatrix
    """
    Build the response matrix of a possibly correlated detector.

    Keeps the coefficients whose Pauli indices are all identity or Z:
    `M[n, m] = sum_I c_I(n) (-1)**(m . I / 3)` over `I` in `{0, 3}**N`. The summed
    magnitude of every other coefficient is reported as `excluded_weight`.

    :param p: Valid detector.
    :return: Response matrix.
    """
    indices = _z_type_indices(p.num_qubits)
    signs = np.ones((1, 1))
    for _ in range(p.num_qubits):
        signs = np.kron(signs, _Z_SIGNS)
    entries = p.coeffs[:, indices] @ signs
    mask = np.ones(p.coeffs.shape[1], dtype=bool)
    mask[indices] = False
    excluded = float(np.abs(p.coeffs[:, mask]).sum())
    logger.debug("response matrix excludes coefficient weight %.3e", excluded)
    return ResponseMatrix(p.num_qubits, entries, excluded)


def project_simplex(v):
    # type: (np.ndarray) -> np.ndarray
    """
    Euclidean projection onto the probability simplex.

    Sorts the entries in decreasing order and finds the largest prefix whose
    shifted entries stay positive.

    :param v: Real vector.
    :return: `argmin |x - v|` over `x >= 0, sum(x) = 1`.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or not v.size:
        raise ValidationError("can only project a non-empty vector")
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    ranks = np.arange(1, v.size + 1)
    support = ranks[u - cumulative / ranks > 0][-1]
    theta = cumulative[support - 1] / support
    return np.maximum(v - theta, 0.0)


def _observed(m, p_tilde):
    # type: (ResponseMatrix, np.ndarray) -> np.ndarray
    return assert_probability_vector(p_tilde, 2**m.num_qubits)


def mitigate_inversion(m, p_tilde):
    # type: (ResponseMatrix, np.ndarray) -> MitigationResult
    """
    Correct a distribution by inverting the response matrix.

    Negative entries of `M^-1 P_obs` are set to zero and the rest renormalized.

    :param m: Response matrix.
    :param p_tilde: Observed distribution.
    :return: Corrected distribution.
    :raise IllConditionedError: Condition number above 1e8.
    """
    observed = _observed(m, p_tilde)
    condition_number = m.condition_number
    if not condition_number <= config.MAX_CONDITION_NUMBER:
        logger.warning("response matrix condition number %.3e", condition_number)
        error = "response matrix condition number {:.3e} exceeds {:.1e}".format(
            condition_number, config.MAX_CONDITION_NUMBER
        )
        raise IllConditionedError(error, condition_number)
    raw = scipy.linalg.solve(m.entries, observed)
    corrected = np.clip(raw, 0.0, None)
    corrected /= corrected.sum()
    residual = float(np.linalg.norm(m.entries @ corrected - observed))
    return MitigationResult(corrected, MitigationMethod.INVERSION_CUTOFF, residual)


def mitigate_lsq(
    m,  # type: ResponseMatrix
    p_tilde,  # type: np.ndarray
    tol=config.LSQ_TOL,  # type: float
    max_iterations=config.LSQ_MAX_ITERATIONS,  # type: int
):
    # type: (...) -> MitigationResult
    """
    Correct a distribution by least squares over the probability simplex.

    Minimizes `|M P - P_obs|**2` with monotone accelerated projected gradient
    steps of size `1 / L`, `L = 2 |M|**2`, until the projected-gradient norm
    `L |P - proj(P - grad / L)|` is at most `tol`.

    :param m: Response matrix.
    :param p_tilde: Observed distribution, also the starting point.
    :param tol: Projected-gradient tolerance.
    :param max_iterations: Iteration cap.
    :return: Corrected distribution, flagged when the cap was hit.
    """
    observed = _observed(m, p_tilde)
    entries = m.entries
    lipschitz = 2.0 * float(np.linalg.norm(entries, 2)) ** 2

    def objective(x):
        # type: (np.ndarray) -> float
        r = entries @ x - observed
        return float(r @ r)

    def gradient(x):
        # type: (np.ndarray) -> np.ndarray
        return 2.0 * entries.T @ (entries @ x - observed)

    def gradient_norm(x):
        # type: (np.ndarray) -> float
        step = project_simplex(x - gradient(x) / lipschitz)
        return lipschitz * float(np.linalg.norm(x - step))

    x = project_simplex(observed)
    y = x
    t = 1.0
    value = objective(x)
    trace = [value]  # type: List[float]
    norm = gradient_norm(x)
    iterations = 0
    while norm > tol and iterations < max_iterations:
        z = project_simplex(y - gradient(y) / lipschitz)
        z_value = objective(z)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        previous = x
        if z_value <= value:
            x, value = z, z_value
        y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - previous)
        t = t_next
        iterations += 1
        trace.append(value)
        norm = gradient_norm(x)

    converged = norm <= tol
    if not converged:
        logger.warning(
            "least squares stopped at %d iterations, projected gradient %.3e",
            iterations,
            norm,
        )
    g = gradient(x)
    support = x > 0
    multiplier = float(g[support].mean())
    active = g[~support] - multiplier
    kkt_residual = float(max(0.0, -active.min())) if active.size else 0.0
    if kkt_residual > 10 * tol:
        logger.warning("least squares KKT residual %.3e", kkt_residual)
    return MitigationResult(
        x,
        MitigationMethod.LEAST_SQUARES,
        float(np.sqrt(value)),
        iterations,
        converged,
        norm,
        kkt_residual,
        trace,
    )


def twirl_plan(num_qubits):
    # type: (int) -> TwirlPlan
    """
    Get the full Z twirl family.

    :param num_qubits: Number of qubits.
    :return: All `2**N` bitstrings in canonical order, all-zeros first.
    """
    if num_qubits < 1:
        error = "number of qubits must be at least 1, got {!r}".format(num_qubits)
        raise ValidationError(error)
    return TwirlPlan(num_qubits, bitstrings(num_qubits))


def twirl_operator(k):
    # type: (str) -> np.ndarray
    """
    Get the gate layer of a twirl bitstring.

    :param k: Bitstring, qubit 0 first.
    :return: `Z(K) = (x)_j Z**K_j`.
    """
    assert_bitstring(k, len(k))
    operator = np.ones((1, 1), dtype=complex)
    for bit in k:
        operator = np.kron(operator, SIGMA_Z if bit == "1" else IDENTITY)
    return operator


def average_twirled(p_tilde_per_k):
    # type: (Sequence[np.ndarray]) -> np.ndarray
    """
    Average the distributions observed over a full twirl family.

    :param p_tilde_per_k: One distribution per bitstring of :func:`twirl_plan`.
    :return: Elementwise mean.
    :raise ValidationError: Not exactly `2**N` distributions.
    """
    if not p_tilde_per_k:
        raise ValidationError("no twirled distributions given")
    distributions = [assert_probability_vector(p) for p in p_tilde_per_k]
    size = distributions[0].shape[0]
    if any(d.shape[0] != size for d in distributions):
        raise ValidationError("twirled distributions differ in size")
    if len(distributions) != size:
        error = "expected {} twirled distributions, got {}".format(
            size, len(distributions)
        )
        raise ValidationError(error)
    return np.mean(distributions, axis=0)


def simulate_twirled(
    p,  # type: DetectorPovm
    rho,  # type: np.ndarray
    plan=None,  # type: Optional[TwirlPlan]
    shots=config.DEFAULT_SHOTS,  # type: int
    runs=1,  # type: int
    seed=0,  # type: int
):
    # type: (...) -> List[np.ndarray]
    """
    Simulate measuring a state behind every circuit of a twirl family.

    Circuit `k` measures `Z(K) rho Z(K)`, and run `r` of it samples from
    `substream(seed, k, r)`.

    :param p: Detector.
    :param rho: State.
    :param plan: Twirl family, the full one when None.
    :param shots: Shots per run, 0 for exact probabilities.
    :param runs: Number of runs.
    :param seed: Seed.
    :return: Observed distributions in plan order.
    """
    if plan is None:
        plan = twirl_plan(p.num_qubits)
    elif plan.num_qubits != p.num_qubits:
        error = "twirl plan on {} qubits, detector on {}".format(
            plan.num_qubits, p.num_qubits
        )
        raise ValidationError(error)
    rho = np.asarray(rho, dtype=complex)
    distributions = []
    for index, k in enumerate(plan.strings):
        z = twirl_operator(k)
        distributions.append(
            simulate_state_measurement(
                p, z @ rho @ z, shots, runs, seed, stream=(index,)
            )
        )
    return distributions
