# type: ignore

import numpy as np
import pytest

from qdetco.state_library import (
    TOKENS,
    TestState,
    format_label,
    ghz_state,
    informational_completeness_check,
    parse_label,
    pauli_eigenstate,
    prep_unitary,
    product_state,
    single_qubit_state,
    test_state_set,
)
from qdetco.tensor_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z
from qdetco.validation import ValidationError

_AXIS_OPERATORS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@pytest.mark.parametrize("token", TOKENS)
def test_preparation_matches_density(token):
    state = product_state((token,))
    u = prep_unitary(state.prep_sequence[0])
    zero = np.array([[1, 0], [0, 0]])
    assert np.allclose(u @ zero @ u.conj().T, state.density)


@pytest.mark.parametrize(
    "axis, sign", [(a, s) for a in ("x", "y", "z") for s in ("+", "-")]
)
def test_pauli_eigenstates(axis, sign):
    density = pauli_eigenstate(axis, sign).density
    expectation = np.trace(density @ _AXIS_OPERATORS[axis]).real
    assert expectation == pytest.approx(1.0 if sign == "+" else -1.0)
    assert np.trace(density).real == pytest.approx(1.0)


def test_unknown_tokens():
    with pytest.raises(ValidationError):
        single_qubit_state("x")
    with pytest.raises(ValidationError):
        pauli_eigenstate("w", "+")
    with pytest.raises(ValidationError):
        prep_unitary(["T"])
    with pytest.raises(ValidationError):
        product_state(())


def test_product_state():
    state = product_state(("1", "+"))
    assert state.num_qubits == 2
    assert state.label_text == "1,+"
    expected = np.kron(single_qubit_state("1"), single_qubit_state("+"))
    assert np.allclose(state.density, expected)
    assert state.prep_sequence == (("X",), ("H",))


def test_test_state_size_mismatch():
    with pytest.raises(ValidationError):
        TestState(2, ("0",), np.eye(4) / 4, [()])


def test_state_set_order():
    states = test_state_set(2)
    assert len(states) == 36
    assert states[0].label == ("0", "0")
    assert states[1].label == ("0", "1")
    assert states[6].label == ("1", "0")
    assert states[-1].label == ("-i", "-i")


def test_builders_not_collected():
    assert test_state_set.__test__ is False
    assert TestState.__test__ is False


def test_state_set_cap():
    assert len(test_state_set(3)) == 216
    with pytest.raises(ValidationError):
        test_state_set(4)
    with pytest.raises(ValidationError):
        test_state_set(0)


@pytest.mark.parametrize("num_qubits", [1, 2])
def test_state_set_is_complete(num_qubits):
    check = informational_completeness_check(test_state_set(num_qubits))
    assert check
    assert check.rank == 4**num_qubits
    assert np.isfinite(check.condition_number)


def test_incomplete_set():
    states = [product_state((t,)) for t in ("0", "1", "+", "-")]
    check = informational_completeness_check(states)
    assert not check
    assert check.rank == 3
    assert check.condition_number == float("inf")
    with pytest.raises(ValidationError):
        informational_completeness_check([])


def test_ghz_state():
    bell = ghz_state(2)
    assert bell[0, 0] == pytest.approx(0.5)
    assert bell[0, 3] == pytest.approx(0.5)
    assert np.trace(bell).real == pytest.approx(1.0)
    assert ghz_state(3)[7, 0] == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        ghz_state(1)


def test_labels():
    assert parse_label("0, +i,-") == ("0", "+i", "-")
    assert format_label(("0", "+i", "-")) == "0,+i,-"
    with pytest.raises(ValidationError):
        parse_label("0,z")


if __name__ == "__main__":
    pytest.main()
