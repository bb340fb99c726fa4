"""
Published single-qubit detector characterizations of two five-qubit devices.

Each table lists the outcome-0 a-vector of qubits 0 to 4, measured one qubit at
a time (`individual`) or on all qubits at once (`parallel`).
"""

from tippo import Dict, Optional, Sequence, Tuple

from qdetco.detector_model import (
    AVector,
    DetectorPovm,
    povm_from_avectors,
    product_povm,
)
from qdetco.validation import ValidationError, assert_qubit_subset

__all__ = [
    "DEVICES",
    "device_names",
    "device_avectors",
    "device_detectors",
    "device_povm",
]


def _table(*rows):
    # type: (*Tuple[float, float, float, float]) -> Tuple[AVector, ...]
    return tuple(AVector(*row) for row in rows)


DEVICES = {
    "ibmqx4-individual": _table(
        (0.590, -0.006, -0.0063, 0.3562),
        (0.544, 0.001, 0.0008, 0.4059),
        (0.5427, -0.0179, -0.0173, 0.4294),
        (0.5381, -0.003, -0.0030, 0.4054),
        (0.521, -0.012, -0.0122, 0.3798),
    ),
    "ibmqx4-parallel": _table(
        (0.587, -0.000, -0.0001, 0.3618),
        (0.5483, 0.006, 0.0053, 0.4116),
        (0.5329, -0.0065, -0.0064, 0.4430),
        (0.4535, 0.002, 0.0023, 0.4229),
        (0.522, 0.000, -0.0002, 0.3975),
    ),
    "ibmqx2-individual": _table(
        (0.545, -0.013, -0.012, 0.424),
        (0.530, 0.003, 0.0028, 0.4625),
        (0.5159, 0.0007, 0.0005, 0.4788),
        (0.534, 0.003, 0.0029, 0.4600),
        (0.5181, 0.001, 0.0004, 0.4417),
    ),
    "ibmqx2-parallel": _table(
        (0.544, 0.016, 0.0163, 0.4130),
        (0.5199, 0.0115, 0.0109, 0.4703),
        (0.5181, 0.0320, 0.0318, 0.4749),
        (0.5304, 0.0244, 0.0250, 0.4634),
        (0.5149, 0.0121, 0.0121, 0.4594),
    ),
}  # type: Dict[str, Tuple[AVector, ...]]


def device_names():
    # type: () -> Tuple[str, ...]
    """
    :return: Sorted names of the tabulated characterizations.
    """
    return tuple(sorted(DEVICES))


def device_avectors(name):
    # type: (str) -> Tuple[AVector, ...]
    """
    Get the tabulated outcome-0 a-vectors of a device.

    :param name: E.g. `ibmqx4-individual`.
    :return: One a-vector per qubit, qubit 0 first.
    :raise ValidationError: Unknown name.
    """
    try:
        return DEVICES[name]
    except KeyError:
        error = "unknown device {!r}, expected one of {}".format(name, device_names())
        raise ValidationError(error)


def device_detectors(name):
    # type: (str) -> Dict[int, DetectorPovm]
    """
    Get the single-qubit detectors of a device.

    :param name: Device name.
    :return: Detector per qubit.
    """
    return {q: povm_from_avectors(a) for q, a in enumerate(device_avectors(name))}


def device_povm(name, qubits=None):
    # type: (str, Optional[Sequence[int]]) -> DetectorPovm
    """
    Build the product detector of some qubits of a device.

    :param name: Device name.
    :param qubits: Qubits in detector order, all of them when None.
    :return: Product detector.
    """
    avectors = device_avectors(name)
    if qubits is None:
        qubits = range(len(avectors))
    qubits = assert_qubit_subset(qubits, len(avectors), proper=False)
    if not qubits:
        raise ValidationError("need at least one qubit")
    return product_povm([povm_from_avectors(avectors[q]) for q in qubits])
