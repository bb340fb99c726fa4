"""
JSON documents exchanged by the command line tools.

Every document carries a `schema` version string. Documents are written with
sorted keys and two-space indentation; floats use the shortest repr that reads
back to the same value, so writing and reading is bit-exact.
"""

import json
import logging

import numpy as np
from tippo import Any, Dict, List, Mapping, Optional, Tuple, Type, Union

from qdetco.analysis import ComparisonTable
from qdetco.detector_model import DetectorPovm
from qdetco.detector_simulator import CountsDataset
from qdetco.mitigation import MitigationResult, ResponseMatrix
from qdetco.state_library import format_label, parse_label
from qdetco.tensor_algebra import bitstrings
from qdetco.tomography_engine import BootstrapReport, MleResult
from qdetco.validation import (
    SchemaError,
    ValidationError,
    assert_probability_vector,
    qubit_count_for_dim,
)

__all__ = [
    "COUNTS_SCHEMA",
    "POVM_SCHEMA",
    "DISTRIBUTION_SCHEMA",
    "TABLE_SCHEMA",
    "DIAGNOSTICS_SCHEMA",
    "RESPONSE_SCHEMA",
    "BOOTSTRAP_SCHEMA",
    "REPORT_SCHEMA",
    "dumps",
    "loads",
    "read_json",
    "write_json",
    "counts_to_json",
    "counts_from_json",
    "povm_to_json",
    "povm_from_json",
    "distribution_to_json",
    "distribution_from_json",
    "table_to_json",
    "table_from_json",
    "diagnostics_to_json",
    "response_to_json",
    "response_from_json",
    "bootstrap_to_json",
    "bootstrap_from_json",
]

logger = logging.getLogger(__name__)

COUNTS_SCHEMA = "qdt-counts/1"
POVM_SCHEMA = "qdt-povm/1"
DISTRIBUTION_SCHEMA = "qdt-distribution/1"
TABLE_SCHEMA = "qdt-table/1"
DIAGNOSTICS_SCHEMA = "qdt-diagnostics/1"
RESPONSE_SCHEMA = "qdt-response/1"
BOOTSTRAP_SCHEMA = "qdt-bootstrap/1"
REPORT_SCHEMA = "qdt-report/1"

_Number = (int, float)


def dumps(payload):
    # type: (Mapping[str, Any]) -> str
    """
    Serialize a document.

    :param payload: JSON-compatible mapping without NaN or infinities.
    :return: Text ending with a newline.
    """
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads(text):
    # type: (str) -> Dict[str, Any]
    """
    Parse a document.

    :param text: JSON text.
    :return: Top-level object.
    :raise SchemaError: Malformed JSON, reported with line and column, or not an
        object.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        error = "malformed JSON at line {} column {}: {}".format(
            e.lineno, e.colno, e.msg
        )
        raise SchemaError(error)
    if not isinstance(obj, dict):
        raise SchemaError("expected a JSON object at the top level")
    return obj


def read_json(path):
    # type: (str) -> Dict[str, Any]
    """
    Read a document from a file.

    :param path: File path.
    :return: Top-level object.
    """
    with open(path, "r", encoding="utf-8") as f:
        return loads(f.read())


def write_json(path, payload):
    # type: (str, Mapping[str, Any]) -> None
    """
    Write a document to a file.

    :param path: File path.
    :param payload: Document.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(payload))
    logger.info("wrote %s document to %s", payload.get("schema"), path)


def _join(path, key):
    # type: (str, Union[str, int]) -> str
    if isinstance(key, int):
        return "{}[{}]".format(path, key)
    return "{}.{}".format(path, key) if path else key


def _get(obj, key, kind, path="", default=None):
    # type: (Any, str, Union[Type, Tuple[Type, ...]], str, Any) -> Any
    field = _join(path, key)
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    if key not in obj:
        if default is not None:
            return default
        raise SchemaError("missing field", field)
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        kinds = kind if isinstance(kind, tuple) else (kind,)
        error = "expected {}, got {}".format(
            " or ".join(k.__name__ for k in kinds), type(value).__name__
        )
        raise SchemaError(error, field)
    return value


def _expect_schema(obj, schema):
    # type: (Mapping[str, Any], str) -> None
    found = _get(obj, "schema", str)
    if found != schema:
        error = "expected {!r}, got {!r}".format(schema, found)
        raise SchemaError(error, "schema")


def _numbers(value, size, path):
    # type: (Any, int, str) -> List[float]
    if not isinstance(value, list) or len(value) != size:
        raise SchemaError("expected a list of {} numbers".format(size), path)
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, _Number):
            raise SchemaError("expected a number", _join(path, i))
    return [float(item) for item in value]


def _num_qubits(obj):
    # type: (Mapping[str, Any]) -> int
    num_qubits = _get(obj, "num_qubits", int)
    if num_qubits < 1:
        raise SchemaError("must be at least 1", "num_qubits")
    return num_qubits


def _coeff_rows(obj, key, num_qubits):
    # type: (Mapping[str, Any], str, int) -> np.ndarray
    mapping = _get(obj, key, dict)
    outcomes = bitstrings(num_qubits)
    extra = sorted(set(mapping).difference(outcomes))
    if extra:
        raise SchemaError("unknown outcomes {}".format(extra), key)
    rows = []
    for bits in outcomes:
        if bits not in mapping:
            raise SchemaError("missing outcome", _join(key, bits))
        rows.append(_numbers(mapping[bits], 4**num_qubits, _join(key, bits)))
    return np.array(rows)


def _coeff_mapping(num_qubits, rows):
    # type: (int, np.ndarray) -> Dict[str, List[float]]
    return {b: [float(v) for v in row] for b, row in zip(bitstrings(num_qubits), rows)}


def counts_to_json(d):
    # type: (CountsDataset) -> Dict[str, Any]
    """
    :param d: Dataset.
    :return: `qdt-counts/1` document, zero counts omitted.
    """
    outcomes = bitstrings(d.num_qubits)
    return {
        "schema": COUNTS_SCHEMA,
        "num_qubits": d.num_qubits,
        "shots": d.shots,
        "seed": d.seed,
        "metadata": dict(d.metadata),
        "runs": [
            {
                "circuits": [
                    {
                        "state": format_label(label),
                        "counts": {
                            outcomes[n]: int(value)
                            for n, value in enumerate(row)
                            if value
                        },
                    }
                    for label, row in zip(d.labels, run)
                ]
            }
            for run in d.counts
        ],
    }


def counts_from_json(obj):
    # type: (Mapping[str, Any]) -> CountsDataset
    """
    :param obj: `qdt-counts/1` document, missing outcomes meaning zero counts.
    :return: Dataset.
    :raise SchemaError: The document doesn't match the schema.
    """
    _expect_schema(obj, COUNTS_SCHEMA)
    num_qubits = _num_qubits(obj)
    shots = _get(obj, "shots", int)
    seed = _get(obj, "seed", int, default=0)
    metadata = _get(obj, "metadata", dict, default={})
    for key, value in metadata.items():
        if not isinstance(value, str):
            raise SchemaError("expected str", _join("metadata", key))
    runs = _get(obj, "runs", list)
    if not runs:
        raise SchemaError("no runs", "runs")
    index = {bits: n for n, bits in enumerate(bitstrings(num_qubits))}
    labels = None  # type: Optional[List[Tuple[str, ...]]]
    counts = []
    for r, run in enumerate(runs):
        path = _join("runs", r)
        run_labels = []
        run_counts = []
        for c, circuit in enumerate(_get(run, "circuits", list, path)):
            circuit_path = _join(_join(path, "circuits"), c)
            state = _get(circuit, "state", str, circuit_path)
            try:
                run_labels.append(parse_label(state))
            except ValidationError as e:
                raise SchemaError(str(e), _join(circuit_path, "state"))
            row = [0] * len(index)
            for bits, value in _get(circuit, "counts", dict, circuit_path).items():
                field = _join(_join(circuit_path, "counts"), bits)
                if bits not in index:
                    raise SchemaError("unknown outcome", field)
                if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                    raise SchemaError("expected a non-negative integer", field)
                row[index[bits]] = value
            run_counts.append(row)
        if labels is None:
            labels = run_labels
        elif run_labels != labels:
            raise SchemaError("circuits differ from those of run 0", path)
        counts.append(run_counts)
    assert labels is not None
    try:
        return CountsDataset(
            num_qubits, shots, labels, np.array(counts, dtype=np.int64), seed, metadata
        )
    except ValidationError as e:
        raise SchemaError(str(e), "runs")


def povm_to_json(p):
    # type: (DetectorPovm) -> Dict[str, Any]
    """
    :param p: Detector.
    :return: `qdt-povm/1` document with the Pauli coefficients of each element.
    """
    return {
        "schema": POVM_SCHEMA,
        "num_qubits": p.num_qubits,
        "elements": _coeff_mapping(p.num_qubits, p.coeffs),
    }


def povm_from_json(obj):
    # type: (Mapping[str, Any]) -> DetectorPovm
    """
    :param obj: `qdt-povm/1` document.
    :return: Detector.
    :raise SchemaError: The document doesn't match the schema.
    """
    _expect_schema(obj, POVM_SCHEMA)
    num_qubits = _num_qubits(obj)
    return DetectorPovm(num_qubits, _coeff_rows(obj, "elements", num_qubits))


def distribution_to_json(probabilities, mitigation=None):
    # type: (np.ndarray, Optional[MitigationResult]) -> Dict[str, Any]
    """
    :param probabilities: Distribution over `2**N` outcomes.
    :param mitigation: Result the distribution came from, recorded alongside.
    :return: `qdt-distribution/1` document.
    """
    probabilities = np.asarray(probabilities, dtype=float)
    num_qubits = qubit_count_for_dim(probabilities.shape[0])
    payload = {
        "schema": DISTRIBUTION_SCHEMA,
        "num_qubits": num_qubits,
        "probabilities": {
            b: float(v) for b, v in zip(bitstrings(num_qubits), probabilities)
        },
    }  # type: Dict[str, Any]
    if mitigation is not None:
        payload["mitigation"] = {
            "method": mitigation.method.value,
            "residual": mitigation.residual,
            "iterations": mitigation.iterations,
            "converged": mitigation.converged,
            "gradient_norm": mitigation.gradient_norm,
            "kkt_residual": mitigation.kkt_residual,
        }
    return payload


def distribution_from_json(obj):
    # type: (Mapping[str, Any]) -> np.ndarray
    """
    :param obj: `qdt-distribution/1` document, missing outcomes meaning zero.
    :return: Probability vector.
    :raise SchemaError: The document doesn't match the schema.
    """
    _expect_schema(obj, DISTRIBUTION_SCHEMA)
    num_qubits = _num_qubits(obj)
    index = {bits: n for n, bits in enumerate(bitstrings(num_qubits))}
    vector = np.zeros(len(index))
    for bits, value in _get(obj, "probabilities", dict).items():
        field = _join("probabilities", bits)
        if bits not in index:
            raise SchemaError("unknown outcome", field)
        if isinstance(value, bool) or not isinstance(value, _Number):
            raise SchemaError("expected a number", field)
        vector[index[bits]] = value
    try:
        return assert_probability_vector(vector)
    except ValidationError as e:
        raise SchemaError(str(e), "probabilities")


def table_to_json(t):
    # type: (ComparisonTable) -> Dict[str, Any]
    """
    :param t: Table.
    :return: `qdt-table/1` document, absent entries as null.
    """
    return {
        "schema": TABLE_SCHEMA,
        "rows": list(t.rows),
        "cols": list(t.cols),
        "distances": [
            [None if np.isnan(v) else float(v) for v in row] for row in t.distances
        ],
        "floor": t.fluctuation_scale,
        "missing": [list(pair) for pair in t.missing],
    }


def table_from_json(obj):
    # type: (Mapping[str, Any]) -> ComparisonTable
    """
    :param obj: `qdt-table/1` document.
    :return: Table.
    :raise SchemaError: The document doesn't match the schema.
    """
    _expect_schema(obj, TABLE_SCHEMA)
    rows = _get(obj, "rows", list)
    cols = _get(obj, "cols", list)
    entries = _get(obj, "distances", list)
    if len(entries) != len(rows):
        raise SchemaError("expected {} rows".format(len(rows)), "distances")
    distances = np.full((len(rows), len(cols)), np.nan)
    for r, row in enumerate(entries):
        path = _join("distances", r)
        if not isinstance(row, list) or len(row) != len(cols):
            raise SchemaError("expected {} entries".format(len(cols)), path)
        for c, value in enumerate(row):
            if value is None:
                continue
            if isinstance(value, bool) or not isinstance(value, _Number):
                raise SchemaError("expected a number or null", _join(path, c))
            distances[r, c] = value
    missing = _get(obj, "missing", list, default=[])
    try:
        return ComparisonTable(
            rows,
            cols,
            distances,
            _get(obj, "floor", _Number),
            [tuple(pair) for pair in missing],
        )
    except (TypeError, ValueError) as e:
        raise SchemaError(str(e))


def diagnostics_to_json(result):
    # type: (MleResult) -> Dict[str, Any]
    """
    :param result: Reconstruction result.
    :return: `qdt-diagnostics/1` document.
    """
    return {
        "schema": DIAGNOSTICS_SCHEMA,
        "iterations": result.iterations,
        "final_step_norm": result.final_step_norm,
        "converged": result.converged,
        "log_likelihood_trace": [float(v) for v in result.log_likelihood_trace],
        "max_completeness_residual": result.max_completeness_residual,
        "min_iterate_eigenvalue": result.min_iterate_eigenvalue,
        "max_likelihood_drop": result.max_likelihood_drop,
        "max_s_asymmetry": result.max_s_asymmetry,
    }


def response_to_json(m):
    # type: (ResponseMatrix) -> Dict[str, Any]
    """
    :param m: Response matrix.
    :return: `qdt-response/1` document, entries row-major with the outcome legend.
    """
    return {
        "schema": RESPONSE_SCHEMA,
        "num_qubits": m.num_qubits,
        "outcomes": list(bitstrings(m.num_qubits)),
        "entries": [[float(v) for v in row] for row in m.entries],
        "excluded_weight": m.excluded_weight,
    }


def response_from_json(obj):
    # type: (Mapping[str, Any]) -> ResponseMatrix
    """
    :param obj: `qdt-response/1` document.
    :return: Response matrix.
    :raise SchemaError: The document doesn't match the schema.
    """
    _expect_schema(obj, RESPONSE_SCHEMA)
    num_qubits = _num_qubits(obj)
    dim = 2**num_qubits
    if _get(obj, "outcomes", list) != list(bitstrings(num_qubits)):
        raise SchemaError("outcomes are not in canonical order", "outcomes")
    entries = _get(obj, "entries", list)
    if len(entries) != dim:
        raise SchemaError("expected {} rows".format(dim), "entries")
    rows = [_numbers(row, dim, _join("entries", r)) for r, row in enumerate(entries)]
    try:
        return ResponseMatrix(
            num_qubits, rows, _get(obj, "excluded_weight", _Number, default=0.0)
        )
    except ValidationError as e:
        raise SchemaError(str(e), "entries")


def bootstrap_to_json(report):
    # type: (BootstrapReport) -> Dict[str, Any]
    """
    :param report: Bootstrap report.
    :return: `qdt-bootstrap/1` document.
    """
    return {
        "schema": BOOTSTRAP_SCHEMA,
        "num_qubits": report.num_qubits,
        "num_resamples": report.num_resamples,
        "num_excluded": report.num_excluded,
        "std": _coeff_mapping(report.num_qubits, report.std),
        "mean": _coeff_mapping(report.num_qubits, report.mean),
    }


def bootstrap_from_json(obj):
    # type: (Mapping[str, Any]) -> BootstrapReport
    """
    :param obj: `qdt-bootstrap/1` document.
    :return: Bootstrap report.
    :raise SchemaError: The document doesn't match the schema.
    """
    _expect_schema(obj, BOOTSTRAP_SCHEMA)
    num_qubits = _num_qubits(obj)
    try:
        return BootstrapReport(
            num_qubits,
            _coeff_rows(obj, "std", num_qubits),
            _coeff_rows(obj, "mean", num_qubits),
            _get(obj, "num_resamples", int),
            _get(obj, "num_excluded", int, default=0),
        )
    except ValidationError as e:
        if isinstance(e, SchemaError):
            raise
        raise SchemaError(str(e), "std")
