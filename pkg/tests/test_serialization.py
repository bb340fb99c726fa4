# type: ignore

import json

import numpy as np
import pytest

from qdetco.analysis import ComparisonTable
from qdetco.detector_model import random_povm
from qdetco.detector_simulator import (
    NoisySpec,
    make_noisy_detector,
    simulate_qdt_experiment,
)
from qdetco.mitigation import (
    ResponseMatrix,
    build_response_matrix_crosstalk,
    mitigate_lsq,
)
from qdetco.serialization import (
    bootstrap_from_json,
    bootstrap_to_json,
    counts_from_json,
    counts_to_json,
    diagnostics_to_json,
    distribution_from_json,
    distribution_to_json,
    dumps,
    loads,
    povm_from_json,
    povm_to_json,
    read_json,
    response_from_json,
    response_to_json,
    table_from_json,
    table_to_json,
    write_json,
)
from qdetco.tomography_engine import BootstrapReport, MleConfig, run_mle
from qdetco.validation import SchemaError


def _dataset():
    p = make_noisy_detector([NoisySpec(0.05, 0.08), NoisySpec(0.02, 0.1)])
    return simulate_qdt_experiment(
        p, shots=64, runs=2, seed=3, metadata={"device": "test"}
    )


def test_counts_document():
    d = _dataset()
    document = counts_to_json(d)
    assert document["schema"] == "qdt-counts/1"
    circuit = document["runs"][1]["circuits"][7]
    assert circuit["state"] == "1,1"
    assert all(value > 0 for value in circuit["counts"].values())
    assert counts_from_json(loads(dumps(document))) == d


def test_counts_missing_outcomes_are_zero():
    document = {
        "schema": "qdt-counts/1",
        "num_qubits": 1,
        "shots": 10,
        "runs": [{"circuits": [{"state": "0", "counts": {"0": 10}}]}],
    }
    d = counts_from_json(document)
    assert d.counts.tolist() == [[[10, 0]]]
    assert d.seed == 0
    assert d.metadata == {}


@pytest.mark.parametrize(
    "change, field",
    [
        (lambda doc: doc.update(schema="qdt-povm/1"), "schema"),
        (lambda doc: doc.pop("shots"), "shots"),
        (lambda doc: doc.update(shots="10"), "shots"),
        (lambda doc: doc.update(num_qubits=True), "num_qubits"),
        (
            lambda doc: doc["runs"][0]["circuits"][0]["counts"].update({"0": 2.5}),
            "runs[0].circuits[0].counts.0",
        ),
        (
            lambda doc: doc["runs"][0]["circuits"][0]["counts"].update({"2": 1}),
            "runs[0].circuits[0].counts.2",
        ),
        (
            lambda doc: doc["runs"][0]["circuits"][0].update(state="z"),
            "runs[0].circuits[0].state",
        ),
        (lambda doc: doc.update(runs=[]), "runs"),
    ],
)
def test_counts_schema_errors(change, field):
    document = {
        "schema": "qdt-counts/1",
        "num_qubits": 1,
        "shots": 10,
        "runs": [{"circuits": [{"state": "0", "counts": {"0": 10}}]}],
    }
    change(document)
    with pytest.raises(SchemaError) as info:
        counts_from_json(document)
    assert info.value.field == field


def test_counts_totals_checked():
    document = {
        "schema": "qdt-counts/1",
        "num_qubits": 1,
        "shots": 10,
        "runs": [{"circuits": [{"state": "0", "counts": {"0": 9}}]}],
    }
    with pytest.raises(SchemaError, match="runs"):
        counts_from_json(document)


def test_povm_bit_exact():
    p = random_povm(2, np.random.default_rng(0), mixing=0.3)
    text = dumps(povm_to_json(p))
    restored = povm_from_json(loads(text))
    assert restored == p
    assert dumps(povm_to_json(restored)) == text


def test_povm_schema_errors():
    document = povm_to_json(random_povm(1, np.random.default_rng(1)))
    document["elements"]["1"] = [0.5, 0.0, 0.0]
    with pytest.raises(SchemaError) as info:
        povm_from_json(document)
    assert info.value.field == "elements.1"
    del document["elements"]["1"]
    with pytest.raises(SchemaError):
        povm_from_json(document)


def test_distribution_document():
    p = np.array([0.5, 0.25, 0.25, 0.0])
    document = distribution_to_json(p)
    assert document["num_qubits"] == 2
    assert document["probabilities"]["01"] == 0.25
    assert np.array_equal(distribution_from_json(document), p)
    partial = {
        "schema": "qdt-distribution/1",
        "num_qubits": 1,
        "probabilities": {"1": 1},
    }
    assert distribution_from_json(partial).tolist() == [0.0, 1.0]
    partial["probabilities"]["0"] = 0.5
    with pytest.raises(SchemaError):
        distribution_from_json(partial)


def test_distribution_with_mitigation():
    m = build_response_matrix_crosstalk(make_noisy_detector(NoisySpec(0.1, 0.06)))
    result = mitigate_lsq(m, [0.6, 0.4])
    document = json.loads(dumps(distribution_to_json(result.corrected, result)))
    assert document["mitigation"]["method"] == "least_squares"
    assert document["mitigation"]["converged"] is True


def test_table_document():
    table = ComparisonTable(
        ["0", "1"], ["0", "1"], [[np.nan, 0.01], [0.02, np.nan]], 2e-3
    )
    document = json.loads(dumps(table_to_json(table)))
    assert document["distances"][0][0] is None
    assert document["floor"] == 2e-3
    assert table_from_json(document) == table
    document["distances"][0][1] = "far"
    with pytest.raises(SchemaError) as info:
        table_from_json(document)
    assert info.value.field == "distances[0][1]"


def test_response_document():
    m = build_response_matrix_crosstalk(
        make_noisy_detector(NoisySpec(0.1, 0.06, tilt_x=0.01))
    )
    document = response_to_json(m)
    assert document["outcomes"] == ["0", "1"]
    assert response_from_json(loads(dumps(document))) == m
    document["outcomes"] = ["1", "0"]
    with pytest.raises(SchemaError):
        response_from_json(document)
    broken = response_to_json(ResponseMatrix(1, np.eye(2)))
    broken["entries"][0][0] = 0.5
    with pytest.raises(SchemaError):
        response_from_json(broken)


def test_bootstrap_document():
    report = BootstrapReport(1, np.full((2, 4), 1e-3), np.full((2, 4), 0.25), 50, 2)
    restored = bootstrap_from_json(loads(dumps(bootstrap_to_json(report))))
    assert restored == report
    document = bootstrap_to_json(report)
    document["std"]["0"][0] = -1.0
    with pytest.raises(SchemaError):
        bootstrap_from_json(document)


def test_diagnostics_document():
    result = run_mle(_dataset(), MleConfig(max_iterations=3, sample_every=1))
    document = json.loads(dumps(diagnostics_to_json(result)))
    assert document["schema"] == "qdt-diagnostics/1"
    assert document["iterations"] == 3
    assert document["converged"] is False
    assert len(document["log_likelihood_trace"]) == 4


def test_dumps_is_canonical():
    text = dumps({"b": 1, "a": [0.1, 2]})
    assert text == '{\n  "a": [\n    0.1,\n    2\n  ],\n  "b": 1\n}\n'
    with pytest.raises(ValueError):
        dumps({"a": float("nan")})


def test_loads_errors():
    with pytest.raises(SchemaError, match="line 2 column"):
        loads('{\n  "a": }')
    with pytest.raises(SchemaError):
        loads("[1, 2]")


def test_files(tmp_path):
    path = str(tmp_path / "povm.json")
    p = random_povm(1, np.random.default_rng(2))
    write_json(path, povm_to_json(p))
    assert povm_from_json(read_json(path)) == p
    with open(path, "rb") as f:
        assert b"\r\n" not in f.read()


if __name__ == "__main__":
    pytest.main()
