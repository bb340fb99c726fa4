# type: ignore

import logging
import os

import numpy as np
import pytest

from qdetco.cli import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, main
from qdetco.detector_model import check_povm, detector_distance
from qdetco.detector_simulator import NoisySpec, make_noisy_detector
from qdetco.reference_devices import device_povm
from qdetco.serialization import (
    bootstrap_from_json,
    counts_from_json,
    distribution_from_json,
    distribution_to_json,
    loads,
    povm_from_json,
    povm_to_json,
    read_json,
    response_from_json,
    table_from_json,
    write_json,
)

NOISY = make_noisy_detector(NoisySpec(0.1, 0.06))


@pytest.fixture()
def files(tmp_path):
    def path(name):
        return str(tmp_path / name)

    return path


def _write_povm(path, p):
    write_json(path, povm_to_json(p))
    return path


def test_output_paths_must_differ(files, capsys):
    counts = files("counts.json")
    args = ["simulate", "--noise", "0.1,0.06", "--shots", "500", "--out", counts]
    assert main(args) == EXIT_OK
    out = files("out.json")
    code = main(["tomo", "--counts", counts, "--out-povm", out, "--out-diag", out])
    assert code == EXIT_INVALID
    assert "out.json" in capsys.readouterr().err
    assert not os.path.exists(out)

    code = main(["tomo", "--counts", counts, "--out-povm", counts])
    assert code == EXIT_INVALID
    assert counts_from_json(read_json(counts)).shots == 500


def test_mitigate_output_paths_must_differ(files):
    detector = _write_povm(files("povm.json"), NOISY)
    observed = files("observed.json")
    write_json(observed, distribution_to_json(np.array([0.9, 0.1])))
    out = files("corrected.json")
    args = ["mitigate", "--matrix-from", detector, "--dist", observed]
    assert main(args + ["--out", out, "--out-matrix", out]) == EXIT_INVALID
    assert not os.path.exists(out)
    assert main(args + ["--out", files("c.json"), "--out-matrix", observed]) == 2
    assert distribution_from_json(read_json(observed)).tolist() == [0.9, 0.1]


def test_simulate_ideal(files):
    out = files("counts.json")
    code = main(
        ["simulate", "--ideal", "--qubits", "1", "--shots", "100", "--out", out]
    )
    assert code == EXIT_OK
    d = counts_from_json(read_json(out))
    assert d.num_qubits == 1
    assert d.counts[0, 0].tolist() == [100, 0]
    assert d.metadata == {"detector": "ideal", "protocol": "full"}


def test_simulate_is_reproducible(files):
    args = ["simulate", "--noise", "0.1,0.06", "--shots", "200", "--seed", "7"]
    assert main(args + ["--out", files("a.json")]) == EXIT_OK
    assert main(args + ["--out", files("b.json")]) == EXIT_OK
    with open(files("a.json"), "rb") as a, open(files("b.json"), "rb") as b:
        assert a.read() == b.read()


def test_simulate_noise_per_qubit(files):
    out = files("counts.json")
    args = ["simulate", "--noise", "0.1,0.06", "--qubits", "2", "--shots", "10"]
    assert main(args + ["--out", out]) == EXIT_OK
    d = counts_from_json(read_json(out))
    assert d.num_qubits == 2
    assert d.counts.shape == (1, 36, 4)
    bad = ["simulate", "--noise", "0.1,0.06", "--noise", "0.2,0.1", "--qubits", "3"]
    assert main(bad + ["--out", out]) == EXIT_INVALID


def test_simulate_preset_parallel(files):
    out = files("counts.json")
    args = [
        "simulate",
        "--preset",
        "ibmqx4-parallel",
        "--qubits",
        "2",
        "--protocol",
        "parallel",
        "--runs",
        "2",
        "--shots",
        "50",
        "--out",
        out,
    ]
    assert main(args) == EXIT_OK
    d = counts_from_json(read_json(out))
    assert d.counts.shape == (2, 6, 4)
    assert d.labels[2] == ("+", "+")
    assert d.metadata["detector"] == "preset:ibmqx4-parallel"


def test_simulate_invalid(files, capsys):
    out = files("counts.json")
    assert main(["simulate", "--ideal", "--out", out]) == EXIT_INVALID
    assert "--qubits" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["simulate", "--noise", "0.1", "--out", out])
    with pytest.raises(SystemExit):
        main(["simulate", "--ideal", "--preset", "ibmqx4-parallel", "--out", out])


def test_tomo(files):
    counts = files("counts.json")
    povm = files("povm.json")
    diag = files("diag.json")
    args = ["simulate", "--noise", "0.1,0.06", "--shots", "20000", "--runs", "4"]
    assert main(args + ["--out", counts]) == EXIT_OK
    code = main(
        [
            "tomo",
            "--counts",
            counts,
            "--epsilon",
            "1e-8",
            "--out-povm",
            povm,
            "--out-diag",
            diag,
        ]
    )
    assert code == EXIT_OK
    estimate = povm_from_json(read_json(povm))
    assert check_povm(estimate).is_valid
    assert detector_distance(estimate, NOISY) < 0.01
    assert read_json(diag)["converged"] is True


def test_tomo_not_converged(files):
    counts = files("counts.json")
    povm = files("povm.json")
    args = ["simulate", "--noise", "0.1,0.06", "--shots", "500"]
    assert main(args + ["--out", counts]) == EXIT_OK
    code = main(["tomo", "--counts", counts, "--max-iters", "2", "--out-povm", povm])
    assert code == EXIT_NOT_CONVERGED
    assert check_povm(povm_from_json(read_json(povm))).is_valid


def test_tomo_invalid_input(files):
    counts = files("counts.json")
    with open(counts, "w") as f:
        f.write('{"schema": "qdt-counts/1",')
    code = main(["tomo", "--counts", counts, "--out-povm", files("povm.json")])
    assert code == EXIT_INVALID
    missing = files("missing.json")
    code = main(["tomo", "--counts", missing, "--out-povm", files("povm.json")])
    assert code == EXIT_INVALID


def test_reduce(files, caplog):
    source = _write_povm(files("povm.json"), device_povm("ibmqx2-individual", [0, 1]))
    out = files("reduced.json")
    assert main(["reduce", "--povm", source, "--keep", "1", "--out", out]) == EXIT_OK
    reduced = povm_from_json(read_json(out))
    assert reduced.num_qubits == 1
    expected = device_povm("ibmqx2-individual", [1])
    assert np.allclose(reduced.coeffs, expected.coeffs)

    with caplog.at_level(logging.WARNING, logger="qdetco.cli"):
        code = main(["reduce", "--povm", source, "--keep", "0,1", "--out", out])
    assert code == EXIT_OK
    assert "identity" in caplog.text
    assert read_json(out) == read_json(source)

    assert main(["reduce", "--povm", source, "--keep", "2", "--out", out]) == 2


def test_compare(files, capsys):
    a = _write_povm(files("a.json"), device_povm("ibmqx4-individual"))
    b = _write_povm(files("b.json"), device_povm("ibmqx4-parallel"))
    table = files("table.json")
    assert main(["compare", "--a", a, "--b", b, "--out", table]) == EXIT_OK
    output = capsys.readouterr().out
    flagged = [line.split()[1] for line in output.splitlines() if "flagged" in line]
    assert flagged == ["2", "3", "4"]
    distances = table_from_json(read_json(table)).distances[:, 0]
    assert distances[3] == pytest.approx(0.087, abs=1e-3)

    assert main(["compare", "--a", a, "--b", b, "--multiplier", "40"]) == EXIT_OK
    output = capsys.readouterr().out
    flagged = [line for line in output.splitlines() if "flagged" in line]
    assert len(flagged) == 1
    assert flagged[0].startswith("qubit 3 flagged: 0.08")
    assert flagged[0].endswith("> 0.0800")


def test_compare_size_mismatch(files):
    a = _write_povm(files("a.json"), device_povm("ibmqx4-individual"))
    b = _write_povm(files("b.json"), device_povm("ibmqx4-parallel", [0, 1]))
    assert main(["compare", "--a", a, "--b", b]) == EXIT_INVALID


@pytest.mark.parametrize("method", ["inversion", "lsq"])
def test_mitigate(files, method):
    detector = _write_povm(files("povm.json"), NOISY)
    observed = files("observed.json")
    write_json(observed, distribution_to_json(np.array([0.9, 0.1])))
    out = files("corrected.json")
    matrix = files("matrix.json")
    args = ["mitigate", "--matrix-from", detector, "--dist", observed]
    args += ["--method", method, "--out", out, "--out-matrix", matrix]
    assert main(args) == EXIT_OK
    corrected = distribution_from_json(read_json(out))
    assert corrected == pytest.approx([1.0, 0.0], abs=1e-6)
    assert read_json(out)["mitigation"]["converged"] is True
    m = response_from_json(read_json(matrix))
    assert m.entries[:, 0] == pytest.approx([0.9, 0.1])

    again = files("again.json")
    args = ["mitigate", "--matrix-from", matrix, "--dist", observed]
    assert main(args + ["--method", method, "--out", again]) == EXIT_OK
    assert distribution_from_json(read_json(again)) == pytest.approx(corrected)


def test_mitigate_not_converged(files):
    detector = _write_povm(files("povm.json"), NOISY)
    observed = files("observed.json")
    write_json(observed, distribution_to_json(np.array([0.7, 0.3])))
    out = files("corrected.json")
    args = ["mitigate", "--matrix-from", detector, "--dist", observed]
    args += ["--max-iters", "1", "--tol", "1e-15", "--out", out]
    assert main(args) == EXIT_NOT_CONVERGED
    assert read_json(out)["mitigation"]["converged"] is False


def test_mitigate_size_mismatch(files):
    detector = _write_povm(files("povm.json"), NOISY)
    observed = files("observed.json")
    write_json(observed, distribution_to_json(np.full(4, 0.25)))
    args = ["mitigate", "--matrix-from", detector, "--dist", observed]
    assert main(args + ["--out", files("corrected.json")]) == EXIT_INVALID


def test_bootstrap(files):
    counts = files("counts.json")
    out = files("boot.json")
    args = ["simulate", "--noise", "0.1,0.06", "--shots", "2000", "--runs", "4"]
    assert main(args + ["--out", counts]) == EXIT_OK
    args = ["bootstrap", "--counts", counts, "--resamples", "4", "--seed", "1"]
    assert main(args + ["--epsilon", "1e-7", "--out", out]) == EXIT_OK
    report = bootstrap_from_json(read_json(out))
    assert report.num_resamples == 4
    assert (report.std > 0).all()

    single = files("single.json")
    args = ["simulate", "--noise", "0.1,0.06", "--shots", "100", "--out", single]
    assert main(args) == EXIT_OK
    assert main(["bootstrap", "--counts", single, "--out", out]) == EXIT_INVALID

    args = ["bootstrap", "--counts", counts, "--resamples", "4", "--max-iters", "1"]
    assert main(args + ["--out", files("failed.json")]) == EXIT_NOT_CONVERGED


def test_report_formats(files, capsys):
    povm = _write_povm(files("povm.json"), NOISY)
    assert main(["report", "--povm", povm]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("detector on 1 qubit(s)\n")

    out = files("report.json")
    assert main(["report", "--povm", povm, "--format", "json", "--out", out]) == 0
    with open(out) as f:
        document = loads(f.read())
    assert povm_from_json(document["povm"]) == NOISY

    first = files("first.svg")
    second = files("second.svg")
    assert main(["report", "--povm", povm, "--format", "svg", "--out", first]) == 0
    assert main(["report", "--povm", povm, "--format", "svg", "--out", second]) == 0
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()


def test_report_with_bootstrap(files, capsys):
    counts = files("counts.json")
    boot = files("boot.json")
    args = ["simulate", "--noise", "0.1,0.06", "--shots", "2000", "--runs", "3"]
    assert main(args + ["--out", counts]) == EXIT_OK
    args = ["bootstrap", "--counts", counts, "--resamples", "3"]
    assert main(args + ["--epsilon", "1e-7", "--out", boot]) == EXIT_OK
    povm = _write_povm(files("povm.json"), NOISY)
    assert main(["report", "--povm", povm, "--bootstrap", boot]) == EXIT_OK
    assert "(" in capsys.readouterr().out


if __name__ == "__main__":
    pytest.main()
