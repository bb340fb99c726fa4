# type: ignore

import numpy as np
import pytest

from qdetco import config
from qdetco.detector_model import (
    ideal_computational_povm,
    povm_from_avectors,
    reduce_detector,
)
from qdetco.detector_simulator import (
    CountsDataset,
    NoisySpec,
    born_probabilities,
    exact_frequencies,
    make_noisy_detector,
    marginal_dataset,
    merge_datasets,
    sample_counts,
    simulate_parallel_experiment,
    simulate_qdt_experiment,
    simulate_state_measurement,
    substream,
)
from qdetco.state_library import ghz_state, product_state, test_state_set
from qdetco.validation import ValidationError


def test_noisy_detector():
    p = make_noisy_detector(NoisySpec(p01=0.1, p10=0.06))
    assert np.allclose(p.avector(0).as_array(), [0.48, 0.0, 0.0, 0.42])
    assert np.allclose(p.avector(1).as_array(), [0.52, 0.0, 0.0, -0.42])
    zero = born_probabilities(p, np.array([product_state(("0",)).density]))[0]
    one = born_probabilities(p, np.array([product_state(("1",)).density]))[0]
    assert zero[0] == pytest.approx(0.9)
    assert one[0] == pytest.approx(0.06)


def test_noisy_detector_tilt():
    spec = NoisySpec(0.1, 0.06, tilt_x=0.01, tilt_y=-0.02)
    p = make_noisy_detector([spec, NoisySpec(0.0, 0.0)])
    assert p.num_qubits == 2
    reduced = reduce_detector(p, [0]).avector(0).as_array()
    assert np.allclose(reduced, [0.48, 0.01, -0.02, 0.42])
    with pytest.raises(ValidationError, match="non-positive"):
        make_noisy_detector(NoisySpec(0.01, 0.01, tilt_x=0.2))


def test_noisy_spec_range():
    with pytest.raises(ValidationError):
        NoisySpec(-0.1, 0.0)
    with pytest.raises(ValidationError):
        NoisySpec(0.0, 1.5)
    with pytest.raises(ValidationError):
        make_noisy_detector([])


def test_substream_independent_of_order():
    first = substream(7, 1, 2).random(4)
    substream(7, 0, 0).random(100)
    assert np.array_equal(substream(7, 1, 2).random(4), first)
    assert not np.array_equal(substream(7, 2, 1).random(4), first)
    with pytest.raises(ValidationError):
        substream(-1)


def test_born_probabilities_reject_negative():
    bad = povm_from_avectors((0.3, 0.0, 0.0, 0.5))
    with pytest.raises(ValidationError):
        born_probabilities(bad, np.array([product_state(("1",)).density]))


def test_sample_counts():
    p = make_noisy_detector(NoisySpec(0.1, 0.06))
    counts = sample_counts(p, product_state(("0",)), 100000, substream(0))
    assert counts.sum() == 100000
    assert counts[0] / 100000.0 == pytest.approx(0.9, abs=0.005)
    with pytest.raises(ValidationError):
        sample_counts(p, product_state(("0",)), 0, substream(0))


def test_ideal_detector_counts():
    d = simulate_qdt_experiment(ideal_computational_povm(1), shots=1000, seed=3)
    assert d.counts.shape == (1, 6, 2)
    assert d.counts[0, 0].tolist() == [1000, 0]
    assert d.counts[0, 1].tolist() == [0, 1000]
    assert d.is_canonical


def test_simulation_is_deterministic():
    p = make_noisy_detector([NoisySpec(0.05, 0.08), NoisySpec(0.02, 0.1)])
    a = simulate_qdt_experiment(p, shots=500, runs=3, seed=11)
    b = simulate_qdt_experiment(p, shots=500, runs=3, seed=11)
    c = simulate_qdt_experiment(p, shots=500, runs=3, seed=12)
    assert a == b
    assert a != c
    assert a.counts.shape == (3, 36, 4)
    assert (a.counts.sum(axis=2) == 500).all()


def test_runs_are_streams():
    p = make_noisy_detector(NoisySpec(0.05, 0.08))
    short = simulate_qdt_experiment(p, shots=200, runs=2, seed=5)
    long = simulate_qdt_experiment(p, shots=200, runs=4, seed=5)
    assert np.array_equal(long.counts[:2], short.counts)


def test_threads_do_not_change_results(monkeypatch):
    p = make_noisy_detector(NoisySpec(0.05, 0.08))
    monkeypatch.setenv(config.THREADS_ENV, "1")
    serial = simulate_qdt_experiment(p, shots=300, runs=4, seed=2)
    monkeypatch.setenv(config.THREADS_ENV, "3")
    threaded = simulate_qdt_experiment(p, shots=300, runs=4, seed=2)
    assert serial == threaded


def test_exact_frequencies():
    p = make_noisy_detector(NoisySpec(0.1, 0.06))
    f = exact_frequencies(p, test_state_set(1))
    assert f.shape == (2, 6)
    assert np.allclose(f.sum(axis=0), 1.0)
    assert f[0, 0] == pytest.approx(0.9)
    assert f[0, 2] == pytest.approx(0.48)


def test_dataset_validation():
    labels = [("0",), ("1",)]
    counts = np.array([[[10, 0], [3, 7]]])
    d = CountsDataset(1, 10, labels, counts, seed=1, metadata={"source": "test"})
    assert d.num_runs == 1
    assert not d.is_canonical
    assert d.states[1].label == ("1",)
    with pytest.raises(ValidationError, match="run 0 circuit 1"):
        CountsDataset(1, 10, labels, np.array([[[10, 0], [3, 6]]]))
    with pytest.raises(ValidationError):
        CountsDataset(1, 10, labels, np.array([[[10, 0]]]))
    with pytest.raises(ValidationError):
        CountsDataset(1, 10, [("0",), ("x",)], counts)
    with pytest.raises(ValidationError):
        CountsDataset(1, 10, labels, counts.astype(float))
    with pytest.raises(ValidationError):
        CountsDataset(1, 10, labels, np.zeros((0, 2, 2), dtype=int))


def test_select_and_merge():
    p = make_noisy_detector(NoisySpec(0.05, 0.08))
    d = simulate_qdt_experiment(p, shots=100, runs=3, seed=0)
    picked = d.select_runs([2, 2, 0])
    assert np.array_equal(picked.counts[0], d.counts[2])
    assert np.array_equal(picked.counts[2], d.counts[0])
    merged = merge_datasets([d.select_runs([0]), d.select_runs([1, 2])])
    assert merged == d
    other = simulate_qdt_experiment(p, shots=50, runs=1, seed=0)
    with pytest.raises(ValidationError):
        merge_datasets([d, other])
    with pytest.raises(ValidationError):
        merge_datasets([])


def test_state_measurement():
    p = ideal_computational_povm(2)
    exact = simulate_state_measurement(p, ghz_state(2), shots=config.INFINITE_SHOTS)
    assert np.allclose(exact, [0.5, 0.0, 0.0, 0.5])
    sampled = simulate_state_measurement(p, ghz_state(2), shots=1000, runs=4, seed=1)
    assert sampled.sum() == pytest.approx(1.0)
    assert sampled[1] == 0.0
    assert sampled[0] == pytest.approx(0.5, abs=0.05)
    with pytest.raises(ValidationError):
        simulate_state_measurement(p, np.eye(4), shots=0)
    with pytest.raises(ValidationError):
        simulate_state_measurement(p, np.diag([1.5, -0.5, 0.0, 0.0]), shots=0)


def test_parallel_and_marginal():
    p = make_noisy_detector([NoisySpec(0.05, 0.08), NoisySpec(0.02, 0.1)])
    d = simulate_parallel_experiment(p, shots=400, runs=2, seed=9)
    assert d.labels[2] == ("+", "+")
    single = marginal_dataset(d, 1)
    assert single.num_qubits == 1
    assert single.is_canonical
    assert single.shots == 400
    assert single.metadata["marginal_qubit"] == "1"
    assert np.array_equal(single.counts[:, :, 0], d.counts[:, :, 0] + d.counts[:, :, 2])


def test_marginal_of_full_experiment():
    p = make_noisy_detector([NoisySpec(0.05, 0.08), NoisySpec(0.02, 0.1)])
    d = simulate_qdt_experiment(p, shots=100, seed=4)
    single = marginal_dataset(d, 0)
    assert single.shots == 600
    assert single.counts[0, 0].sum() == 600
    with pytest.raises(ValidationError):
        marginal_dataset(d, 2)


if __name__ == "__main__":
    pytest.main()
