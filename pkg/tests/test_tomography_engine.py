# type: ignore

import numpy as np
import pytest

from qdetco.detector_model import (
    check_povm,
    ideal_computational_povm,
    povm_from_avectors,
    random_povm,
)
from qdetco.detector_simulator import (
    CountsDataset,
    exact_frequencies,
    simulate_qdt_experiment,
)
from qdetco.state_library import product_state, test_state_set
from qdetco.tomography_engine import (
    BootstrapReport,
    MleConfig,
    bootstrap,
    frequencies,
    log_likelihood,
    mle_step,
    run_mle,
    run_mle_frequencies,
)
from qdetco.validation import ConvergenceError, ValidationError

SAMPLE_DETECTOR = povm_from_avectors((0.54, 0.003, 0.003, 0.41))


@pytest.mark.parametrize("num_qubits, mixing", [(1, 0.1), (1, 0.5), (2, 0.2)])
def test_exact_frequencies_recover_detector(num_qubits, mixing):
    true = random_povm(num_qubits, np.random.default_rng(num_qubits), mixing)
    states = test_state_set(num_qubits)
    result = run_mle_frequencies(exact_frequencies(true, states), states)
    assert result.converged
    assert result.final_step_norm < 1e-10
    assert np.max(np.abs(result.povm.coeffs - true.coeffs)) < 1e-6


@pytest.mark.parametrize("num_qubits", [1, 2])
@pytest.mark.parametrize("seed", range(100, 125))
def test_exact_frequencies_sweep(num_qubits, seed):
    true = random_povm(num_qubits, np.random.default_rng(seed))
    states = test_state_set(num_qubits)
    f = exact_frequencies(true, states)
    result = run_mle_frequencies(f, states)
    assert result.converged
    assert np.max(np.abs(result.povm.coeffs - true.coeffs)) < 1e-6
    assert check_povm(result.povm).is_valid
    # The iteration may dip on the way, the end point is still the maximum.
    trace = result.log_likelihood_trace
    assert trace[-1] >= trace[0]
    bound = float(np.sum(f[f > 0] * np.log(f[f > 0])))
    assert log_likelihood(result.povm, states, f) == pytest.approx(bound, abs=1e-8)
    assert result.max_likelihood_drop >= 0.0


def test_iterates_stay_valid():
    true = random_povm(2, np.random.default_rng(7), 0.3)
    states = test_state_set(2)
    result = run_mle_frequencies(exact_frequencies(true, states), states)
    assert result.max_completeness_residual < 1e-10
    assert result.min_iterate_eigenvalue > -1e-10
    assert result.max_likelihood_drop < 1e-9
    assert result.max_s_asymmetry < 1e-10
    assert check_povm(result.povm).is_valid


def test_recovers_sampled_detector():
    d = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=8192, runs=10, seed=1)
    result = run_mle(d)
    assert result.converged
    estimate = result.povm.avector(0).as_array()
    assert np.allclose(estimate, [0.54, 0.003, 0.003, 0.41], atol=5e-3)
    assert check_povm(result.povm).is_valid


def test_error_shrinks_with_shots():
    shots = [2**11, 2**13, 2**15]
    cfg = MleConfig(epsilon=1e-9)
    errors = []
    for n in shots:
        squared = []
        for seed in range(16):
            d = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=n, seed=seed)
            estimate = run_mle(d, cfg).povm.coeffs
            squared.append((estimate - SAMPLE_DETECTOR.coeffs) ** 2)
        errors.append(np.sqrt(np.mean(squared)))
    slope = np.polyfit(np.log(shots), np.log(errors), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.25)
    assert errors[0] > errors[1] > errors[2]


def test_likelihood_trace():
    d = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=1000, seed=2)
    result = run_mle(d, MleConfig(max_iterations=5, sample_every=1))
    assert not result.converged
    assert result.iterations == 5
    trace = result.log_likelihood_trace
    assert len(trace) == 6
    assert np.all(np.diff(trace) > -1e-9)

    sparse = run_mle(d, MleConfig(max_iterations=5))
    assert len(sparse.log_likelihood_trace) == 2
    assert sparse.log_likelihood_trace[-1] == pytest.approx(trace[-1])


def test_likelihood_is_maximal_at_truth():
    states = test_state_set(1)
    f = exact_frequencies(SAMPLE_DETECTOR, states)
    best = log_likelihood(SAMPLE_DETECTOR, states, f)
    assert best == pytest.approx(float(np.sum(f * np.log(f))))
    worse = povm_from_avectors((0.5, 0.0, 0.0, 0.3))
    assert log_likelihood(worse, states, f) < best


def test_zero_frequencies_are_skipped():
    states = test_state_set(1)
    f = exact_frequencies(ideal_computational_povm(1), states)
    value = log_likelihood(ideal_computational_povm(1), states, f)
    assert np.isfinite(value)


def test_single_step_keeps_completeness():
    states = test_state_set(1)
    f = exact_frequencies(SAMPLE_DETECTOR, states)
    start = povm_from_avectors((0.5, 0.0, 0.0, 0.0))
    step = mle_step(start, states, f)
    report = check_povm(step)
    assert report.is_valid
    assert log_likelihood(step, states, f) >= log_likelihood(start, states, f)
    with pytest.raises(ValidationError):
        mle_step(ideal_computational_povm(2), states, f)


def test_initial_povm():
    states = test_state_set(1)
    f = exact_frequencies(SAMPLE_DETECTOR, states)
    cfg = MleConfig(initial_povm=SAMPLE_DETECTOR)
    result = run_mle_frequencies(f, states, cfg)
    assert result.converged
    assert result.iterations <= 2
    wrong_size = MleConfig(initial_povm=random_povm(2, np.random.default_rng(0)))
    with pytest.raises(ValidationError):
        run_mle_frequencies(f, states, wrong_size)


def test_config_validation():
    with pytest.raises(ValidationError):
        MleConfig(epsilon=0.0)
    with pytest.raises(ValidationError):
        MleConfig(max_iterations=0)
    with pytest.raises(ValidationError):
        MleConfig(initial_povm=povm_from_avectors((0.3, 0.0, 0.0, 0.5)))


def test_frequency_table_shape():
    states = test_state_set(1)
    with pytest.raises(ValidationError):
        run_mle_frequencies(np.full((2, 5), 0.5), states)
    with pytest.raises(ValidationError):
        run_mle_frequencies(np.full((2, 6), -0.5), states)
    with pytest.raises(ValidationError):
        run_mle_frequencies(np.zeros((2, 0)), [])


def test_frequencies_pool_runs():
    labels = [("0",), ("1",)]
    d = CountsDataset(1, 10, labels, np.array([[[10, 0], [2, 8]], [[8, 2], [4, 6]]]))
    f = frequencies(d)
    assert f.shape == (2, 2)
    assert np.allclose(f[:, 0], [0.9, 0.1])
    assert np.allclose(f[:, 1], [0.3, 0.7])
    empty = CountsDataset(1, 0, labels, np.zeros((1, 2, 2), dtype=int))
    with pytest.raises(ValidationError, match="no shots"):
        frequencies(empty)


def test_incomplete_states_rejected():
    labels = [("0",), ("1",), ("+",)]
    d = CountsDataset(1, 10, labels, np.array([[[9, 1], [1, 9], [5, 5]]]))
    with pytest.raises(ValidationError, match="rank 3 of 4"):
        run_mle(d)


def test_non_canonical_complete_states():
    states = [product_state((t,)) for t in ("-i", "0", "1", "+", "-", "+i")]
    f = exact_frequencies(SAMPLE_DETECTOR, states)
    counts = np.rint(f.T * 100000).astype(int)[None]
    counts[..., 1] = 100000 - counts[..., 0]
    d = CountsDataset(1, 100000, [s.label for s in states], counts)
    assert not d.is_canonical
    result = run_mle(d)
    estimate = result.povm.avector(0).as_array()
    assert np.allclose(estimate, [0.54, 0.003, 0.003, 0.41], atol=1e-4)


def test_bootstrap():
    d = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=8192, runs=10, seed=3)
    report = bootstrap(d, num_resamples=20, seed=4, cfg=MleConfig(epsilon=1e-9))
    assert isinstance(report, BootstrapReport)
    assert report.std.shape == (2, 4)
    assert report.num_resamples == 20
    assert report.num_excluded == 0
    assert np.all(report.std >= 5e-5)
    assert np.all(report.std <= 3e-3)
    assert np.allclose(report.mean[0], [0.54, 0.003, 0.003, 0.41], atol=5e-3)


def test_bootstrap_is_deterministic():
    d = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=500, runs=4, seed=5)
    cfg = MleConfig(epsilon=1e-8)
    assert bootstrap(d, 5, seed=6, cfg=cfg) == bootstrap(d, 5, seed=6, cfg=cfg)


def test_bootstrap_resample_count_is_stable():
    d = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=8192, runs=10, seed=7)
    cfg = MleConfig(epsilon=1e-9)
    fewer = bootstrap(d, num_resamples=100, seed=8, cfg=cfg)
    more = bootstrap(d, num_resamples=200, seed=8, cfg=cfg)
    assert np.all(np.abs(more.std / fewer.std - 1.0) < 0.3)


def test_bootstrap_identical_runs():
    single = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=8192, seed=9)
    counts = np.repeat(single.counts, 5, axis=0)
    d = CountsDataset(1, single.shots, single.labels, counts)
    cfg = MleConfig(epsilon=1e-9)
    report = bootstrap(d, num_resamples=6, seed=10, cfg=cfg)
    assert np.all(report.std == 0.0)
    assert np.allclose(report.mean, run_mle(single, cfg).povm.coeffs)


def test_bootstrap_errors():
    single = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=100, runs=1)
    with pytest.raises(ValidationError):
        bootstrap(single)
    d = simulate_qdt_experiment(SAMPLE_DETECTOR, shots=100, runs=3)
    with pytest.raises(ValidationError):
        bootstrap(d, num_resamples=1)
    with pytest.raises(ConvergenceError):
        bootstrap(d, num_resamples=4, cfg=MleConfig(max_iterations=1))


def test_bootstrap_report_validation():
    with pytest.raises(ValidationError):
        BootstrapReport(1, np.zeros((2, 4)), np.zeros((4, 16)), 10)
    with pytest.raises(ValidationError):
        BootstrapReport(1, -np.ones((2, 4)), np.zeros((2, 4)), 10)


if __name__ == "__main__":
    pytest.main()
