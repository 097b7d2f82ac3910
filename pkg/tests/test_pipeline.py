"""Five-step quantum iteration against the classical oracle."""

import numpy as np
import pytest

from conftest import random_system
from qkacz import (AmplificationWindowError, DimensionGuardError,
                   LinearSystem, SelectionStrategy, dilate, encoded_of,
                   kaczmarz_step, measure, principal_column,
                   run_quantum_kaczmarz, state_prep, step1_inner_product,
                   step2_rx, step3_residual_column, step4_combine,
                   step5_deflate)


def column_state(x):
    """Encoding whose principal column is x (first column of a dilation)."""
    x = np.asarray(x, dtype=float)
    M = np.outer(x, np.eye(x.size)[0])
    return dilate(M)


# --- step 1 -------------------------------------------------------------------

def test_step1_inner_product_values():
    prep = state_prep([1.0, 0.0])
    state = column_state([0.3, 0.4])
    E = step1_inner_product(state, prep, row_norm=1.0)
    assert encoded_of(E)[0, 0] == pytest.approx(0.3, abs=1e-12)


def test_step1_aligned_row_gives_row_norm():
    prep = state_prep([0.6, 0.8])  # direction of a = 0.5 * (0.6, 0.8)
    state = column_state([0.6, 0.8])
    E = step1_inner_product(state, prep, row_norm=0.5)
    assert encoded_of(E)[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_step1_orthogonal_row_gives_zero():
    prep = state_prep([1.0, 0.0])
    state = column_state([0.0, 0.7])
    E = step1_inner_product(state, prep, row_norm=1.0)
    assert encoded_of(E)[0, 0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError, match="row norm"):
        step1_inner_product(state, prep, row_norm=0.0)


# --- step 2 -------------------------------------------------------------------

def test_step2_rotation_matrix():
    assert np.allclose(step2_rx(1.0).unitary, np.eye(2), atol=1e-12)
    E = step2_rx(0.6)
    assert E.unitary[0, 0] == pytest.approx(0.6)
    assert E.unitary[0, 1] == pytest.approx(-0.8j)
    U = E.unitary
    assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
    assert step2_rx(0.0).unitary[0, 0] == pytest.approx(0.0)
    with pytest.raises(ValueError, match="not normalized"):
        step2_rx(1.2)


# --- step 3 -------------------------------------------------------------------

def _residual_inputs(a_dir, row_norm, b_j, x):
    prep = state_prep(a_dir)
    state = column_state(x)
    s1 = step1_inner_product(state, prep, row_norm)
    return s1, step2_rx(b_j), prep


def test_step3_zero_residual_on_solved_row():
    s1, rx, prep = _residual_inputs([1.0, 0.0], 1.0, b_j=0.5, x=[0.5, 0.0])
    E = step3_residual_column(s1, rx, prep, row_norm=1.0, lam=1.0)
    assert np.allclose(principal_column(E), 0.0, atol=1e-12)


def test_step3_halved_update_column():
    s1, rx, prep = _residual_inputs([1.0, 0.0], 1.0, b_j=0.5, x=[0.0, 0.0])
    E = step3_residual_column(s1, rx, prep, row_norm=1.0, lam=1.0)
    assert np.allclose(principal_column(E), [0.25, 0.0], atol=1e-12)


def test_step3_linear_in_relaxation():
    s1, rx, prep = _residual_inputs([1.0, 0.0], 1.0, b_j=0.5, x=[0.0, 0.0])
    one = step3_residual_column(s1, rx, prep, 1.0, lam=1.0)
    two = step3_residual_column(s1, rx, prep, 1.0, lam=2.0)
    assert np.allclose(principal_column(two), 2.0 * principal_column(one),
                       atol=1e-12)
    with pytest.raises(ValueError, match="relaxation"):
        step3_residual_column(s1, rx, prep, 1.0, lam=0.0)


def test_step3_subunit_row_norm_rescales():
    # a = 0.5 * (1, 0): update column is xi * a / ||a||^2, halved by the step
    s1, rx, prep = _residual_inputs([1.0, 0.0], 0.5, b_j=0.4, x=[0.0, 0.0])
    E = step3_residual_column(s1, rx, prep, row_norm=0.5, lam=1.0)
    assert np.allclose(principal_column(E), [0.4, 0.0], atol=1e-12)


# --- steps 4 and 5 --------------------------------------------------------------

def test_step4_zero_residual_halves_state():
    state = column_state([0.6, 0.2])
    residual = dilate(np.zeros((2, 2)))
    E = step4_combine(state, residual)
    assert np.allclose(principal_column(E), [0.3, 0.1], atol=1e-12)


def test_step4_identity_system_iteration():
    sys = LinearSystem(np.eye(2), np.array([0.6, 0.8]))
    x_next = kaczmarz_step(np.zeros(2), sys, 0, 1.0)
    assert np.allclose(x_next, [0.6, 0.0], atol=1e-15)
    state = column_state([0.0, 0.0])
    residual = column_state(x_next)  # full update from x0 = 0
    E = step4_combine(state, residual)
    assert np.allclose(principal_column(E), 0.5 * x_next, atol=1e-12)


def test_step4_matches_classical_step_on_random_draws():
    rng = np.random.default_rng(6)
    for _ in range(50):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(2, 7))
        sys, x_sol = random_system(rng, n, m)
        # stay near the solution so the update column remains a contraction
        noise = rng.standard_normal(m)
        x = x_sol + 0.1 * noise / np.linalg.norm(noise)
        j = int(rng.integers(n))
        lam = float(rng.uniform(0.2, 2.0))
        x_next = kaczmarz_step(x, sys, j, lam)
        E = step4_combine(column_state(x), column_state(x_next - x))
        assert np.allclose(principal_column(E), 0.5 * x_next, atol=1e-12)


def test_step5_removes_the_half():
    state = column_state([0.1, 0.2])
    residual = column_state([0.3, 0.1])
    half = step4_combine(state, residual)
    full = step5_deflate(half)
    assert np.allclose(principal_column(full), [0.4, 0.3], atol=1e-10)


def test_step5_zero_column_preserved():
    half = step4_combine(column_state([0.0, 0.0]), dilate(np.zeros((2, 2))))
    out = step5_deflate(half)
    assert np.allclose(principal_column(out), 0.0, atol=1e-12)


def test_step5_window_violation():
    big = dilate(0.6 * np.eye(2))  # doubling 0.6 exceeds 1 - delta
    with pytest.raises(AmplificationWindowError):
        step5_deflate(big)


# --- full runs ------------------------------------------------------------------

def run_both(sys, strategy, lam, T, **kw):
    out = {}
    for backend in ("encoded-operator", "full-unitary"):
        out[backend] = run_quantum_kaczmarz(sys, strategy, lam, T,
                                            backend=backend, **kw)
    return out


def test_run_zero_iterations_returns_start(hand_system):
    state, trace = run_quantum_kaczmarz(hand_system,
                                        SelectionStrategy("cyclic"), 1.0, 0)
    assert np.allclose(state.first_column, 0.0)
    assert state.k == 0
    x0 = np.array([0.2, -0.1])
    state, _ = run_quantum_kaczmarz(hand_system, SelectionStrategy("cyclic"),
                                    1.0, 0, x0=x0)
    assert np.allclose(state.first_column, x0, atol=1e-12)


def test_run_hand_example_both_backends(hand_system):
    for backend, (state, trace) in run_both(
            hand_system, SelectionStrategy("cyclic"), 1.0, 2).items():
        assert np.allclose(state.first_column, [0.38, 0.34], atol=1e-10), backend
        assert np.allclose(trace.final, [0.38, 0.34], atol=1e-12)
        assert np.allclose(state.column_history, trace.iterates, atol=1e-10)
        assert all(a == pytest.approx(1.0, abs=1e-12)
                   for a in state.alpha_history)


def test_run_backend_agreement_small_instance():
    rng = np.random.default_rng(19)
    sys, _ = random_system(rng, 5, 3)
    strat = SelectionStrategy("norm-weighted-random", seed=4)
    results = run_both(sys, strat, 0.8, 4)
    enc_state, enc_trace = results["encoded-operator"]
    full_state, full_trace = results["full-unitary"]
    assert np.array_equal(enc_trace.selected_rows, full_trace.selected_rows)
    assert np.allclose(enc_state.column_history, full_state.column_history,
                       atol=1e-8)
    assert np.allclose(enc_state.column_history, enc_trace.iterates,
                       atol=1e-10)
    assert np.allclose(full_state.column_history, full_trace.iterates,
                       atol=1e-8)


def test_run_medium_instance_tracks_classical():
    rng = np.random.default_rng(40)
    sys, _ = random_system(rng, 16, 8)
    strat = SelectionStrategy("norm-weighted-random", seed=12)
    state, trace = run_quantum_kaczmarz(sys, strat, 1.0, 50)
    dev = np.max(np.abs(state.column_history - trace.iterates))
    assert dev <= 1e-10
    assert all(a == pytest.approx(1.0, abs=1e-12) for a in state.alpha_history)


def test_run_row_consistency_after_final_step():
    rng = np.random.default_rng(50)
    sys, _ = random_system(rng, 10, 4)
    strat = SelectionStrategy("uniform-random", seed=3)
    state, trace = run_quantum_kaczmarz(sys, strat, 1.0, 12)
    j = int(trace.selected_rows[-1])
    assert float(sys.A[j] @ state.first_column) == pytest.approx(
        float(sys.b[j]), abs=1e-8)


def test_run_dimension_guard():
    rng = np.random.default_rng(60)
    sys, _ = random_system(rng, 12, 8)
    with pytest.raises(DimensionGuardError, match="encoded-operator"):
        run_quantum_kaczmarz(sys, SelectionStrategy("cyclic"), 1.0, 2,
                             backend="full-unitary")
    small, _ = random_system(rng, 4, 2)
    with pytest.raises(DimensionGuardError, match="encoded-operator"):
        run_quantum_kaczmarz(small, SelectionStrategy("cyclic"), 1.0, 9,
                             backend="full-unitary")


def test_run_input_validation(hand_system):
    strat = SelectionStrategy("cyclic")
    with pytest.raises(ValueError, match="backend"):
        run_quantum_kaczmarz(hand_system, strat, 1.0, 1, backend="tensor-net")
    with pytest.raises(ValueError, match="relaxation"):
        run_quantum_kaczmarz(hand_system, strat, 2.5, 1)
    with pytest.raises(ValueError, match="nonnegative"):
        run_quantum_kaczmarz(hand_system, strat, 1.0, -1)
    with pytest.raises(ValueError, match="x0"):
        run_quantum_kaczmarz(hand_system, strat, 1.0, 1, x0=np.zeros(5))
    with pytest.raises(ValueError, match="norm at most 1"):
        run_quantum_kaczmarz(hand_system, strat, 1.0, 1, x0=np.array([2.0, 0]))
    loud = LinearSystem(3.0 * np.eye(2), np.array([0.1, 0.2]))
    with pytest.raises(ValueError, match="operator norm"):
        run_quantum_kaczmarz(loud, strat, 1.0, 1)


def test_amplification_error_carries_iteration_context():
    # relaxation far above the row scale forces the multiplier window
    A = np.array([[0.05, 0.0], [0.0, 0.05]])
    sys = LinearSystem(A, np.array([0.04, 0.03]))
    with pytest.raises(AmplificationWindowError, match="iteration 0") as info:
        run_quantum_kaczmarz(sys, SelectionStrategy("cyclic"), 2.0, 1)
    assert info.value.iteration == 0


# --- measurement ----------------------------------------------------------------

def test_measure_hand_example(hand_system):
    state, _ = run_quantum_kaczmarz(hand_system, SelectionStrategy("cyclic"),
                                    1.0, 2)
    out = measure(state)
    assert out.success_probability == pytest.approx(0.26, abs=1e-10)
    expect = np.array([0.38, 0.34]) / np.sqrt(0.26)
    assert np.allclose(out.normalized_state, expect, atol=1e-10)
    assert np.linalg.norm(out.normalized_state) == pytest.approx(1.0)


def test_measure_unit_state_always_succeeds(hand_system):
    state, _ = run_quantum_kaczmarz(hand_system, SelectionStrategy("cyclic"),
                                    1.0, 0, x0=np.array([1.0, 0.0]))
    out = measure(state)
    assert out.success_probability == pytest.approx(1.0, abs=1e-12)


def test_measure_matches_squared_norm(hand_system):
    state, _ = run_quantum_kaczmarz(hand_system, SelectionStrategy("cyclic"),
                                    1.0, 2)
    p = float(state.first_column @ state.first_column)
    assert measure(state).success_probability == pytest.approx(p, abs=1e-10)


def test_measure_empirical_rate_concentrates(hand_system):
    state, _ = run_quantum_kaczmarz(hand_system, SelectionStrategy("cyclic"),
                                    1.0, 2)
    shots = 100_000
    out = measure(state, shots=shots, seed=123)
    p = out.success_probability
    bound = 3.0 * np.sqrt(p * (1.0 - p) / shots)
    assert abs(out.empirical_success - p) <= bound
    assert out.shots == shots


def test_measure_zero_state_rejected(hand_system):
    state, _ = run_quantum_kaczmarz(hand_system, SelectionStrategy("cyclic"),
                                    1.0, 0)
    with pytest.raises(ValueError, match="post-selection probability zero"):
        measure(state)
    good, _ = run_quantum_kaczmarz(hand_system, SelectionStrategy("cyclic"),
                                   1.0, 2)
    with pytest.raises(ValueError, match="shots"):
        measure(good, shots=0)
