import numpy as np
import pytest

from bosoncast import (EmitterParams, NetworkConfig, analytic_loss_fidelity,
                       emitter_pulses, fidelity_trace, haar_random_unitary,
                       make_time_grid, named_unitary, process_fidelity,
                       propagate_green)


def test_perfect_map_scores_one():
    for n in (1, 2, 4):
        u = haar_random_unitary(n, seed=n)
        assert process_fidelity(u, u) == pytest.approx(1.0)


def test_zero_map_scores_zero():
    u = named_unitary("hadamard", 4)
    assert process_fidelity(np.zeros((4, 4)), u) == pytest.approx(0.0)


def test_global_phase_invariance():
    u = haar_random_unitary(3, seed=9)
    for theta in (0.3, 1.2, -2.5):
        assert process_fidelity(np.exp(1j * theta) * u, u) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_zeroed_row_value(n):
    # dropping one register column: |Tr|^2 = (n-1)^2 and the Frobenius term
    # loses one unit, giving ((n-1)^2 + (n-1)) / (n (n+1))
    u = haar_random_unitary(n, seed=n + 40)
    g = u.copy()
    g[0, :] = 0.0
    expected = ((n - 1) ** 2 + (n - 1)) / (n * (n + 1))
    assert process_fidelity(g, u) == pytest.approx(expected)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        process_fidelity(np.eye(2), np.eye(3))


def test_basis_covariance():
    # simultaneous right-rotation of map and target leaves the score fixed
    rng = np.random.default_rng(5)
    g = 0.5 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    u = haar_random_unitary(3, seed=1)
    v = haar_random_unitary(3, seed=2)
    f1 = process_fidelity(g, u)
    f2 = process_fidelity(g @ v, u @ v)
    assert f1 == pytest.approx(f2)
    f3 = process_fidelity(u.conj().T @ g, np.eye(3))
    assert f1 == pytest.approx(f3)


def test_contractive_maps_bounded():
    rng = np.random.default_rng(8)
    u = haar_random_unitary(4, seed=3)
    for _ in range(50):
        z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        q, r = np.linalg.qr(z)
        s = np.diag(rng.uniform(0, 1, 4))
        g = q @ s @ q.conj().T
        assert process_fidelity(g, u) <= 1.0 + 1e-9


def test_trace_starts_at_zero():
    grid = make_time_grid(0.0, 10.0, 0.01)
    cfg = NetworkConfig(n=2, grid=grid)
    em = emitter_pulses(2, EmitterParams(t_c=4.0), grid)
    traj = propagate_green(cfg, em, stride=100)
    u = named_unitary("hadamard", 2)
    trace = fidelity_trace(traj, u)
    assert trace.values[0] == pytest.approx(0.0)
    assert np.all(trace.values <= 1.0 + 1e-9)
    assert np.all(trace.values >= 0.0)
    assert trace.times[0] == pytest.approx(0.0)
    assert trace.times[-1] == pytest.approx(10.0)


def test_loss_formula_lossless_limit():
    assert analytic_loss_fidelity(0.987, 0.0, 40.0, 0.0, 0.0, 4) == \
        pytest.approx(0.987)


def test_loss_formula_circulator_chain():
    # 2N = 8 circulator passes at 0.2% loss each
    val = analytic_loss_fidelity(0.999, 0.0, 40.0, 0.0, 0.002, 4)
    assert val == pytest.approx(0.999 * 0.998 ** 8)
    assert val == pytest.approx(0.98313, abs=2e-5)


def test_loss_formula_all_factors():
    val = analytic_loss_fidelity(0.99, 0.001, 30.0, 0.02, 0.005, 2)
    assert val == pytest.approx(0.99 * np.exp(-0.03) * 0.98 * 0.995 ** 4)


def test_loss_formula_validation():
    with pytest.raises(ValueError):
        analytic_loss_fidelity(0.99, -0.1, 30.0, 0.0, 0.0, 2)
    with pytest.raises(ValueError):
        analytic_loss_fidelity(0.99, 0.0, 30.0, 1.0, 0.0, 2)
