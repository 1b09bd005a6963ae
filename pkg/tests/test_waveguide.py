import numpy as np
import pytest

from bosoncast import (EmitterParams, NetworkConfig, PulseSet,
                       UnderResolvedError, WaveguideModel, compare_to_cascaded,
                       emitter_pulses, make_time_grid, propagate_green,
                       required_modes, simulate_waveguide, synthesize_explicit)


@pytest.fixture(scope="module")
def short_transfer():
    # compact single-mode transfer protocol used for oracle comparisons
    grid = make_time_grid(0.0, 24.0, 0.01)
    cfg = NetworkConfig(n=1, grid=grid)
    em = emitter_pulses(1, EmitterParams(delta=2.0, tau=1.0, t_c=10.0), grid)
    report = synthesize_explicit(cfg, np.eye(1, dtype=complex), em)
    traj = propagate_green(cfg, report.pulses_b, stride=grid.n_steps)
    return cfg, report.pulses_b, traj


def test_decoupled_modes_stay_put():
    grid = make_time_grid(0.0, 5.0, 0.01)
    cfg = NetworkConfig(n=1, grid=grid)
    pulses = PulseSet(grid=grid, samples=np.zeros((2, grid.n_nodes)))
    oracle = simulate_waveguide(WaveguideModel(bandwidth=25.0), cfg, pulses)
    np.testing.assert_allclose(oracle, np.zeros((1, 1)), atol=1e-14)


def test_matches_cascaded_map(short_transfer):
    cfg, pulses, traj = short_transfer
    oracle = simulate_waveguide(WaveguideModel(bandwidth=50.0), cfg, pulses)
    assert compare_to_cascaded(oracle, traj) <= 0.02


def test_norm_conserved(short_transfer):
    cfg, pulses, _ = short_transfer
    _, info = simulate_waveguide(WaveguideModel(bandwidth=25.0), cfg, pulses,
                                 diagnostics=True)
    assert info["norm_error"] <= 1e-9 * info["t_span"]


def test_deviation_monotone_in_bandwidth(short_transfer):
    cfg, pulses, traj = short_transfer
    devs = [compare_to_cascaded(
        simulate_waveguide(WaveguideModel(bandwidth=b), cfg, pulses), traj)
        for b in (25.0, 50.0)]
    assert devs[1] < devs[0]


def test_under_resolved_raises(short_transfer):
    cfg, pulses, _ = short_transfer
    model = WaveguideModel(bandwidth=50.0, n_wg_modes=100)
    with pytest.raises(UnderResolvedError) as err:
        simulate_waveguide(model, cfg, pulses)
    assert err.value.required > 100


def test_required_modes_bound():
    assert required_modes(50.0, 40.0) == int(np.ceil(4 * 50.0 * 40.0 / np.pi))


def test_lossy_config_rejected(short_transfer):
    _, pulses, _ = short_transfer
    cfg = NetworkConfig(n=1, grid=pulses.grid, local_decay=0.1)
    with pytest.raises(ValueError):
        simulate_waveguide(WaveguideModel(bandwidth=25.0), cfg, pulses)


def test_bandwidth_floor():
    with pytest.raises(ValueError):
        WaveguideModel(bandwidth=5.0)


def test_positions_must_increase():
    with pytest.raises(ValueError):
        WaveguideModel(bandwidth=25.0, positions=np.array([0.0, 0.0]))


def test_compare_shape_mismatch(short_transfer):
    _, _, traj = short_transfer
    with pytest.raises(ValueError):
        compare_to_cascaded(np.zeros((2, 2)), traj)
