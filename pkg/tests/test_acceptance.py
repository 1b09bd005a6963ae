"""Acceptance suite: one test (or pair) per quality criterion.

Each criterion prints a PASS/FAIL line with the measured numbers (run with
``pytest tests/test_acceptance.py -v -s`` to see them live). The expensive
protocol syntheses are shared through session fixtures. Total runtime is a
few minutes on a desktop-class machine.
"""

import numpy as np
import pytest

from bosoncast import (EmitterParams, NetworkConfig, NoiseParams,
                       PulseSet, ThresholdUnreachableError, WaveguideModel,
                       compare_to_cascaded, emitter_pulses, ensemble_fidelity,
                       haar_random_unitary, make_time_grid, named_unitary,
                       noise_trajectory, propagate_green, simulate_waveguide,
                       synthesize_explicit, synthesize_implicit, trim_window)

DT = 0.01
FIG2 = EmitterParams(delta=2.0, tau=1.0, t_c=19.0)


def report_line(criterion, ok, detail):
    print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    return f"criterion {criterion}: {detail}"


def tail_start(pulses, mode):
    """First node after the mode's final clamped node."""
    intervals = pulses.clamp_intervals[mode]
    return intervals[-1][1] + 1 if intervals else 0


# ---------------------------------------------------------------------------
# shared syntheses

@pytest.fixture(scope="session")
def fig2_runs():
    grid = make_time_grid(0.0, 40.0, DT)
    cfg = NetworkConfig(n=2, grid=grid)
    emitter = emitter_pulses(2, FIG2, grid)
    runs = {}
    for kind in ("transfer", "swap", "hadamard", "complex_beamsplitter"):
        target = named_unitary(kind, 2)
        runs[kind] = (target, synthesize_explicit(cfg, target, emitter))
    return runs


@pytest.fixture(scope="session")
def scaling_runs():
    sizes = (2, 4, 8, 16)
    out = {}
    for family in ("transfer", "hadamard", "haar"):
        rows = []
        for n in sizes:
            if family == "haar":
                target = haar_random_unitary(n, seed=1234)
            else:
                target = named_unitary(family, n)
            cfg = NetworkConfig(n=n, grid=make_time_grid(0.0, 1.0, DT))
            params = EmitterParams(delta=2.0, tau=1.0, t_c=None)
            t0, tf, rep = trim_window(cfg, target, params, threshold=0.99)
            rows.append((n, tf - t0, rep))
        out[family] = rows
    return out


@pytest.fixture(scope="session")
def delta_scan():
    target = named_unitary("transfer", 8)
    cfg = NetworkConfig(n=8, grid=make_time_grid(0.0, 1.0, DT))
    grid_deltas = (0.2, 0.41, 0.7, 1.0, 1.4, 2.0, 2.5, 3.0)
    t_mins, reports = {}, {}
    for delta in grid_deltas:
        params = EmitterParams(delta=delta, tau=1.0, t_c=None)
        try:
            t0, tf, rep = trim_window(cfg, target, params, threshold=0.99)
            t_mins[delta] = tf - t0
            reports[delta] = rep
        except ThresholdUnreachableError:
            t_mins[delta] = np.inf
    return grid_deltas, t_mins, reports


@pytest.fixture(scope="session")
def hadamard4_trimmed():
    target = named_unitary("hadamard", 4)
    cfg = NetworkConfig(n=4, grid=make_time_grid(0.0, 1.0, DT))
    params = EmitterParams(delta=2.0, tau=1.0, t_c=None)
    windows = {}
    for threshold in (0.99, 0.995):
        t0, tf, rep = trim_window(cfg, target, params, threshold=threshold)
        windows[threshold] = (t0, tf, rep)
    return target, windows


# ---------------------------------------------------------------------------
# criterion 1: two-mode protocol reproduction

def test_c1_two_mode_unitaries(fig2_runs):
    details = []
    ok = True
    for kind, (_, rep) in fig2_runs.items():
        im_max = np.max(np.abs(rep.pulses_b.samples[2:].imag))
        details.append(f"{kind}: F={rep.fidelity:.4f} maxIm={im_max:.2e}")
        ok &= rep.fidelity >= 0.99
        if kind == "complex_beamsplitter":
            ok &= im_max >= 0.05
        else:
            ok &= im_max <= 1e-9
    msg = report_line(1, ok, "; ".join(details))
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 2: linear protocol-time scaling

def test_c2_linear_scaling(scaling_runs):
    details, ok = [], True
    for family, rows in scaling_runs.items():
        ns = np.array([r[0] for r in rows], dtype=float)
        tm = np.array([r[1] for r in rows])
        coef = np.polyfit(ns, tm, 1)
        resid = tm - np.polyval(coef, ns)
        r2 = 1.0 - np.sum(resid ** 2) / np.sum((tm - tm.mean()) ** 2)
        ratio = tm[-1] / tm[-2]
        details.append(f"{family}: t_min={np.round(tm, 1).tolist()} "
                       f"R2={r2:.4f} ratio={ratio:.2f}")
        ok &= r2 >= 0.98 and 1.6 <= ratio <= 2.4
    msg = report_line(2, ok, "; ".join(details))
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 3: emitter-stagger optimization

def test_c3_delta_optimization(delta_scan):
    grid_deltas, t_mins, _ = delta_scan
    finite = {d: t for d, t in t_mins.items() if np.isfinite(t)}
    best = min(finite, key=finite.get)
    interior = grid_deltas[0] < best < grid_deltas[-1]
    improves = finite[best] < t_mins[2.0]
    ok = interior and improves
    msg = report_line(
        3, ok, f"t_min(delta): { {d: round(t, 1) for d, t in t_mins.items()} }; "
               f"best delta={best}")
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 4: dark-state and conservation invariants

def _collect_reports(fig2_runs, scaling_runs, delta_scan):
    items = [(f"fig2:{k}", rep) for k, (_, rep) in fig2_runs.items()]
    for family, rows in scaling_runs.items():
        items += [(f"scale:{family}:N={n}", rep) for n, _, rep in rows]
    _, _, reports = delta_scan
    items += [(f"delta:{d}", rep) for d, rep in sorted(reports.items())]
    return items


def test_c4_dark_residual(fig2_runs, scaling_runs, delta_scan):
    worst, where = 0.0, ""
    for name, rep in _collect_reports(fig2_runs, scaling_runs, delta_scan):
        val = float(np.max(rep.dark_residual_relative))
        if val > worst:
            worst, where = val, name
    ok = worst <= 1e-6
    msg = report_line(4, ok, f"max relative dark residual {worst:.2e} "
                             f"({where}); bound 1e-6")
    assert ok, msg


def test_c4_conservation(fig2_runs, scaling_runs, delta_scan):
    worst, where = 0.0, ""
    for name, rep in _collect_reports(fig2_runs, scaling_runs, delta_scan):
        if rep.conservation_defect > worst:
            worst, where = rep.conservation_defect, name
    ok = worst <= 1e-3
    msg = report_line(4, ok, f"max |P_l - 1| outside clamped region "
                             f"{worst:.2e} ({where}); bound 1e-3")
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 5: explicit / implicit method equivalence

@pytest.fixture(scope="session")
def method_pair():
    grid = make_time_grid(0.0, 40.0, 0.0025)
    cfg = NetworkConfig(n=2, grid=grid)
    emitter = emitter_pulses(2, FIG2, grid)
    target = named_unitary("hadamard", 2)
    return (target, synthesize_explicit(cfg, target, emitter),
            synthesize_implicit(cfg, target, emitter))


def test_c5_pulse_agreement(method_pair):
    _, re_, ri = method_pair
    sup = 0.0
    for mode in (2, 3):
        start = max(tail_start(re_.pulses_b, mode),
                    tail_start(ri.pulses_b, mode))
        diff = np.abs(re_.pulses_b.samples[mode]
                      - ri.pulses_b.samples[mode])[start:]
        sup = max(sup, float(diff.max()))
    ok = sup <= 1e-3
    msg = report_line(5, ok, f"receiver pulse sup difference {sup:.2e}; "
                             "bound 1e-3")
    assert ok, msg


def test_c5_fidelity_agreement(method_pair):
    _, re_, ri = method_pair
    gap = abs(re_.fidelity - ri.fidelity)
    ok = gap <= 1e-4
    msg = report_line(5, ok, f"|F_explicit - F_implicit| = {gap:.2e}; "
                             "bound 1e-4")
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 6: loss formula against full simulation

def test_c6_loss_formula():
    from bosoncast import analytic_loss_fidelity, process_fidelity
    details, ok = [], True
    for family in ("hadamard", "swap"):
        for n in (2, 4, 8):
            target = named_unitary(family, n)
            tf = 20.0 * (1.0 + (n - 1) * 2.0)
            grid = make_time_grid(0.0, tf, DT)
            cfg = NetworkConfig(n=n, grid=grid)
            emitter = emitter_pulses(
                n, EmitterParams(delta=2.0, tau=1.0, t_c=tf / 2), grid)
            rep = synthesize_explicit(cfg, target, emitter)
            lossy = NetworkConfig(n=n, grid=grid, p_circulator=0.002)
            sim = process_fidelity(
                propagate_green(lossy, rep.pulses_b,
                                stride=grid.n_steps).g_ba(), target)
            ana = analytic_loss_fidelity(rep.fidelity, 0.0, tf, 0.0, 0.002, n)
            gap = abs(sim - ana)
            details.append(f"{family[0].upper()}{n}:{gap:.1e}")
            ok &= gap <= 1e-3
    msg = report_line(6, ok, f"|simulated - analytic| per case: "
                             f"{', '.join(details)}; bound 1e-3")
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 7: pulse-noise model and robustness

def test_c7_noise_generator_variance():
    grid = make_time_grid(0.0, 15000.0, DT)
    eps = 0.04
    x = noise_trajectory(NoiseParams(epsilon=eps, omega=1.0, seed=77), grid, 0)
    rel = abs(np.var(x) - eps) / eps
    ok = len(x) >= 10 ** 6 and rel <= 0.05
    msg = report_line(7, ok, f"stationary variance off by {rel * 100:.2f}% "
                             f"over {len(x)} samples; bound 5%")
    assert ok, msg


def test_c7_noise_robustness(hadamard4_trimmed):
    target, windows = hadamard4_trimmed
    _, _, rep = windows[0.99]
    cfg = NetworkConfig(n=4, grid=rep.pulses_b.grid)
    means = {}
    for omega in (1.0, 10.0):
        for eps in (1e-3, 1e-2, 1e-1):
            stats = ensemble_fidelity(
                cfg, rep.pulses_b, target,
                NoiseParams(epsilon=eps, omega=omega, seed=2024), n_runs=400)
            means[(omega, eps)] = stats.mean_fidelity
    infid = {k: 1.0 - v for k, v in means.items()}
    sublinear = (infid[(1.0, 1e-2)] < 10 * infid[(1.0, 1e-3)]
                 and infid[(1.0, 1e-1)] < 10 * infid[(1.0, 1e-2)])
    faster_better = all(means[(10.0, e)] >= means[(1.0, e)]
                        for e in (1e-3, 1e-2, 1e-1))
    ok = sublinear and faster_better
    msg = report_line(
        7, ok, "mean infidelity (Omega=1): " +
        ", ".join(f"{e:g}:{infid[(1.0, e)]:.4f}" for e in (1e-3, 1e-2, 1e-1))
        + "; Omega=10 +: " +
        ", ".join(f"{e:g}:{infid[(10.0, e)]:.4f}" for e in (1e-3, 1e-2, 1e-1)))
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 8: detuning robustness

def test_c8_detuned_synthesis(hadamard4_trimmed):
    target, windows = hadamard4_trimmed
    t0, tf, _ = windows[0.995]
    window = 1.5 * (tf - t0)
    rng = np.random.default_rng(4242)
    detunings = rng.uniform(-0.5, 0.5, 8)
    grid = make_time_grid(0.0, window, DT)
    cfg = NetworkConfig(n=4, grid=grid, detunings=detunings)
    # early ramp center: a detuned protocol cannot be restart-trimmed (the
    # mode phases are referenced to the synthesis start), so the budgeted
    # window is used directly with the dead sigmoid head kept short
    emitter = emitter_pulses(
        4, EmitterParams(delta=2.0, tau=1.0, t_c=0.2 * window), grid)
    rep = synthesize_explicit(cfg, target, emitter)
    ok = rep.fidelity >= 0.995
    msg = report_line(8, ok, f"detuned F={rep.fidelity:.5f} on window "
                             f"{window:.1f} (= 1.5 x resonant {tf - t0:.1f}); "
                             "bound 0.995")
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 9: waveguide-oracle equivalence

def test_c9_oracle_agreement():
    details, ok = [], True
    # N = 1 transfer with a bandwidth sweep
    grid = make_time_grid(0.0, 24.0, DT)
    cfg = NetworkConfig(n=1, grid=grid)
    emitter = emitter_pulses(1, EmitterParams(delta=2.0, tau=1.0, t_c=10.0),
                             grid)
    rep = synthesize_explicit(cfg, np.eye(1, dtype=complex), emitter)
    traj = propagate_green(cfg, rep.pulses_b, stride=grid.n_steps)
    devs = []
    for b in (25.0, 50.0, 100.0):
        oracle = simulate_waveguide(WaveguideModel(bandwidth=b), cfg,
                                    rep.pulses_b)
        devs.append(compare_to_cascaded(oracle, traj))
    details.append("N=1 dev(B=25,50,100)=" +
                   ",".join(f"{d:.1e}" for d in devs))
    ok &= devs[1] <= 0.02 and devs[0] > devs[1] > devs[2]
    # N = 2 transfer at the reference bandwidth
    grid2 = make_time_grid(0.0, 40.0, DT)
    cfg2 = NetworkConfig(n=2, grid=grid2)
    emitter2 = emitter_pulses(2, FIG2, grid2)
    rep2 = synthesize_explicit(cfg2, named_unitary("transfer", 2), emitter2)
    traj2 = propagate_green(cfg2, rep2.pulses_b, stride=grid2.n_steps)
    dev2 = compare_to_cascaded(
        simulate_waveguide(WaveguideModel(bandwidth=50.0), cfg2,
                           rep2.pulses_b), traj2)
    details.append(f"N=2 dev(B=50)={dev2:.1e}")
    ok &= dev2 <= 0.02
    msg = report_line(9, ok, "; ".join(details) + "; bound 0.02, monotone")
    assert ok, msg


# ---------------------------------------------------------------------------
# criterion 10: numerical hygiene

def test_c10_numerics(fig2_runs, scaling_runs, delta_scan):
    details, ok = [], True

    # RK4 order on a fixed N=2 run with exactly evaluated stage couplings
    def shape(x, tc, tau, eta):
        return eta / np.sqrt(np.exp(np.clip((tc - x) / tau, None, 700)) + 1.0)

    modes = [(12.0, 1.0, 1.0), (12.0, 1.0, 0.6), (18.0, 1.5, 0.8),
             (20.0, 2.0, 0.5)]

    def run(dt):
        g = make_time_grid(0.0, 30.0, dt)
        cfg = NetworkConfig(n=2, grid=g)
        t, th = g.times(), g.times()[:-1] + dt / 2
        samples = np.array([shape(t, *m) for m in modes], dtype=complex)
        halves = np.array([shape(th, *m) for m in modes], dtype=complex)
        return propagate_green(cfg, PulseSet(grid=g, samples=samples),
                               stride=g.n_steps, half_samples=halves).final

    e1 = np.max(np.abs(run(0.04) - run(0.02)))
    e2 = np.max(np.abs(run(0.02) - run(0.01)))
    ratio = e1 / e2
    details.append(f"RK4 halving ratio {ratio:.1f}")
    ok &= 12.0 <= ratio <= 20.0

    # silent network leaves the propagator exactly at the identity
    grid = make_time_grid(0.0, 10.0, DT)
    cfg = NetworkConfig(n=2, grid=grid)
    quiet = PulseSet(grid=grid, samples=np.zeros((4, grid.n_nodes)))
    traj = propagate_green(cfg, quiet, stride=100)
    exact = all(np.array_equal(s, np.eye(4)) for s in traj.samples)
    details.append(f"zero-coupling identity exact={exact}")
    ok &= exact

    # passivity and fidelity bounds across every synthesized example
    worst_row, worst_fid = 0.0, 0.0
    for name, rep in _collect_reports(fig2_runs, scaling_runs, delta_scan):
        sub_cfg = NetworkConfig(n=rep.pulses_b.n_registers,
                                grid=rep.pulses_b.grid)
        sub = propagate_green(sub_cfg, rep.pulses_b,
                              stride=max(1, rep.pulses_b.grid.n_steps // 16))
        worst_row = max(worst_row, float(np.max(sub.row_norms())))
        worst_fid = max(worst_fid, float(np.max(rep.fidelity_trace)))
    details.append(f"max row norm {worst_row:.9f}")
    details.append(f"max fidelity {worst_fid:.9f}")
    ok &= worst_row <= 1.0 + 1e-6 and worst_fid <= 1.0 + 1e-9
    msg = report_line(10, ok, "; ".join(details))
    assert ok, msg
