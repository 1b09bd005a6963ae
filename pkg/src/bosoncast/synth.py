"""Receiver-pulse synthesis from generalized dark-state conditions.

Given emitter pulses and a target N x N unitary, the receiver couplings are
constructed mode by mode so that, for every initial excitation pattern
(column of the target), the channel field just past the addressed receiver
mode vanishes: the photon destined for that mode is never allowed to travel
beyond it. Two constructions are provided: the explicit running-integral
formula and the implicit per-step relation closed by Euler co-integration.
Both clamp the coupling at the unit bound near the start of the protocol,
where the formula is indeterminate, and finish with per-mode phase
rotations that align the realized map with the target.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import SynthesisError, ThresholdUnreachableError
from .grid import make_time_grid
from .metrics import process_fidelity
from .network import NetworkConfig, propagate_green, _node_major
from .pulses import EmitterParams, PulseSet, emitter_pulses
from .unitaries import check_unitary

AREA_WARNING_THRESHOLD = 5.0
PHASE_SKIP_MAGNITUDE = 1e-6

_CLAMP_MODES = {"current": _kernels.CLAMP_CURRENT, "start": _kernels.CLAMP_START}
_QUAD_MODES = {"rk4": _kernels.QUAD_RK4, "trapezoid": _kernels.QUAD_TRAPEZOID}


@dataclass
class SynthesisReport:
    """Synthesized pulses plus the diagnostics of their final propagation."""

    pulses_b: PulseSet
    fidelity_trace: np.ndarray
    dark_residual: np.ndarray        # (N, n_nodes) |out-field past receiver l|
    conservation_defect: float
    phases: np.ndarray               # (N,) rotation removed from each receiver
    final_green: np.ndarray          # (2N, 2N)
    excitation: np.ndarray           # (N, n_nodes) excitation probability P_l
    dark_reference: np.ndarray       # (N,) max over t of the register-B in-field
    dark_residual_relative: np.ndarray  # (N,) max residual / reference, unclamped t
    method: str = "explicit"
    warnings: list = field(default_factory=list)

    @property
    def fidelity(self):
        """Process fidelity at the final time."""
        return float(self.fidelity_trace[-1])

    @property
    def times(self):
        return self.pulses_b.grid.times()


def clamp_pulse(raw, fallback_phase_source):
    """Cap a synthesized coupling at unit magnitude.

    Values within the bound pass through; larger finite values keep their
    phase (the phase of the synthesis formula's numerator, since the
    denominator is a positive square root) at magnitude one. Indeterminate
    values (0/0 at the start of the protocol) take the phase of
    ``fallback_phase_source``.
    """
    raw = complex(raw)
    if np.isfinite(raw.real) and np.isfinite(raw.imag):
        mag = abs(raw)
        if mag <= 1.0:
            return raw
        return raw / mag
    src = complex(fallback_phase_source)
    if src == 0:
        raise SynthesisError(
            "indeterminate synthesis value with a vanishing phase source")
    return src / abs(src)


def _mask_to_intervals(mask):
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return []
    splits = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[splits + 1]))
    ends = np.concatenate((idx[splits], [idx[-1]]))
    return list(zip(starts.tolist(), ends.tolist()))


def _diagnostics(config, gs, target):
    """Run the streaming diagnostics pass over node-major pulse samples."""
    n = config.n
    n_nodes = config.grid.n_nodes
    fid = np.empty(n_nodes)
    pl = np.empty((n_nodes, n))
    dark = np.empty((n_nodes, n))
    ref = np.empty((n_nodes, n))
    fc, fch = config.loss_factors()
    yfinal = _kernels.diagnostics_pass(config.diagonal(), fc, fch, n, gs,
                                       config.grid.dt,
                                       np.ascontiguousarray(target.conj()),
                                       fid, pl, dark, ref)
    return fid, pl, dark, ref, yfinal


def _assemble_report(config, gs, target, masks, method, warnings,
                     phases=None):
    n = config.n
    fid, pl, dark, ref, yfinal = _diagnostics(config, gs, target)
    clamped_flag = np.zeros(2 * n, dtype=bool)
    clamped_flag[n:] = True
    intervals = [[] for _ in range(n)] + [_mask_to_intervals(m) for m in masks]
    pulse_set = PulseSet(grid=config.grid, samples=gs.T.copy(),
                         clamped_flag=clamped_flag, clamp_intervals=intervals)
    defect = 0.0
    rel = np.zeros(n)
    ref_max = np.max(ref, axis=0)
    for lb in range(n):
        # diagnostics are scored on the well-behaved tail of each pulse:
        # everything through the mode's final clamped node belongs to the
        # regularized (clamped or indeterminate-formula) region
        clamped_nodes = np.flatnonzero(masks[lb])
        start = clamped_nodes[-1] + 1 if len(clamped_nodes) else 0
        if start < pl.shape[0]:
            defect = max(defect, float(np.max(np.abs(pl[start:, lb] - 1.0))))
            if ref_max[lb] > 0:
                rel[lb] = float(np.max(dark[start:, lb]) / ref_max[lb])
    final = propagate_green(config, pulse_set,
                            stride=config.grid.n_steps).final
    return SynthesisReport(
        pulses_b=pulse_set, fidelity_trace=fid, dark_residual=dark.T.copy(),
        conservation_defect=defect,
        phases=np.zeros(n) if phases is None else phases,
        final_green=final, excitation=pl.T.copy(), dark_reference=ref_max,
        dark_residual_relative=rel, method=method, warnings=warnings)


def _synthesize(config, target, emitter, method, clamp_phase, quadrature,
                correct_phases):
    target = check_unitary(target)
    n = config.n
    if target.shape[0] != n:
        raise ValueError(f"target is {target.shape[0]}x{target.shape[0]}, "
                         f"config has N = {n}")
    if emitter.grid != config.grid:
        raise ValueError("emitter pulses are not defined on the config grid")
    if emitter.n_modes != 2 * n:
        raise ValueError("emitter pulse set has the wrong number of modes")
    warnings = []
    areas = emitter.areas()[:n]
    for j, area in enumerate(areas):
        if area < AREA_WARNING_THRESHOLD:
            warnings.append(
                f"insufficient-emission: mode {j + 1} pulse area "
                f"{area:.3g} < {AREA_WARNING_THRESHOLD:g}; residual excitation "
                "will limit the fidelity")
    gs = _node_major(emitter)
    gs[:, n:] = 0.0
    n_nodes = config.grid.n_nodes
    fc, fch = config.loss_factors()
    dvec = config.diagonal()
    clamp_mode = _CLAMP_MODES[clamp_phase]
    masks = np.zeros((n, n_nodes), dtype=bool)
    uconj = np.ascontiguousarray(target.conj())
    for lb in range(n):
        g_row = np.empty(n_nodes, dtype=complex)
        f_row = np.empty(n_nodes, dtype=complex)
        if method == "explicit":
            bad = _kernels.synth_explicit_column(
                dvec, fc, fch, n, gs, config.grid.dt, lb, uconj[lb],
                _QUAD_MODES[quadrature], clamp_mode, g_row, masks[lb], f_row)
        else:
            bad = _kernels.synth_implicit_column(
                dvec, fc, fch, n, gs, config.grid.dt, lb, uconj[lb],
                clamp_mode, g_row, masks[lb], f_row)
        if bad >= 0:
            raise SynthesisError(
                f"synthesis failed for receiver mode {lb + 1} at "
                f"t = {config.grid.t0 + bad * config.grid.dt:.6g}")
    phases = np.zeros(n)
    if correct_phases:
        _, _, _, _, yfinal = _diagnostics(config, gs, target)
        for lb in range(n):
            diag = yfinal[n + lb, lb]
            if np.abs(diag) < PHASE_SKIP_MAGNITUDE:
                warnings.append(
                    f"phase-undefined: receiver mode {lb + 1} final amplitude "
                    f"{np.abs(diag):.3e} too small to correct")
                continue
            phases[lb] = np.angle(diag)
            gs[:, n + lb] *= np.exp(-1j * phases[lb])
    return _assemble_report(config, gs, target, masks, method, warnings,
                            phases=phases)


def synthesize_explicit(config, target, emitter, clamp_phase="current",
                        quadrature="rk4", correct_phases=True):
    """Receiver pulses from the explicit running-integral construction.

    For each receiver mode in cascade order the out-field amplitude just
    ahead of it is tabulated and the coupling set to

        g_B(t) = conj(F(t)) / sqrt(int_{t0}^t |F(s)|^2 ds).

    The running integral is accumulated through the same integrator stages
    as the amplitudes (``quadrature="rk4"``) or by the trapezoidal rule.
    ``clamp_phase`` selects the phase used where the bound |g| <= 1 is
    enforced: the current-time numerator ("current") or its value at the
    start of the protocol ("start").
    """
    return _synthesize(config, target, emitter, "explicit", clamp_phase,
                       quadrature, correct_phases)


def synthesize_implicit(config, target, emitter, clamp_phase="current",
                        correct_phases=True):
    """Receiver pulses from the implicit relation, closed step by step.

    The unknown Green's-function component of each receiver mode is
    advanced with explicit Euler using the previous node's coupling, and
    the coupling at the new node follows from g_B* = -F / [G U^dag]. Pulses
    agree with the explicit construction up to discretization error.
    """
    return _synthesize(config, target, emitter, "implicit", clamp_phase,
                       None, correct_phases)


def synthesize(config, target, emitter, method="explicit", **kwargs):
    """Dispatch to the explicit or implicit construction."""
    if method == "explicit":
        return synthesize_explicit(config, target, emitter, **kwargs)
    if method == "implicit":
        return synthesize_implicit(config, target, emitter, **kwargs)
    raise ValueError(f"unknown synthesis method {method!r}")


def phase_correct(report, config, target, emitter=None):
    """Rotate each receiver pulse to cancel its realized diagonal phase.

    Measures theta_l = arg([G_BA U^dag]_{ll}) from the report's final
    Green's function, applies g_B,l -> exp(-i theta_l) g_B,l, re-propagates
    and returns the updated report. Modes whose diagonal magnitude is below
    1e-6 are left untouched and recorded in the warnings.
    """
    n = config.n
    target = check_unitary(target)
    d = report.final_green[n:, :n] @ target.conj().T
    gs = _node_major(report.pulses_b)
    warnings = list(report.warnings)
    phases = report.phases.copy()
    for lb in range(n):
        diag = d[lb, lb]
        if np.abs(diag) < PHASE_SKIP_MAGNITUDE:
            warnings.append(
                f"phase-undefined: receiver mode {lb + 1} final amplitude "
                f"{np.abs(diag):.3e} too small to correct")
            continue
        theta = np.angle(diag)
        phases[lb] += theta
        gs[:, n + lb] *= np.exp(-1j * theta)
    masks = np.array([report.pulses_b.clamp_mask(n + lb) for lb in range(n)])
    return _assemble_report(config, gs, target, masks, report.method,
                            warnings, phases=phases)


def trim_window(config, target, params, threshold, initial_tf=None,
                method="explicit", **kwargs):
    """Find the minimal protocol window reaching the fidelity threshold.

    Synthesizes on a generous window [0, initial_tf] (by default
    20 (1 + (N-1) delta), with the emitter ramp centered at half the
    window), then, keeping the pulses fixed, advances the start time past
    the clamped initial region and walks the final time down node by node
    while the fidelity stays at or above the threshold. Returns
    (t0, tf, report) for the minimal window; the protocol time is tf - t0.
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    n = config.n
    if initial_tf is None:
        initial_tf = 20.0 * (1.0 + (n - 1) * params.delta)
    grid = make_time_grid(0.0, initial_tf, config.grid.dt)
    t_c = params.t_c if params.t_c is not None else 0.5 * grid.tf
    params = EmitterParams(delta=params.delta, tau=params.tau, t_c=t_c)
    cfg = NetworkConfig(n=n, grid=grid, detunings=config.detunings,
                        local_decay=config.local_decay,
                        p_channel=config.p_channel,
                        p_circulator=config.p_circulator)
    emitter = emitter_pulses(n, params, grid)
    report = synthesize(cfg, target, emitter, method=method, **kwargs)
    if float(np.max(report.fidelity_trace)) < threshold:
        raise ThresholdUnreachableError(
            f"best fidelity {np.max(report.fidelity_trace):.6f} on the full "
            f"window [0, {grid.tf:g}] is below the threshold {threshold:g}")
    pulses = report.pulses_b
    target = check_unitary(target)

    def _trace_from(i_start):
        sub_pulses = pulses.restricted(i_start, grid.n_steps)
        sub_cfg = NetworkConfig(n=n, grid=sub_pulses.grid,
                                detunings=cfg.detunings,
                                local_decay=cfg.local_decay,
                                p_channel=cfg.p_channel,
                                p_circulator=cfg.p_circulator)
        fid, _, _, _, _ = _diagnostics(sub_cfg, _node_major(sub_pulses),
                                       target)
        return fid

    def _window_from(i_start):
        """Steps kept when the final time walks down while F >= threshold."""
        fid = _trace_from(i_start)
        if float(np.max(fid)) < threshold:
            return None
        i1 = len(fid) - 1
        while fid[i1] < threshold and i1 > 2:
            i1 -= 1  # move down to the last node that clears the threshold
        while i1 > 2 and fid[i1 - 1] >= threshold:
            i1 -= 1
        return i1 if fid[i1] >= threshold else None

    # the start time advances past the clamped initial region and onward
    # while the threshold stays reachable; a coarse-to-fine linear scan
    # keeps the shortest feasible window (fidelity is not monotone near the
    # clamped region, so no bisection)
    best_i0, best_len = 0, _window_from(0)
    if best_len is None:
        raise ThresholdUnreachableError(
            f"threshold {threshold:g} unreachable on the synthesis window")
    lo, hi = 0, grid.n_steps - 2
    step = max(1, (hi - lo) // 48)
    fine = max(1, int(round(0.1 / grid.dt)))
    while True:
        for cand in range(lo, hi + 1, step):
            length = _window_from(cand)
            if length is None:
                hi = cand  # the start is cutting into the emission; stop
                break
            if length < best_len:
                best_i0, best_len = cand, length
        if step <= fine:
            break
        lo = max(0, best_i0 - step)
        hi = min(hi, best_i0 + step)
        step = max(1, step // 8)

    final_pulses = pulses.restricted(best_i0, best_i0 + best_len)
    final_cfg = NetworkConfig(n=n, grid=final_pulses.grid,
                              detunings=cfg.detunings,
                              local_decay=cfg.local_decay,
                              p_channel=cfg.p_channel,
                              p_circulator=cfg.p_circulator)
    masks = np.array([final_pulses.clamp_mask(n + lb) for lb in range(n)])
    trimmed = _assemble_report(final_cfg, _node_major(final_pulses),
                               check_unitary(target), masks, report.method,
                               list(report.warnings), phases=report.phases)
    trimmed = phase_correct(trimmed, final_cfg, target)
    return final_pulses.grid.t0, final_pulses.grid.tf, trimmed
