"""First-principles check: single excitation in a mode-discretized waveguide.

Instead of the cascaded (Markovian) coupling matrix, this module evolves the
joint amplitude of the 2N register modes and a band of explicit field modes
with linear dispersion over [-B, B] around the carrier. Register modes sit
at strictly increasing positions along the line; unidirectional propagation
plus separations large against 1/B reproduce the cascade ordering, and the
time-advanced convention (pulses shifted by each mode's propagation delay,
amplitudes read out at correspondingly shifted times) makes the result
directly comparable with the delay-free cascaded Green's function computed
from the same pulse arrays. Agreement improves as 1/B.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import UnderResolvedError

DEFAULT_SEPARATION = 2.0  # delay between neighboring modes, units of 1/gamma_max
MIN_BANDWIDTH = 10.0


@dataclass
class WaveguideModel:
    """Discretized unidirectional waveguide.

    positions holds per-mode propagation times x_mu / v (strictly
    increasing); n_wg_modes the number of field modes (None picks the
    resolution bound for the run length automatically).
    """

    bandwidth: float = 50.0
    n_wg_modes: int = None
    positions: np.ndarray = None
    separation: float = DEFAULT_SEPARATION

    def __post_init__(self):
        if self.bandwidth < MIN_BANDWIDTH:
            raise ValueError(
                f"bandwidth must be >= {MIN_BANDWIDTH:g} (broadband regime), "
                f"got {self.bandwidth}")
        if self.positions is not None:
            self.positions = np.asarray(self.positions, dtype=float)
            if np.any(np.diff(self.positions) <= 0):
                raise ValueError("mode positions must be strictly increasing")

    def resolved_positions(self, n_modes):
        if self.positions is None:
            return self.separation * np.arange(n_modes, dtype=float)
        if self.positions.shape != (n_modes,):
            raise ValueError(f"expected {n_modes} positions, "
                             f"got {self.positions.shape}")
        return self.positions


def required_modes(bandwidth, t_span):
    """Resolution bound: field-mode count needed for an un-aliased run."""
    return int(np.ceil(4.0 * bandwidth * t_span / np.pi))


def simulate_waveguide(model, config, pulses, diagnostics=False):
    """Register-to-register map from the discretized-waveguide dynamics.

    Propagates each basis excitation of the emitting register and returns
    the N x N matrix of final receiving-register amplitudes (the oracle's
    version of the realized map). Requires a lossless configuration; the
    pulse arrays are shared with the cascaded model via the time-advanced
    convention. With ``diagnostics=True`` also returns a dict with the
    worst norm-conservation error and grid parameters.
    """
    if config.local_decay != 0 or config.p_channel != 0 or config.p_circulator != 0:
        raise ValueError("the waveguide oracle requires a lossless config")
    if pulses.grid != config.grid:
        raise ValueError("pulses are not defined on the config grid")
    n = config.n
    n2 = 2 * n
    grid = config.grid
    b = float(model.bandwidth)

    # integration step: resolve both the pulse grid and the kernel width 1/B
    refine = max(1, int(np.ceil(grid.dt * 5.0 * b)))
    dt_o = grid.dt / refine
    positions = model.resolved_positions(n2)
    shifts = np.round(positions / dt_o).astype(np.int64)
    n_steps_main = grid.n_steps * refine
    n_steps = n_steps_main + int(shifts[-1])
    t_span = (n_steps) * dt_o

    need = required_modes(b, t_span)
    n_modes = model.n_wg_modes if model.n_wg_modes is not None else need
    if n_modes < need:
        raise UnderResolvedError(n_modes, need)

    dnu = 2.0 * b / n_modes
    nu = -b + (np.arange(n_modes) + 0.5) * dnu
    kappa = np.sqrt(dnu / (2.0 * np.pi))
    shift_phase = np.exp(1j * nu[None, :] * positions[:, None])
    shift_phase = np.ascontiguousarray(shift_phase)

    # fine-grid pulses, then per-mode delay shifts with edge padding
    t_fine = np.arange(n_steps_main + 1) * dt_o + grid.t0
    fine = np.empty((n_steps_main + 1, n2), dtype=complex)
    tg = grid.times()
    for mu in range(n2):
        fine[:, mu] = (np.interp(t_fine, tg, pulses.samples[mu].real)
                       + 1j * np.interp(t_fine, tg, pulses.samples[mu].imag))
    g_phys = np.empty((n_steps + 1, n2), dtype=complex)
    for mu in range(n2):
        k = np.arange(n_steps + 1) - shifts[mu]
        k = np.clip(k, 0, n_steps_main)
        g_phys[:, mu] = fine[k, mu]

    read_idx = (n_steps_main + shifts).astype(np.int64)
    oracle = np.empty((n, n), dtype=complex)
    worst_norm = 0.0
    for col in range(n):
        a0 = np.zeros(n2, dtype=complex)
        a0[col] = 1.0
        a_read, norm_err = _kernels.waveguide_rk4(
            g_phys, config.detunings, dt_o, nu, shift_phase, kappa, a0,
            read_idx)
        oracle[:, col] = a_read[n:]
        worst_norm = max(worst_norm, float(norm_err))
    if diagnostics:
        return oracle, {"norm_error": worst_norm, "n_wg_modes": n_modes,
                        "dt": dt_o, "t_span": t_span,
                        "positions": positions}
    return oracle


def compare_to_cascaded(oracle, traj):
    """Largest elementwise deviation between the oracle map and G_BA(tf)."""
    oracle = np.asarray(oracle, dtype=complex)
    g_ba = traj.g_ba()
    if oracle.shape != g_ba.shape:
        raise ValueError(f"shape mismatch: oracle {oracle.shape} vs "
                         f"cascaded {g_ba.shape}")
    return float(np.max(np.abs(oracle - g_ba)))
