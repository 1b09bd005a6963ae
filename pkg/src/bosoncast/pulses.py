"""Sampled control pulses for the 2N network modes.

Mode ordering follows the cascade: indices 0..N-1 are the emitting register
(A), indices N..2N-1 the receiving register (B). Couplings are dimensionless
complex amplitudes bounded by 1 in magnitude for physical pulses.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid import TimeGrid


@dataclass
class PulseSet:
    """Complex couplings g_mu(t_k) for all 2N modes on a grid.

    clamped_flag marks modes whose samples were forced to the unit-magnitude
    bound during synthesis; clamp_intervals lists, per mode, the inclusive
    node-index ranges where that happened.
    """

    grid: TimeGrid
    samples: np.ndarray  # (2N, n_nodes) complex
    clamped_flag: np.ndarray = None  # (2N,) bool
    clamp_intervals: list = field(default_factory=list)  # per mode: [(i0, i1)]

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=complex)
        if self.samples.ndim != 2 or self.samples.shape[0] % 2:
            raise ValueError("samples must have shape (2N, n_nodes)")
        if self.samples.shape[1] != self.grid.n_nodes:
            raise ValueError(
                f"sample count {self.samples.shape[1]} does not match grid "
                f"({self.grid.n_nodes} nodes)")
        if self.clamped_flag is None:
            self.clamped_flag = np.zeros(self.samples.shape[0], dtype=bool)
        if not self.clamp_intervals:
            self.clamp_intervals = [[] for _ in range(self.samples.shape[0])]

    @property
    def n_modes(self):
        return self.samples.shape[0]

    @property
    def n_registers(self):
        """Number of modes per register (N)."""
        return self.samples.shape[0] // 2

    def emitter(self, j):
        """Samples of register-A mode j (0-based)."""
        return self.samples[j]

    def receiver(self, j):
        """Samples of register-B mode j (0-based)."""
        return self.samples[self.n_registers + j]

    def areas(self):
        """Integral of |g|^2 dt per mode (trapezoidal)."""
        return np.trapezoid(np.abs(self.samples) ** 2, dx=self.grid.dt, axis=1)

    def clamp_mask(self, mode):
        """Boolean node mask, True where mode's samples were clamped."""
        mask = np.zeros(self.grid.n_nodes, dtype=bool)
        for i0, i1 in self.clamp_intervals[mode]:
            mask[i0:i1 + 1] = True
        return mask

    def restricted(self, i0, i1):
        """New PulseSet on the node window [i0, i1] (inclusive)."""
        g = self.grid
        sub = TimeGrid(t0=g.t0 + i0 * g.dt, tf=g.t0 + i1 * g.dt, dt=g.dt,
                       n_steps=i1 - i0)
        intervals = []
        for per_mode in self.clamp_intervals:
            kept = []
            for a, b in per_mode:
                a2, b2 = max(a, i0), min(b, i1)
                if a2 <= b2:
                    kept.append((a2 - i0, b2 - i0))
            intervals.append(kept)
        return PulseSet(grid=sub, samples=self.samples[:, i0:i1 + 1].copy(),
                        clamped_flag=self.clamped_flag.copy(),
                        clamp_intervals=intervals)

    def copy(self):
        return PulseSet(grid=self.grid, samples=self.samples.copy(),
                        clamped_flag=self.clamped_flag.copy(),
                        clamp_intervals=[list(iv) for iv in self.clamp_intervals])


@dataclass(frozen=True)
class EmitterParams:
    """Shape parameters of the emitting register's sigmoid pulses.

    delta staggers the saturation amplitudes across modes, tau sets the ramp
    time, t_c the ramp center. t_c may be left as None when a consumer (such
    as the window trimmer) fills it in as half the synthesis window.
    """

    delta: float = 2.0
    tau: float = 1.0
    t_c: float = None

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def emitter_amplitudes(n, delta):
    """Saturation amplitude eta_j per emitter mode, j = 1..N.

    eta_j = sqrt((1 + (N - j) delta) / (1 + (N - 1) delta)); the first mode
    saturates at the unit bound, later modes at progressively lower values.
    """
    j = np.arange(1, n + 1)
    return np.sqrt((1.0 + (n - j) * delta) / (1.0 + (n - 1) * delta))


def emitter_pulses(n, params, grid):
    """Sampled sigmoid ramps g_{A,j}(t) = eta_j / sqrt(exp((t_c - t)/tau) + 1).

    Register-B rows are zero-initialized; synthesis fills them in later.
    """
    if params.t_c is None:
        raise ValueError("EmitterParams.t_c must be set to build emitter pulses")
    t = grid.times()
    eta = emitter_amplitudes(n, params.delta)
    # exp argument is clipped to avoid overflow deep in the tail
    arg = np.clip((params.t_c - t) / params.tau, None, 700.0)
    ramp = 1.0 / np.sqrt(np.exp(arg) + 1.0)
    samples = np.zeros((2 * n, grid.n_nodes), dtype=complex)
    samples[:n] = eta[:, None] * ramp[None, :]
    return PulseSet(grid=grid, samples=samples)
