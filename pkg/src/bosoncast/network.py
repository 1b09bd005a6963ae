"""Cascaded network model: coupling matrix and Green's-function propagation.

The network is a chain of 2N bosonic modes coupled to a unidirectional
channel; mode amplitudes obey y' = -M(t) y with a lower-triangular M(t)
built from the instantaneous couplings. The Green's function G(t, t0) is
the matrix solution with G(t0, t0) = I and carries the realized map from
the emitting register (block G_BA) once the protocol completes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import PropagationBlowupError
from .grid import TimeGrid
from .pulses import PulseSet


@dataclass
class NetworkConfig:
    """Physical parameters of the 2N-mode cascaded network.

    Detunings, the local decay rate and the time grid are expressed in
    units of the maximal channel decay rate; loss probabilities are per
    pass (circulator) and per register-to-register hop (channel).
    """

    n: int
    grid: TimeGrid
    detunings: np.ndarray = None  # (2N,) real
    local_decay: float = 0.0
    p_channel: float = 0.0
    p_circulator: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one mode per register, got n = {self.n}")
        if self.detunings is None:
            self.detunings = np.zeros(2 * self.n)
        self.detunings = np.asarray(self.detunings, dtype=float)
        if self.detunings.shape != (2 * self.n,):
            raise ValueError(
                f"detunings must have shape (2N,) = ({2 * self.n},), "
                f"got {self.detunings.shape}")
        if not np.all(np.isfinite(self.detunings)):
            raise ValueError("detunings must be finite")
        if not (np.isfinite(self.local_decay) and self.local_decay >= 0):
            raise ValueError(f"local_decay must be >= 0, got {self.local_decay}")
        for name, p in (("p_channel", self.p_channel),
                        ("p_circulator", self.p_circulator)):
            if not (0.0 <= p < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {p}")

    @property
    def n_modes(self):
        return 2 * self.n

    def diagonal(self):
        """Complex diagonal i Delta_mu + gamma/2 of the coupling matrix."""
        return 1j * self.detunings + 0.5 * self.local_decay

    def loss_factors(self):
        """(f_circulator, f_channel) amplitude factors of the cascade."""
        return 1.0 - self.p_circulator, np.sqrt(1.0 - self.p_channel)

    def ideal(self):
        """Copy of this config with losses and local decay removed."""
        return NetworkConfig(n=self.n, grid=self.grid,
                             detunings=self.detunings.copy())


def coupling_matrix(config, g):
    """Dense coupling matrix M at a single time for couplings g (length 2N).

    M_{mu,nu} = (i Delta_mu + gamma/2) delta_{mu,nu}
              + g_mu conj(g_nu) f_c^(mu-nu) f_ch^sigma(mu,nu)   for mu >= nu,

    with the convention that the equal-index term enters with weight 1/2,
    which reproduces the -|g_mu|^2 / 2 damping of each mode. sigma is 1 for
    entries linking the two registers and 0 otherwise.
    """
    g = np.asarray(g, dtype=complex)
    n2 = config.n_modes
    if g.shape != (n2,):
        raise ValueError(f"expected {n2} couplings, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("couplings must be finite")
    fc, fch = config.loss_factors()
    mu = np.arange(n2)
    w = np.where(mu[:, None] > mu[None, :], fc ** (mu[:, None] - mu[None, :]), 0.0)
    w = w * np.where((mu[:, None] >= config.n) & (mu[None, :] < config.n), fch, 1.0)
    np.fill_diagonal(w, 0.5)
    return np.diag(config.diagonal()) + np.outer(g, g.conj()) * w


@dataclass
class GreenTrajectory:
    """Sampled Green's function G(t_k, t0), lower triangular at every node."""

    grid: TimeGrid
    samples: np.ndarray        # (n_stored, 2N, 2N) complex
    sample_indices: np.ndarray  # (n_stored,) node indices into the grid
    n: int

    @property
    def times(self):
        return self.grid.t0 + self.grid.dt * self.sample_indices

    @property
    def final(self):
        """G(tf, t0)."""
        return self.samples[-1]

    def at_time(self, t):
        """Stored sample at grid time t."""
        k = self.grid.index_of(t)
        pos = np.searchsorted(self.sample_indices, k)
        if pos >= len(self.sample_indices) or self.sample_indices[pos] != k:
            raise ValueError(f"no stored sample at t = {t!r} (strided trajectory)")
        return self.samples[pos]

    def g_aa(self, i=-1):
        return self.samples[i, :self.n, :self.n]

    def g_ba(self, i=-1):
        return self.samples[i, self.n:, :self.n]

    def g_bb(self, i=-1):
        return self.samples[i, self.n:, self.n:]

    def row_norms(self):
        """Euclidean norm of every row at every stored sample, (n_stored, 2N)."""
        return np.sqrt(np.sum(np.abs(self.samples) ** 2, axis=2))


def _node_major(pulses):
    """Pulse samples reordered node-major (n_nodes, 2N), contiguous."""
    return np.ascontiguousarray(pulses.samples.T)


def propagate_green(config, pulses, stride=1, half_samples=None):
    """Integrate G' = -M(t) G from the identity across the grid.

    Classical fixed-step RK4 on the pulse grid; half-step couplings are the
    linear interpolants of adjacent samples unless exact half-step values
    are supplied in ``half_samples`` (shape (2N, n_steps)). ``stride``
    thins the stored trajectory (the final node is always kept).

    Raises PropagationBlowupError with the first offending time if the
    state leaves the finite range.
    """
    if pulses.grid != config.grid:
        raise ValueError("pulses are not defined on the config grid")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n2 = config.n_modes
    if pulses.n_modes != n2:
        raise ValueError(f"pulse set has {pulses.n_modes} modes, config {n2}")
    gs = _node_major(pulses)
    n_steps = config.grid.n_steps
    store_idx = np.arange(0, n_steps + 1, stride)
    if store_idx[-1] != n_steps:
        store_idx = np.append(store_idx, n_steps)
    traj = np.empty((len(store_idx), n2, n2), dtype=complex)
    fc, fch = config.loss_factors()
    if half_samples is None:
        gh = np.zeros((1, n2), dtype=complex)
        use_exact = False
    else:
        gh = np.ascontiguousarray(np.asarray(half_samples, dtype=complex).T)
        if gh.shape != (n_steps, n2):
            raise ValueError("half_samples must have shape (2N, n_steps)")
        use_exact = True
    bad = _kernels.rk4_cascade(config.diagonal(), fc, fch, config.n, gs, gh,
                               use_exact, config.grid.dt,
                               np.eye(n2, dtype=complex), store_idx, traj)
    if bad >= 0:
        raise PropagationBlowupError(config.grid.t0 + bad * config.grid.dt)
    return GreenTrajectory(grid=config.grid, samples=traj,
                           sample_indices=store_idx, n=config.n)


def _projected_columns(u):
    """Initial condition G U^dag restricted to the excited columns.

    Row layout (2N, N): the emitting register carries conj(U[l, nu]) in
    column l, the receiving register starts empty.
    """
    n = u.shape[0]
    y0 = np.zeros((2 * n, n), dtype=complex)
    y0[:n, :] = u.conj().T
    return y0


def out_field(traj, pulses, target, mu, ell, t):
    """Out-field amplitude just past mode mu for initial excitation column ell.

    Indices follow the chain convention: mu = 0 addresses the vacuum input
    ahead of the first mode (amplitude 0), mu = 1..2N the channel right
    after that mode; ell = 1..N selects the excited superposition given by
    row ell of the target unitary.
    """
    n = traj.n
    if not (0 <= mu <= 2 * n):
        raise ValueError(f"mode index mu must lie in 0..{2 * n}, got {mu}")
    if not (1 <= ell <= n):
        raise ValueError(f"column ell must lie in 1..{n}, got {ell}")
    if mu == 0:
        return 0.0 + 0.0j
    g_t = pulses.samples[:, pulses.grid.index_of(t)]
    sample = traj.at_time(t)
    col = sample[:, :n] @ target.conj().T[:, ell - 1]
    return np.sum(g_t[:mu].conj() * col[:mu])


def excitation_probability(traj, target, ell, t):
    """Total excitation within the first N + ell modes for column ell at t."""
    n = traj.n
    if not (1 <= ell <= n):
        raise ValueError(f"column ell must lie in 1..{n}, got {ell}")
    sample = traj.at_time(t)
    col = sample[:, :n] @ target.conj().T[:, ell - 1]
    return float(np.sum(np.abs(col[:n + ell]) ** 2))
