"""Pulse-distortion noise, detuning frames and ensemble fidelity studies.

Pulse distortions are modeled as stationary exponentially correlated noise
added to the programmed couplings: strength epsilon sets the stationary
variance, bandwidth omega the inverse correlation time (covariance
epsilon * exp(-omega |t - t'| / 2)). The discretization is exact, so the
sampled statistics do not depend on the grid step.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .metrics import process_fidelity
from .network import _node_major
from .pulses import PulseSet
from .unitaries import check_unitary


@dataclass(frozen=True)
class NoiseParams:
    """Stationary filtered-noise parameters (strength, bandwidth, seed)."""

    epsilon: float
    omega: float
    seed: int = 0
    complex_noise: bool = False

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


@dataclass
class EnsembleStats:
    """Moments of the final fidelity over independent noise realizations."""

    mean_fidelity: float
    std_fidelity: float
    n_runs: int
    failed_runs: int = 0
    per_run: np.ndarray = None


def _substream(*keys):
    """Deterministic generator for a tuple of integer keys."""
    return np.random.default_rng(np.random.SeedSequence([int(k) & 0xFFFFFFFF
                                                         for k in keys]))


def _single_trajectory(params, grid, rng):
    if params.epsilon == 0.0:
        return np.zeros(grid.n_nodes)
    phi = np.exp(-0.5 * params.omega * grid.dt)
    sig = np.sqrt(params.epsilon * (1.0 - np.exp(-params.omega * grid.dt)))
    x0 = np.sqrt(params.epsilon) * rng.standard_normal()
    innov = sig * rng.standard_normal(grid.n_steps)
    return _kernels.ar1_recursion(phi, x0, innov)


def noise_trajectory(params, grid, mode):
    """Stationary noise sample path for one mode on the grid.

    The first sample is drawn from the stationary distribution and the
    recursion x_{k+1} = e^{-omega dt / 2} x_k + sqrt(eps (1 - e^{-omega dt}))
    * N(0,1) reproduces the model covariance exactly at the grid times.
    Streams are independent per (seed, mode).
    """
    rng = _substream(params.seed, mode)
    if params.complex_noise:
        half = NoiseParams(epsilon=0.5 * params.epsilon, omega=params.omega,
                           seed=params.seed)
        re = _single_trajectory(half, grid, _substream(params.seed, mode, 0))
        im = _single_trajectory(half, grid, _substream(params.seed, mode, 1))
        return re + 1j * im
    return _single_trajectory(params, grid, rng)


def perturb_pulses(pulses, params):
    """Add an independent noise trajectory to every mode's samples.

    The perturbed set is returned with clamp flags cleared: distorted
    couplings may exceed the unit bound and are deliberately not re-clamped
    (the distortion acts downstream of the pulse programming).
    """
    out = pulses.copy()
    if params.epsilon == 0.0:
        out.clamped_flag = np.zeros(out.n_modes, dtype=bool)
        return out
    for mode in range(out.n_modes):
        out.samples[mode] += noise_trajectory(params, out.grid, mode)
    out.clamped_flag = np.zeros(out.n_modes, dtype=bool)
    return out


def ensemble_fidelity(config, pulses, target, params, n_runs, keep_runs=False):
    """Mean and spread of the final fidelity under pulse noise.

    Each run perturbs the pulses with an independent substream derived from
    (seed, run index), propagates, and scores the final map. Results are
    deterministic for a fixed seed and run count regardless of execution
    order. Runs that blow up numerically are excluded and counted.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    target = check_unitary(target)
    fc, fch = config.loss_factors()
    dvec = config.diagonal()
    uconj = np.ascontiguousarray(target.conj())
    values = np.empty(n_runs)
    for r in range(n_runs):
        run_seed = int(np.random.SeedSequence(
            [int(params.seed) & 0xFFFFFFFF, r]).generate_state(1)[0])
        run_params = NoiseParams(epsilon=params.epsilon, omega=params.omega,
                                 seed=run_seed,
                                 complex_noise=params.complex_noise)
        perturbed = perturb_pulses(pulses, run_params)
        values[r] = _kernels.fidelity_final(dvec, fc, fch, config.n,
                                            _node_major(perturbed),
                                            config.grid.dt, uconj)
    good = np.isfinite(values)
    kept = values[good]
    if len(kept) == 0:
        raise RuntimeError("all ensemble runs failed to propagate")
    return EnsembleStats(mean_fidelity=float(np.mean(kept)),
                         std_fidelity=float(np.std(kept)),
                         n_runs=int(len(kept)),
                         failed_runs=int(n_runs - len(kept)),
                         per_run=values if keep_runs else None)


def rotating_frame_transform(pulses, detunings, direction):
    """Per-mode frame rotation of the pulse phases.

    ``to_rotating`` multiplies mode mu by exp(-i Delta_mu (t - t0)),
    ``from_rotating`` by the inverse; the two compose to the identity.
    """
    detunings = np.asarray(detunings, dtype=float)
    if detunings.shape != (pulses.n_modes,):
        raise ValueError(f"expected {pulses.n_modes} detunings, "
                         f"got shape {detunings.shape}")
    if direction == "to_rotating":
        sign = -1.0
    elif direction == "from_rotating":
        sign = 1.0
    else:
        raise ValueError(f"unknown direction {direction!r}")
    t = pulses.grid.times() - pulses.grid.t0
    out = pulses.copy()
    out.samples *= np.exp(1j * sign * detunings[:, None] * t[None, :])
    return out
