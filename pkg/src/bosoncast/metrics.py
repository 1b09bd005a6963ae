"""Fidelity functionals over realized register-to-register maps."""

from dataclasses import dataclass

import numpy as np


@dataclass
class FidelityTrace:
    """Process fidelity sampled along a propagation."""

    times: np.ndarray
    values: np.ndarray

    @property
    def final(self):
        return float(self.values[-1])


def process_fidelity(g_ba, target):
    """Process fidelity of the realized map g_ba against the target unitary.

    F = (|Tr(U^dag G_BA)|^2 + Tr(G_BA^dag G_BA)) / (N (N + 1))

    Equals 1 exactly when g_ba = e^{i theta} U (global phases are free) and
    0 for the fully lost map.
    """
    g_ba = np.asarray(g_ba, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if g_ba.shape != target.shape or g_ba.ndim != 2 or g_ba.shape[0] != g_ba.shape[1]:
        raise ValueError(
            f"shape mismatch: map {g_ba.shape} vs target {target.shape}")
    n = g_ba.shape[0]
    tr = np.trace(target.conj().T @ g_ba)
    frob = np.sum(np.abs(g_ba) ** 2)
    return float((np.abs(tr) ** 2 + frob) / (n * (n + 1)))


def fidelity_trace(traj, target):
    """Process fidelity at every stored sample of a Green trajectory."""
    values = np.array([process_fidelity(traj.g_ba(i), target)
                       for i in range(len(traj.samples))])
    return FidelityTrace(times=traj.times, values=values)


def analytic_loss_fidelity(f_ideal, gamma, t_p, p_ch, p_circ, n):
    """Loss-reduced fidelity: local decay, one channel hop, 2N circulator passes.

    F = F_ideal * exp(-gamma t_p) * (1 - p_ch) * (1 - p_circ)^(2N)
    """
    if not (0.0 <= p_ch < 1.0 and 0.0 <= p_circ < 1.0):
        raise ValueError("loss probabilities must lie in [0, 1)")
    if gamma < 0 or t_p < 0 or n < 1:
        raise ValueError("gamma and t_p must be >= 0 and n >= 1")
    return float(f_ideal * np.exp(-gamma * t_p) * (1.0 - p_ch)
                 * (1.0 - p_circ) ** (2 * n))
