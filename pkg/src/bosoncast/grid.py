"""Uniform time grids.

All times in this package are expressed in units of the inverse maximal
decay rate into the channel, so a coupling of unit magnitude corresponds
to the fastest allowed emission.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid over [t0, tf] with n_steps intervals (n_steps + 1 nodes)."""

    t0: float
    tf: float
    dt: float
    n_steps: int
    tf_adjustment: float = field(default=0.0, compare=False)

    @property
    def n_nodes(self):
        return self.n_steps + 1

    @property
    def span(self):
        return self.tf - self.t0

    def times(self):
        """Node times as an array of length ``n_steps + 1``."""
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    def index_of(self, t, tol=1e-9):
        """Index of the grid node at time ``t``; raises if ``t`` is off-grid."""
        k = int(round((t - self.t0) / self.dt))
        if k < 0 or k > self.n_steps or abs(self.t0 + k * self.dt - t) > tol:
            raise ValueError(f"t = {t!r} is not a node of the grid")
        return k


def make_time_grid(t0, tf, dt):
    """Build a uniform grid over [t0, tf] with step dt.

    tf is adjusted to the nearest grid node; the adjustment is recorded in
    ``TimeGrid.tf_adjustment``. The window must contain at least two steps.
    """
    for name, val in (("t0", t0), ("tf", tf), ("dt", dt)):
        if not np.isfinite(val):
            raise ValueError(f"{name} must be finite, got {val!r}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if tf <= t0:
        raise ValueError(f"empty time window: tf = {tf!r} <= t0 = {t0!r}")
    n_steps = int(round((tf - t0) / dt))
    if n_steps < 2:
        raise ValueError("window must span at least two steps")
    tf_snap = t0 + n_steps * dt
    return TimeGrid(t0=float(t0), tf=float(tf_snap), dt=float(dt),
                    n_steps=n_steps, tf_adjustment=float(tf_snap - tf))
