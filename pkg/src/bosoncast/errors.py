"""Exception types shared across the package."""


class UnsupportedDimensionError(ValueError):
    """A named unitary family is not defined for the requested dimension."""


class PropagationBlowupError(RuntimeError):
    """The propagator produced non-finite values.

    Attributes
    ----------
    time : float
        First grid time at which a non-finite entry appeared.
    """

    def __init__(self, time):
        self.time = time
        super().__init__(f"non-finite propagator entries at t = {time:.6g}")


class SynthesisError(RuntimeError):
    """Receiver-pulse synthesis produced an indeterminate or non-finite value."""


class ThresholdUnreachableError(RuntimeError):
    """The fidelity threshold cannot be met even on the full synthesis window."""


class UnderResolvedError(ValueError):
    """The discretized waveguide has too few field modes for the run length.

    Attributes
    ----------
    required : int
        Minimal number of field modes for the requested bandwidth and duration.
    """

    def __init__(self, n_modes, required):
        self.n_modes = n_modes
        self.required = required
        super().__init__(
            f"waveguide under-resolved: {n_modes} field modes, need >= {required}"
        )
