"""bosoncast: control-pulse compiler for cascaded bosonic quantum networks.

Two registers of N bosonic modes talk through a unidirectional channel.
Given emitter ramps and a target N x N unitary, the package constructs the
receiver couplings that reabsorb the emitted multiphoton wavepacket while
realizing the target map, simulates the network's Green's function, and
quantifies the fidelity under detuning, pulse noise and photon loss.
"""

from .errors import (PropagationBlowupError, SynthesisError,
                     ThresholdUnreachableError, UnderResolvedError,
                     UnsupportedDimensionError)
from .grid import TimeGrid, make_time_grid
from .metrics import (FidelityTrace, analytic_loss_fidelity, fidelity_trace,
                      process_fidelity)
from .network import (GreenTrajectory, NetworkConfig, coupling_matrix,
                      excitation_probability, out_field, propagate_green)
from .noise import (EnsembleStats, NoiseParams, ensemble_fidelity,
                    noise_trajectory, perturb_pulses,
                    rotating_frame_transform)
from .pulses import (EmitterParams, PulseSet, emitter_amplitudes,
                     emitter_pulses)
from .synth import (SynthesisReport, clamp_pulse, phase_correct, synthesize,
                    synthesize_explicit, synthesize_implicit, trim_window)
from .unitaries import check_unitary, haar_random_unitary, named_unitary
from .waveguide import (WaveguideModel, compare_to_cascaded, required_modes,
                        simulate_waveguide)

__version__ = "0.1.0"

__all__ = [
    "EmitterParams", "EnsembleStats", "FidelityTrace", "GreenTrajectory",
    "NetworkConfig", "NoiseParams", "PropagationBlowupError", "PulseSet",
    "SynthesisError", "SynthesisReport", "ThresholdUnreachableError",
    "TimeGrid", "UnderResolvedError", "UnsupportedDimensionError",
    "WaveguideModel", "analytic_loss_fidelity", "check_unitary",
    "clamp_pulse", "compare_to_cascaded", "coupling_matrix",
    "emitter_amplitudes", "emitter_pulses", "ensemble_fidelity",
    "excitation_probability", "fidelity_trace", "haar_random_unitary",
    "make_time_grid", "named_unitary", "noise_trajectory", "out_field",
    "perturb_pulses", "phase_correct", "process_fidelity", "propagate_green",
    "required_modes", "rotating_frame_transform", "simulate_waveguide",
    "synthesize", "synthesize_explicit", "synthesize_implicit",
    "trim_window",
]
