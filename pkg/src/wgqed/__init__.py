"""Photon scattering from 1D arrays of two-level emitters.

Single- and few-photon transport through a waveguide coupled to a chain of
two-level emitters: closed-form single-emitter amplitudes, overflow-safe
transfer-matrix composition, phase-gate design on perfect-transmission
branches, positional/frequency disorder ensembles, finite-bandwidth pulse
observables and the single-emitter two-photon inelastic channel.
"""

__version__ = "0.1.0"

from .disorder import (DisorderEnsembleResult, DisorderSpec,
                       run_disorder_ensemble, sample_frequencies,
                       sample_position_phases, vectorial_phase_average)
from .gate import (CoverageBranch, OperatingPoint, QubitState,
                   concatenation_plan, design_gate, deterministic_detuning,
                   deterministic_phase_shift, find_coverage_branches,
                   operating_point, prepare_qubit_state_beamsplitter,
                   prepare_qubit_state_phase_gate, verify_operating_point)
from .pulse import (GaussianPulse, pulse_amplitude, pulse_phase_shift,
                    pulse_transmission_probability, scattered_pulse_amplitude)
from .scattering import (EmitterParams, SingleEmitterResponse,
                         reflection_coefficient_single,
                         reflection_transmission_ratio,
                         single_emitter_response,
                         transmission_coefficient_single)
from .sweeps import (SweepGrid, deviation_map, fit_power_law,
                     find_transparency_points, loss_area_ratio,
                     loss_scaling_samples, sweep_response)
from .transfer import (ArrayGeometry, ArrayResponse, ScaledMatrix, TimedArray,
                       array_response, array_response_from_params,
                       compose_array, emitter_transmission_matrix,
                       propagation_matrix, wrap_phase)
from .two_photon import (EnergyShellPoint, InelasticResult,
                         elastic_coefficient, inelastic_amplitude,
                         inelastic_density, symmetric_grid)
