"""dfsqc: trapped-ion logical qubits in a collective-dephasing-free subspace.

Simulates the universal encoded gate set (AC-Stark z rotations,
collective-spin x rotations, a conditional phase gate on adjacent
pairs), compiles the encoded CNOT pulse sequence, models the dominant
error channels, runs the driven-oscillator gate mechanism with the
motional mode explicit, and reproduces the full characterization
pipeline: state and process tomography, chi matrices, permanence, and
Haar-averaged mean gate fidelity.
"""

from . import encoding, gates, linalg, motional, noise, tomography
from .encoding import (LogicalRegister, coherence_ratio, collective_dephasing,
                       decode_in_dfs, dfs_projector, encode, encode_state,
                       restrict_to_dfs)
from .errors import (ClosureError, ConfigError, ConditioningError,
                     CoverageError, DfsqcError, DimensionError,
                     EmptySubspaceError, LayoutError, TruncationError,
                     ValidationError)
from .gates import (CNOT_LOGICAL, GateParams, PulseOp, PulseSequence,
                    apply_sequence, bell_state_logical, compile_cnot,
                    cp_gate_logical, sequence_unitary, x_rotation_logical,
                    z_rotation_logical)
from .linalg import (expm_hermitian, fidelity, partial_trace, tensor)
from .motional import (DrivenOscillatorModel, effective_gate,
                       off_resonant_error_scan, propagate)
from .noise import (CALIBRATED_NOISE, NoiseModel, addressing_crosstalk,
                    imbalance_perturbation, sample_noisy_channel)
from .tomography import (ChiMatrix, TomographyDataset, chi_from_unitary,
                         dfs_report, haar_state, haar_unitary,
                         mean_gate_fidelity, process_fidelity,
                         process_tomography, reconstruct_state,
                         simulate_measurement)

__version__ = "0.1.0"
