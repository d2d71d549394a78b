# The universal encoded gate set and the compiled CNOT.
#
# Single-qubit z rotations come from an AC-Stark pulse on one ion of the
# pair, x rotations from a collective-spin pulse on both ions, and the
# two-qubit interaction from a phase gate on the two center ions of
# adjacent pairs.  The CNOT compiles into nine pulses whose composition,
# restricted to the encoded subspace, reproduces the target matrix up to
# a global phase.

import numpy as np

from dfsqc.encoding import LogicalRegister, restrict_to_dfs
from dfsqc.gates import (CNOT_LOGICAL, compile_cnot, sequence_unitary,
                         x_rotation_logical, z_rotation_logical)
from dfsqc.linalg import canonicalize_phase

reg = LogicalRegister(2)

# single-qubit rotations restricted to the logical basis
print("logical Z(pi/2) block:")
print(np.round(restrict_to_dfs(z_rotation_logical(np.pi / 2, 0, reg), reg), 4))
print("\nlogical X(pi/2) block:")
print(np.round(restrict_to_dfs(x_rotation_logical(np.pi / 2, 0, reg), reg), 4))

# the compiled CNOT pulse sequence
seq = compile_cnot(control=0, target=1, register=reg)
print("\npulse sequence (control = qubit 0, target = qubit 1):")
for i, op in enumerate(seq.ops):
    print(f"  {i + 1}. {op.kind:11s} ions {op.targets}  angle "
          f"{op.angle / np.pi:+.2f} pi   duration {op.duration * 1e6:7.1f} us")
print(f"total duration: {seq.total_duration * 1e6:.1f} us")

u = restrict_to_dfs(sequence_unitary(seq), reg)
print("\ncomposed unitary on the logical basis (phase canonicalized):")
print(np.round(canonicalize_phase(u), 6))
print("\ntarget matrix:")
print(np.round(canonicalize_phase(CNOT_LOGICAL), 6))
print("\nmax deviation:",
      np.max(np.abs(canonicalize_phase(u) - canonicalize_phase(CNOT_LOGICAL))))
