# Generating the four Bell states in the protected subspace.
#
# An X(pi/2) pulse on the control followed by the compiled CNOT maps the
# four logical basis states onto the four Bell states.  Noise-free the
# mapping is exact; with the calibrated error model (5% addressing
# crosstalk, 8% intensity imbalance, AC-Stark and collective phase
# jitter) the fidelities land where a real ion-string experiment does.

import numpy as np

from dfsqc.encoding import LogicalRegister, encode
from dfsqc.gates import (PulseSequence, bell_state_logical, compile_cnot,
                         ms_pulse, sequence_unitary)
from dfsqc.noise import CALIBRATED_NOISE, sample_noisy_channel
from dfsqc.tomography import dfs_report

reg = LogicalRegister(2)
cnot = compile_cnot(0, 1, reg)
prep = ms_pulse(np.pi / 2, 0, reg)
seq = PulseSequence(ops=[prep] + list(cnot.ops), register=reg)

print("noise-free generation")
print("input   fidelity      permanence")
for k in range(4):
    bits = format(k, "02b")
    out = sequence_unitary(seq) @ encode(reg, bits)
    perm, fid, _ = dfs_report(np.outer(out, out.conj()),
                              bell_state_logical(bits), reg)
    print(f"  {bits}   {fid:.12f}  {perm:.12f}")

print("\ncalibrated noise model:", CALIBRATED_NOISE)
print("input   fidelity  permanence  overall")
for k in range(4):
    bits = format(k, "02b")
    rho = sample_noisy_channel(seq, encode(reg, bits), CALIBRATED_NOISE,
                               n_samples=400)
    perm, fid, overall = dfs_report(rho, bell_state_logical(bits), reg)
    print(f"  {bits}   {fid:8.4f}  {perm:10.4f}  {overall:7.4f}")

print("\nfor context, a published ion-string experiment reached Bell "
      "fidelities of {89, 91, 91, 92}% at permanences of "
      "{90.2, 94.3, 83.9, 86.0}%")
