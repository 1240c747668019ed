"""Find the resonances of one nuclear spin and inspect the rotations there.

For each dip of the unit-level Makhlin invariant the electron-conditioned
rotation axes swing apart, which is what later builds entanglement when the
unit is repeated.
"""

import numpy as np

from ddghz import (
    SequenceBlock,
    SequencePlan,
    SequenceUnit,
    bundled_register,
    compose_sequence,
    g1,
    scan_resonances,
)

register = bundled_register()
spin = register.spin("C5")
unit = SequenceUnit.cpmg()

print(f"spin {spin.label}: A = {spin.A / (2e3 * np.pi):+.3f} kHz, "
      f"B = {spin.B / (2e3 * np.pi):.3f} kHz")
print()
print("order  t_res (us)  t_analytic (us)  G1 at dip")
seeds = scan_resonances(spin, register, unit, k_max=4)
for seed in seeds:
    print(f"  {seed.k}    {seed.t_resonance * 1e6:9.4f}   "
          f"{seed.t_analytic * 1e6:12.4f}   {seed.g1_min:.6f}")

seed = seeds[0]
print()
print(f"iterating the k = {seed.k} unit; one-tangle peaks when the")
print("conditional rotations differ by half a turn:")
print()
print("    N   angle0 (deg)  angle1 (deg)  axes dot   1 - G1")
for N in (1, 4, 16, 64, 177):
    plan = SequencePlan(blocks=(SequenceBlock(unit, seed.t_resonance, N),))
    cr = compose_sequence(spin, register, plan)
    print(f"  {N:4d}   {np.degrees(cr.phi0):11.2f}  {np.degrees(cr.phi1):12.2f}  "
          f"{cr.axis_dot:8.4f}   {1.0 - g1(cr).value:.6f}")
