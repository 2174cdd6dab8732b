"""Order-of-magnitude measurement strength and frequency bound for a
neutron monitored with trap-grade resolution near the Earth's surface,
scanned over the resolution."""

import numpy as np

from gravmeasure.cow import paul_trap_estimate

base = paul_trap_estimate()
print("defaults:")
for a in base.assumptions:
    print("  " + a)
print(f"sqrt(gamma) = {base.sqrt_gamma:.3e}   bound = {base.frequency_bound:.3e} 1/s\n")

print(f"{'resolution_m':>14} {'sqrt_gamma':>12} {'bound_1/s':>12}")
for res in np.geomspace(2e-7, 2e-3, 9):
    r = paul_trap_estimate(resolution=float(res))
    print(f"{res:14.3e} {r.sqrt_gamma:12.4e} {r.frequency_bound:12.4e}")
