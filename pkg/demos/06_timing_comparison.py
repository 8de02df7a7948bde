#!/usr/bin/env python3
"""CPU-time growth of the two steppers.

The classical stepper re-sums its whole history each step, so its cost
grows quadratically with the step count M; the fast stepper's contour
recurrences keep the per-step work constant.  The asymptotic log-log
growth rates land near 2 and 1, and the fast variant wins outright once
M is in the thousands.
"""

import numpy as np

from fracspde.contour import ContourParams
from fracspde.harness import ExperimentConfig, timing_compare
from fracspde.noise import HurstPair
from fracspde.scheme import ModelParams

cfg = ExperimentConfig(
    model=ModelParams(alpha=0.7, s=0.5, hurst=HurstPair(0.5, 0.5), T=0.1, N=64, M=512),
    contour=ContourParams(L=200),
    samples=1,
    resolutions=(512, 1024, 2048, 4096, 8192),
    mode="timing",
    master_seed=1,
)
table = timing_compare(cfg)

print(f"{'M':>6} {'classical (s)':>14} {'fast (s)':>10}")
for m, tc, tf in zip(table.resolutions, table.classical_seconds, table.fast_seconds):
    print(f"{m:6d} {tc:14.3f} {tf:10.3f}")

rc, rf = table.pairwise_rates()
print("\npairwise log2 growth rates:")
print("  classical:", np.round(rc, 2))
print("  fast:     ", np.round(rf, 2))
sc, sf = table.slopes()
print(f"asymptotic slopes: classical {sc:.2f}, fast {sf:.2f} "
      f"(least-squares over the ladder: {table.slopes('fit')[0]:.2f}, {table.slopes('fit')[1]:.2f})")
