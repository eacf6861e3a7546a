"""
A miniature benchmark run
=========================

Shrinks the standard single-pulse case to a handful of trials, runs the
full loop, and prints the CSV it would write.
"""

import math
from dataclasses import replace

import polarcpe as pc
from polarcpe import bench

cfg = replace(
    pc.default_config("A"),
    trials=5,
    K=1,
    N=100,
    min_separation=0.0,
    kappa_grid=(0.4, 1.0),
    snr_grid=(math.inf,),
    algorithms=("bomp", "poibomp"),
)

records = list(bench.run_case(cfg))
bench.emit_csv(records, "/tmp/benchmark_smoke.csv")

with open("/tmp/benchmark_smoke.csv") as fh:
    print(fh.read().strip())

bomp = [r.b_mse_us2 for r in records if r.algorithm == "bomp"]
polar = [r.b_mse_us2 for r in records if r.algorithm == "poibomp"]
print(f"\nmean b-MSE: bomp {sum(bomp) / len(bomp):.3e} us^2, "
      f"poibomp {sum(polar) / len(polar):.3e} us^2")
