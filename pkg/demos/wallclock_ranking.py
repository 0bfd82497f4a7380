"""Isolate optimizer-step cost on a network with 512x512 matrix blocks.

Gradient evaluation is excluded by instrumentation, so the table reflects
pure update-rule cost: elementwise rules sit in single-digit milliseconds,
the rotating-basis rule pays for its matrix rotations plus periodic QR, and
the Newton-Schulz rules pay ~15 matrix products per step. Five reseeded
repeats, mean +/- standard deviation, as in the wall-clock protocol.
"""

from optlab import OPTIMIZER_NAMES, build_problem, time_optimizer

problem = build_problem("mlp", seed=5, in_dim=512, hidden=512, classes=10, samples=256, batch_size=16)

results = []
for name in OPTIMIZER_NAMES:
    timing = time_optimizer(name, {}, problem, steps=15, repeats=5, seed=0)
    results.append((timing.mean_ns / 1e6, timing.std_ns / 1e6, name))
    print(f"measured {name}")

print(f"\n{'optimizer':14} {'mean':>9} {'std':>8}")
for mean, std, name in sorted(results, reverse=True):
    print(f"{name:14} {mean:7.2f}ms {std:6.2f}ms")
