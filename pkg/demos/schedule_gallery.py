"""Walk through the learning-rate schedule families and the two-EMA schedulers.

Every schedule shares a linear warmup; afterwards cosine and linear decay to
their final factors (0.01x and 0.001x of the peak by default), while WSD holds
the peak until the last 20% of the run and then cools down with the
(1 - sqrt(x)) shape. Run this file to print a small table and write
plot-ready CSVs under runs/demo-schedules/.
"""

import pathlib

from optlab import EmaScheduleSpec, ScheduleSpec, ademamix_alpha_at, ademamix_beta3_at, lr_at

TOTAL, WARMUP, PEAK = 1000, 100, 1e-3

out_dir = pathlib.Path("runs/demo-schedules")
out_dir.mkdir(parents=True, exist_ok=True)

# --- the four families side by side -------------------------------------
specs = {family: ScheduleSpec(family, PEAK, TOTAL, WARMUP) for family in ("constant", "cosine", "linear", "wsd")}

print(f"{'step':>6} " + " ".join(f"{name:>12}" for name in specs))
for t in (1, 50, 100, 300, 500, 800, 810, 900, 1000):
    row = " ".join(f"{lr_at(spec, t):12.6g}" for spec in specs.values())
    print(f"{t:>6} {row}")

for name, spec in specs.items():
    lines = ["step,lr"] + [f"{t},{lr_at(spec, t)!r}" for t in range(1, TOTAL + 1)]
    (out_dir / f"lr_{name}.csv").write_text("\n".join(lines) + "\n")

# --- the slow-EMA mixing schedulers --------------------------------------
# alpha ramps linearly to its cap; beta3 interpolates from beta_start to
# beta3 in log space, so early steps behave like plain AdamW
ema = EmaScheduleSpec(alpha=8.0, beta3=0.9999, beta_start=0.9, t_alpha=TOTAL, t_beta3=TOTAL)
print("\nslow-EMA schedulers (alpha cap 8, beta3 0.9999):")
for t in (1, 10, 100, 250, 500, 1000):
    print(f"  t={t:>5}  alpha(t)={ademamix_alpha_at(ema, t):8.4f}  beta3(t)={ademamix_beta3_at(ema, t):.6f}")

lines = ["step,alpha,beta3"]
for t in range(1, TOTAL + 1):
    lines.append(f"{t},{ademamix_alpha_at(ema, t)!r},{ademamix_beta3_at(ema, t)!r}")
(out_dir / "ema_schedulers.csv").write_text("\n".join(lines) + "\n")

print(f"\nwrote curves to {out_dir}/")
