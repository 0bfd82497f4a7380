"""Watch the learning-rate-free method invent its own learning rate.

Starting from d = 1e-6, the d multiplier grows monotonically as the distance
and gradient statistics accumulate, and the effective learning rate
(gamma_t * d_t, logged in every run record) traces an implicit warmup that
outlasts the explicit one.
"""

import pathlib

from optlab import run

record = run(
    {
        "problem.kind": "quadratic",
        "problem.dim": 20,
        "problem.condition": 10.0,
        "optimizer.name": "prodigy",
        "optimizer.lr": 1.0,
        "optimizer.weight_decay": 0.0,
        "schedule.family": "cosine",
        "schedule.warmup_steps": 50,
        "run.steps": 500,
        "run.seed": 3,
    }
)

print(f"{'step':>5} {'d_t':>12} {'effective lr':>14} {'loss':>12}")
for row in record.rows:
    if row.step in (1, 2, 5, 10, 25, 50, 100, 200, 350, 500):
        print(f"{row.step:>5} {row.d:>12.3e} {row.effective_lr:>14.3e} {row.loss:>12.4e}")

out = pathlib.Path("runs/demo-prodigy")
out.mkdir(parents=True, exist_ok=True)
lines = ["step,d,effective_lr"] + [f"{r.step},{r.d!r},{r.effective_lr!r}" for r in record.rows]
(out / "effective_lr.csv").write_text("\n".join(lines) + "\n")
print(f"\nd grew {record.rows[-1].d / record.rows[0].d:.0f}x; curve written to {out}/effective_lr.csv")
