"""Two weight-decay effects at desk scale.

First: with decoupled decay, larger lambda pins the parameter norm lower
(the classic norm-growth ablation), here with AdamW on the MLP problem.
Second: folding lambda * x into the gradient *before* the sign operation --
the coupled-l2 mistake -- corrupts the update direction of sign methods;
the run.coupled_wd_demo flag reproduces that failure with Signum.
"""

from optlab import run

BASE = {
    "problem.kind": "mlp",
    "problem.in_dim": 8,
    "problem.hidden": 16,
    "problem.classes": 3,
    "problem.samples": 512,
    "problem.batch_size": 32,
    "schedule.family": "cosine",
    "schedule.warmup_steps": 100,
    "run.seed": 7,
    "run.clip": 0.5,
}

# --- norm ordering under decoupled decay ----------------------------------
print("AdamW, 2000 steps, lr 3e-3: final parameter norm by weight decay")
for lam in (0.0, 0.1, 0.5):
    record = run({**BASE, "optimizer.name": "adamw", "optimizer.lr": 0.003,
                  "optimizer.weight_decay": lam, "run.steps": 2000})
    print(f"  lambda={lam:<4} ||params|| = {record.rows[-1].param_norm:7.4f}   full loss = {record.final_loss:.5f}")

# --- coupled vs decoupled decay for Signum ---------------------------------
print("\nSignum, 800 steps, lr 3e-3, lambda 0.5: decay placement matters")
for coupled in (False, True):
    record = run({**BASE, "optimizer.name": "signum", "optimizer.lr": 0.003,
                  "optimizer.weight_decay": 0.5, "run.steps": 800,
                  "run.coupled_wd_demo": coupled})
    kind = "coupled (inside the sign)" if coupled else "decoupled"
    print(f"  {kind:26} final loss = {record.final_loss:.6f}")
