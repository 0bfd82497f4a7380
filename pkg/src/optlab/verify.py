"""Named invariant checks: the dual-route oracle suite behind ``optlab verify``.

Every check pits the production code against an independent path -- the
plain-loop references in :mod:`optlab._reference`, closed forms, or property
assertions -- and returns a named pass/fail result. The CLI prints one line
per check; the acceptance tests reuse the same functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _reference as ref
from . import optimizers as opts
from .blocks import CommonHyper, ParamBlock
from .linalg import frobenius_norm, matmul, qr_orthonormal, svd_singular_values, sym_eigenbasis
from .optimizers.engine import AdamW, Lion, Muon, Signum, Soap
from .problems import build_problem, finite_difference_gradient
from .rng import Rng
from .schedules import EmaScheduleSpec, ScheduleSpec, ademamix_alpha_at, ademamix_beta3_at, lr_at

ORACLE_STEPS = 200
ORACLE_TOL = 1e-12

#: Singular-value band of the 5-iteration Newton-Schulz output on random
#: 64x64 matrices, measured once with the SVD oracle and frozen (see
#: demos/newton_schulz_spectrum.py for the measurement script). Measured
#: extremes over the 50 frozen seeds: [0.00832, 1.20231].
NS_BAND = (0.0075, 1.21)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _ok(name, detail=""):
    return CheckResult(name, True, detail)


def _fail(name, detail):
    return CheckResult(name, False, detail)


def _grads(key: str, steps: int, n: int) -> list[np.ndarray]:
    r = Rng(2024, key)
    return [r.normal(n) for _ in range(steps)]


def _mat_grads(key: str, steps: int, rows: int, cols: int) -> list[np.ndarray]:
    r = Rng(2024, key)
    return [r.normal_matrix(rows, cols) for _ in range(steps)]


def _lrs(steps: int, peak: float) -> list[float]:
    return [peak * (0.55 + 0.45 * math.cos(math.pi * (t - 1) / steps)) for t in range(1, steps + 1)]


def _to_list(a: np.ndarray):
    return a.tolist()


def _max_dev(name: str, devs: list[float]) -> CheckResult:
    worst = max(devs) if devs else 0.0
    if worst <= ORACLE_TOL:
        return _ok(name, f"max |dx| = {worst:.3e} over {ORACLE_STEPS} steps")
    return _fail(name, f"max |dx| = {worst:.3e} exceeds {ORACLE_TOL}")


# ---------------------------------------------------------------------------
# scalar-oracle equivalence, one check per update rule


def check_oracle_adamw() -> CheckResult:
    n, lam = 7, 0.1
    grads = _grads("oracle/adamw", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, 2e-3)
    block = ParamBlock("x", Rng(2024, "oracle/adamw/x0").normal(n))
    state = opts.AdamLikeState.zeros(n)
    r = ref.RefAdamW(lam=lam, beta1=0.9, beta2=0.999, eps=1e-8)
    x_ref = _to_list(block.values)
    devs = []
    for g, lr in zip(grads, lrs):
        opts.adamw_step(block, g, state, CommonHyper(lr, lam), 0.9, 0.999)
        x_ref = r.step(x_ref, _to_list(g), lr)
        devs.append(float(np.max(np.abs(block.values - np.array(x_ref)))))
    return _max_dev("scalar-oracle/adamw", devs)


def check_oracle_adopt() -> CheckResult:
    n, lam = 7, 0.1
    grads = _grads("oracle/adopt", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, 2e-3)
    block = ParamBlock("x", Rng(2024, "oracle/adopt/x0").normal(n))
    state = opts.AdoptState.zeros(n)
    r = ref.RefAdopt(lam=lam, beta1=0.9, beta2=0.999, eps=1e-6)
    x_ref = _to_list(block.values)
    devs = []
    for i, (g, lr) in enumerate(zip(grads, lrs)):
        if i == 0:
            opts.adopt_init(state, g)
        else:
            opts.adopt_step(block, g, state, CommonHyper(lr, lam, 1e-6), 0.9, 0.999)
        x_ref = r.step(x_ref, _to_list(g), lr)
        devs.append(float(np.max(np.abs(block.values - np.array(x_ref)))))
    return _max_dev("scalar-oracle/adopt", devs)


def check_oracle_ademamix() -> CheckResult:
    n, lam = 7, 0.1
    grads = _grads("oracle/ademamix", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, 2e-3)
    block = ParamBlock("x", Rng(2024, "oracle/ademamix/x0").normal(n))
    state = opts.AdemamixState.zeros(n)
    ema = EmaScheduleSpec(alpha=8.0, beta3=0.9999, beta_start=0.9, t_alpha=ORACLE_STEPS, t_beta3=ORACLE_STEPS)
    r = ref.RefAdemamix(
        lam=lam, beta1=0.9, beta2=0.999, beta3=0.9999, alpha=8.0,
        beta_start=0.9, t_alpha=ORACLE_STEPS, t_beta3=ORACLE_STEPS, eps=1e-8,
    )
    x_ref = _to_list(block.values)
    devs = []
    for g, lr in zip(grads, lrs):
        opts.ademamix_step(block, g, state, CommonHyper(lr, lam), ema, 0.9, 0.999)
        x_ref = r.step(x_ref, _to_list(g), lr)
        devs.append(float(np.max(np.abs(block.values - np.array(x_ref)))))
    return _max_dev("scalar-oracle/ademamix", devs)


def check_oracle_lion() -> CheckResult:
    n, lam = 7, 0.1
    grads = _grads("oracle/lion", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, 1e-3)
    block = ParamBlock("x", Rng(2024, "oracle/lion/x0").normal(n))
    state = opts.SignState.zeros(n)
    r = ref.RefLion(lam=lam, beta1=0.9, beta2=0.99)
    x_ref = _to_list(block.values)
    devs = []
    for g, lr in zip(grads, lrs):
        opts.lion_step(block, g, state, CommonHyper(lr, lam), 0.9, 0.99)
        x_ref = r.step(x_ref, _to_list(g), lr)
        devs.append(float(np.max(np.abs(block.values - np.array(x_ref)))))
    return _max_dev("scalar-oracle/lion", devs)


def check_oracle_signum() -> CheckResult:
    n, lam = 7, 0.1
    grads = _grads("oracle/signum", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, 1e-3)
    block = ParamBlock("x", Rng(2024, "oracle/signum/x0").normal(n))
    state = opts.SignState.zeros(n)
    r = ref.RefSignum(lam=lam, beta=0.95, nesterov=True)
    x_ref = _to_list(block.values)
    devs = []
    for g, lr in zip(grads, lrs):
        opts.signum_step(block, g, state, CommonHyper(lr, lam), 0.95, True)
        x_ref = r.step(x_ref, _to_list(g), lr)
        devs.append(float(np.max(np.abs(block.values - np.array(x_ref)))))
    return _max_dev("scalar-oracle/signum", devs)


def check_oracle_sophia() -> CheckResult:
    n, lam, batch = 7, 0.1, 8
    grads = _grads("oracle/sophia", ORACLE_STEPS, n)
    hess = _grads("oracle/sophia/hess", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, 1e-3)
    block = ParamBlock("x", Rng(2024, "oracle/sophia/x0").normal(n))
    state = opts.SophiaState.zeros(n)
    r = ref.RefSophia(lam=lam, beta1=0.9, beta2=0.999, rho=0.04, estimator_freq=10, eps=1e-15)
    x_ref = _to_list(block.values)
    devs = []
    for t, (g, hg, lr) in enumerate(zip(grads, hess, lrs), start=1):
        refresh = opts.sophia_wants_estimate(t, 10)
        opts.sophia_step(
            block, g, state, CommonHyper(lr, lam, 1e-15), 0.9, 0.999, 0.04, 10,
            hg if refresh else None, batch if refresh else None,
        )
        x_ref = r.step(x_ref, _to_list(g), lr, _to_list(hg), batch)
        devs.append(float(np.max(np.abs(block.values - np.array(x_ref)))))
    return _max_dev("scalar-oracle/sophia", devs)


def check_oracle_sfadamw() -> CheckResult:
    n, lam = 7, 0.1
    grads = _grads("oracle/sfadamw", ORACLE_STEPS, n)
    x0 = Rng(2024, "oracle/sfadamw/x0").normal(n)
    blocks = [ParamBlock("x", x0.copy())]
    state = opts.ScheduleFreeState.for_blocks(blocks, warmup_steps=20)
    r = ref.RefScheduleFree(_to_list(x0), lam=lam, beta1=0.9, beta2=0.9999, warmup=20, eps=1e-8)
    devs = []
    for g in grads:
        opts.sfadamw_step(blocks, {"x": g}, state, CommonHyper(1e-3, lam), 0.9, 0.9999)
        x_ref = r.step(_to_list(g), 1e-3)
        devs.append(float(np.max(np.abs(blocks[0].values - np.array(x_ref)))))
    return _max_dev("scalar-oracle/sf-adamw", devs)


def check_oracle_prodigy() -> CheckResult:
    n, lam = 7, 0.1
    grads = _grads("oracle/prodigy", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, 1.0)
    x0 = Rng(2024, "oracle/prodigy/x0").normal(n)
    blocks = [ParamBlock("x", x0.copy())]
    state = opts.ProdigyState.for_blocks(blocks)
    r = ref.RefProdigy(_to_list(x0), lam=lam, beta1=0.9, beta2=0.999, bias_correction=True)
    devs = []
    for g, lr in zip(grads, lrs):
        opts.prodigy_step(blocks, {"x": g}, state, CommonHyper(lr, lam), 0.9, 0.999)
        x_ref = r.step(_to_list(g), lr)
        devs.append(float(np.max(np.abs(blocks[0].values - np.array(x_ref)))))
        if abs(state.d - r.d) > ORACLE_TOL:
            return _fail("scalar-oracle/prodigy", f"d mismatch: {state.d} vs {r.d}")
    return _max_dev("scalar-oracle/prodigy", devs)


def _hybrid_oracle(name: str, prod_matrix_step, ref_matrix, rows=3, cols=4, peak=5e-3, lam=0.1):
    """Drive a matrix block and a routed 7-vector block against references."""
    n = 7
    mgrads = _mat_grads(f"oracle/{name}/m", ORACLE_STEPS, rows, cols)
    vgrads = _grads(f"oracle/{name}/v", ORACLE_STEPS, n)
    lrs = _lrs(ORACLE_STEPS, peak)
    mat_block = ParamBlock("w", Rng(2024, f"oracle/{name}/w0").normal_matrix(rows, cols), role="matrix")
    vec_block = ParamBlock("b", Rng(2024, f"oracle/{name}/b0").normal(n), role="vector")
    adam_state = opts.AdamLikeState.zeros(n)
    ref_adam = ref.RefAdamW(lam=lam, beta1=0.8, beta2=0.999, eps=1e-8)
    w_ref = _to_list(mat_block.values)
    b_ref = _to_list(vec_block.values)
    devs = []
    for t, (gm, gv, lr) in enumerate(zip(mgrads, vgrads, lrs), start=1):
        prod_matrix_step(mat_block, gm, lr)
        adam_lr = 0.5 * lr
        opts.adamw_step(vec_block, gv, adam_state, CommonHyper(adam_lr, lam), 0.8, 0.999)
        w_ref = ref_matrix.step(w_ref, [list(row) for row in gm.tolist()], lr)
        b_ref = ref_adam.step(b_ref, _to_list(gv), adam_lr)
        devs.append(float(np.max(np.abs(mat_block.values - np.array(w_ref)))))
        devs.append(float(np.max(np.abs(vec_block.values - np.array(b_ref)))))
    return _max_dev(f"scalar-oracle/{name}", devs)


def check_oracle_muon() -> CheckResult:
    state = {}

    def prod(block, g, lr):
        if "s" not in state:
            state["s"] = opts.MuonState.for_block(block)
        opts.muon_step(block, g, state["s"], CommonHyper(lr, 0.1), 0.95)

    return _hybrid_oracle("muon", prod, ref.RefMuonMatrix(beta=0.95))


def check_oracle_dmuon() -> CheckResult:
    state = {}

    def prod(block, g, lr):
        if "s" not in state:
            state["s"] = opts.MuonState.for_block(block)
        opts.dmuon_step(block, g, state["s"], CommonHyper(lr, 0.1), 0.95)

    return _hybrid_oracle("dmuon", prod, ref.RefDMuonMatrix(lam=0.1, beta=0.95))


def check_oracle_soap() -> CheckResult:
    state = {}

    def prod(block, g, lr):
        if "s" not in state:
            state["s"] = opts.SoapState.for_block(block, precond_freq=10)
        opts.soap_step(block, g, state["s"], CommonHyper(lr, 0.1), 0.9, 0.999)

    # square block: the Gram matrices stay full-rank for the QR refreshes
    return _hybrid_oracle("soap", prod, ref.RefSoapMatrix(lam=0.1, precond_freq=10), rows=3, cols=3, peak=2e-3)


def _check_oracle_mars(variant: str) -> CheckResult:
    state = {}

    def prod(block, g, lr):
        if "s" not in state:
            state["s"] = opts.MarsState.for_block(block)
        opts.mars_step(block, g, state["s"], CommonHyper(lr, 0.1), variant, 0.95, 0.99, 0.025)

    return _hybrid_oracle(f"mars-{variant}", prod, ref.RefMarsMatrix(variant=variant, lam=0.1))


def check_oracle_mars_adamw() -> CheckResult:
    return _check_oracle_mars("adamw")


def check_oracle_mars_lion() -> CheckResult:
    return _check_oracle_mars("lion")


def check_oracle_mars_shampoo() -> CheckResult:
    return _check_oracle_mars("shampoo")


# ---------------------------------------------------------------------------
# kernel and schedule invariants


def check_matmul_vs_loops() -> CheckResult:
    r = Rng(11, "matmul")
    a = r.normal_matrix(5, 3)
    b = r.normal_matrix(3, 4)
    prod = matmul(a, b)
    loops = np.array(ref.mat_mul([list(row) for row in a.tolist()], [list(row) for row in b.tolist()]))
    worst = float(np.max(np.abs(prod - loops)))
    rel = worst / max(float(np.max(np.abs(loops))), 1e-300)
    if rel <= 1e-15:
        return _ok("linalg/matmul", f"max rel dev vs triple loop = {rel:.2e}")
    return _fail("linalg/matmul", f"max rel dev vs triple loop = {rel:.2e}")


def check_qr_properties() -> CheckResult:
    if not np.array_equal(qr_orthonormal(np.eye(3)), np.eye(3)):
        return _fail("linalg/qr", "identity not preserved")
    if not np.allclose(qr_orthonormal(np.diag([2.0, 3.0])), np.eye(2), atol=1e-15):
        return _fail("linalg/qr", "positive diagonal scaling should give I")
    a = Rng(12, "qr").normal_matrix(4, 4)
    q = qr_orthonormal(a)
    orth = frobenius_norm(q.T @ q - np.eye(4))
    r_mat = q.T @ a
    recon = frobenius_norm(q @ r_mat - a)
    if orth > 1e-12:
        return _fail("linalg/qr", f"||Q^T Q - I|| = {orth:.2e}")
    if recon > 1e-10:
        return _fail("linalg/qr", f"reconstruction error {recon:.2e}")
    return _ok("linalg/qr", f"orthonormality {orth:.2e}, reconstruction {recon:.2e}")


def check_eigen_properties() -> CheckResult:
    if not np.array_equal(sym_eigenbasis(np.eye(2)), np.eye(2)):
        return _fail("linalg/eigen", "identity basis not I under tie-breaking")
    v = sym_eigenbasis(np.diag([1.0, 9.0]))
    if not np.allclose(v, np.array([[0.0, 1.0], [1.0, 0.0]]), atol=1e-15):
        return _fail("linalg/eigen", "descending order violated for diag(1, 9)")
    a = Rng(13, "eig").normal_matrix(5, 5)
    a = (a + a.T) / 2.0
    basis = sym_eigenbasis(a)
    vals = np.einsum("ij,ij->j", basis, a @ basis)
    resid = frobenius_norm(a @ basis - basis * vals)
    recon = frobenius_norm(a - (basis * vals) @ basis.T) / max(frobenius_norm(a), 1e-300)
    if resid > 1e-9 or recon > 1e-9:
        return _fail("linalg/eigen", f"residual {resid:.2e}, reconstruction {recon:.2e}")
    return _ok("linalg/eigen", f"residual {resid:.2e}, reconstruction {recon:.2e}")


def check_svd_values() -> CheckResult:
    if not np.allclose(svd_singular_values(np.eye(3)), np.ones(3), atol=1e-12):
        return _fail("linalg/svd", "identity should give unit singular values")
    if not np.allclose(svd_singular_values(np.diag([2.0, 0.5])), [2.0, 0.5], atol=1e-12):
        return _fail("linalg/svd", "diag(2, 0.5) mismatch")
    a = Rng(14, "svd").normal_matrix(3, 3)
    mine = svd_singular_values(a)
    lapack = np.linalg.svd(a, compute_uv=False)
    worst = float(np.max(np.abs(mine - lapack)))
    if worst > 1e-9:
        return _fail("linalg/svd", f"deviation vs LAPACK svd = {worst:.2e}")
    return _ok("linalg/svd", f"deviation vs LAPACK svd = {worst:.2e}")


def check_rng_streams() -> CheckResult:
    a = Rng(42, "stream")
    b = Rng(42, "stream")
    if [a.next_u64() for _ in range(64)] != [b.next_u64() for _ in range(64)]:
        return _fail("rng/streams", "same (seed, key) produced different integers")
    if np.array_equal(Rng(42, "s1").normal(16), Rng(42, "s2").normal(16)):
        return _fail("rng/streams", "distinct keys produced identical draws")
    draws = Rng(7, "moments").normal(100_000)
    mean = float(np.mean(draws))
    var = float(np.var(draws))
    if not (-0.02 <= mean <= 0.02 and 0.97 <= var <= 1.03):
        return _fail("rng/streams", f"mean {mean:.4f}, var {var:.4f} outside bounds")
    return _ok("rng/streams", f"mean {mean:.4f}, var {var:.4f}")


def check_schedule_endpoints() -> CheckResult:
    t_total, warm = 1000, 100
    cos = ScheduleSpec("cosine", 1.0, t_total, warm)
    if abs(lr_at(cos, warm) - 1.0) > 1e-12:
        return _fail("schedules/endpoints", "cosine lr(T_warmup) != gamma_max")
    if abs(lr_at(cos, t_total) - 0.01) > 1e-12:
        return _fail("schedules/endpoints", f"cosine lr(T) = {lr_at(cos, t_total)} != 0.01 * gamma_max")
    mid = warm + (t_total - warm) // 2
    if abs(lr_at(cos, mid) - (1.0 + 0.01) / 2.0) > 1e-12:
        return _fail("schedules/endpoints", "cosine midpoint != (gamma_max + gamma_end) / 2")
    wsd = ScheduleSpec("wsd", 1.0, t_total, warm)
    cooldown_start = int(0.8 * t_total)
    for t in range(warm, cooldown_start + 1, 50):
        if lr_at(wsd, max(t, warm + 1)) != 1.0:
            return _fail("schedules/endpoints", f"wsd not constant at t={t}")
    if abs(lr_at(wsd, t_total) - 0.01) > 1e-12:
        return _fail("schedules/endpoints", "wsd endpoint != gamma_end")
    ema = EmaScheduleSpec(alpha=8.0, beta3=0.9999, beta_start=0.9, t_alpha=128000, t_beta3=10000)
    if ademamix_beta3_at(ema, 10000) != 0.9999:
        return _fail("schedules/endpoints", "beta3 scheduler misses beta3 at t = t_beta3")
    big = EmaScheduleSpec(alpha=8.0, beta3=0.9999, beta_start=0.9, t_alpha=128000, t_beta3=10**9)
    if abs(ademamix_beta3_at(big, 1) - 0.9) > 1e-6:
        return _fail("schedules/endpoints", "beta3 scheduler misses beta_start near t = 0")
    if ademamix_alpha_at(ema, 16000) != 1.0:
        return _fail("schedules/endpoints", "alpha ramp: alpha=8, t_alpha=128000, t=16000 should give 1.0")
    if ademamix_alpha_at(ema, 128000) != 8.0 or ademamix_alpha_at(ema, 10**7) != 8.0:
        return _fail("schedules/endpoints", "alpha ramp does not saturate at alpha")
    return _ok("schedules/endpoints")


def check_newton_schulz_band() -> CheckResult:
    lo, hi = NS_BAND
    worst_lo, worst_hi = np.inf, -np.inf
    for i in range(50):
        g = Rng(7, f"ns-band/{i}").normal_matrix(64, 64)
        out = opts.newton_schulz_orthogonalize(g, 5)
        sv = svd_singular_values(out)
        worst_lo = min(worst_lo, float(sv.min()))
        worst_hi = max(worst_hi, float(sv.max()))
    if worst_lo < lo or worst_hi > hi:
        return _fail("newton-schulz/band", f"singular values in [{worst_lo:.4f}, {worst_hi:.4f}] leave [{lo}, {hi}]")
    return _ok("newton-schulz/band", f"singular values within [{worst_lo:.4f}, {worst_hi:.4f}]")


def check_newton_schulz_identity() -> CheckResult:
    a, b, c = opts.NS_COEFFS
    expected = (a + b / 2.0 + c / 4.0) / math.sqrt(2.0)
    out = opts.newton_schulz_orthogonalize(np.eye(2), iters=1)
    worst = float(np.max(np.abs(out - expected * np.eye(2))))
    if worst > 1e-12:
        return _fail("newton-schulz/identity", f"one-step identity deviates by {worst:.2e}")
    return _ok("newton-schulz/identity", f"one step on I2 = {expected:.6f} * I2")


def check_soap_identity_reduction() -> CheckResult:
    rows, cols, steps = 3, 4, 100
    grads = _mat_grads("soap-id", steps, rows, cols)
    x0 = Rng(5, "soap-id/x0").normal_matrix(rows, cols)
    soap_block = ParamBlock("w", x0.copy(), role="matrix")
    adam_block = ParamBlock("w", x0.copy(), role="matrix")
    soap_engine = Soap([soap_block], lr=1e-3, weight_decay=0.1, beta1=0.9, beta2=0.999,
                       precond_freq=None, identity_init=True)
    adam_engine = AdamW([adam_block], lr=1e-3, weight_decay=0.1, beta1=0.9, beta2=0.999)
    worst = 0.0
    for g in grads:
        soap_engine.step({"w": g})
        adam_engine.step({"w": g})
        worst = max(worst, float(np.max(np.abs(soap_block.values - adam_block.values))))
    if worst > 1e-12:
        return _fail("soap/identity-reduction", f"max |dx| = {worst:.3e} over {steps} steps")
    return _ok("soap/identity-reduction", f"max |dx| = {worst:.3e} over {steps} steps")


def check_sign_scale_invariance() -> CheckResult:
    steps, n = 150, 7
    base = _grads("sign-scale", steps, n)
    x0 = Rng(6, "sign-scale/x0").normal(n)
    for scale in (0.1, 7.3):
        for engine_cls, kwargs in ((Signum, {"momentum": 0.95}), (Lion, {"beta1": 0.9, "beta2": 0.99})):
            b_ref = ParamBlock("x", x0.copy())
            b_scaled = ParamBlock("x", x0.copy())
            e_ref = engine_cls([b_ref], lr=1e-3, weight_decay=0.0, **kwargs)
            e_scaled = engine_cls([b_scaled], lr=1e-3, weight_decay=0.0, **kwargs)
            for g in base:
                e_ref.step({"x": g})
                e_scaled.step({"x": scale * g})
            if not np.array_equal(b_ref.values, b_scaled.values):
                return _fail(
                    "sign/scale-invariance",
                    f"{engine_cls.name} trajectory changed under gradient scaling by {scale}",
                )
    return _ok("sign/scale-invariance", "signum and lion bit-identical under scaling by 0.1 and 7.3")


def check_prodigy_adaptation() -> CheckResult:
    n = 7
    x0 = Rng(8, "prodigy/x0").normal(n)
    blocks = [ParamBlock("x", x0.copy())]
    state = opts.ProdigyState.for_blocks(blocks)
    g1 = Rng(8, "prodigy/g").normal(n)
    _, eff = opts.prodigy_step(blocks, {"x": g1}, state, CommonHyper(1.0, 0.0), 0.9, 0.999)
    if state.d != 1e-6:
        return _fail("prodigy/adaptation", f"d after step 1 = {state.d}, expected 1e-6")
    if eff <= 0.0:
        return _fail("prodigy/adaptation", "effective lr not populated")
    last_d = state.d
    r = Rng(8, "prodigy/stream")
    for _ in range(300):
        g = r.normal(n)
        opts.prodigy_step(blocks, {"x": g}, state, CommonHyper(1.0, 0.0), 0.9, 0.999)
        if state.d < last_d:
            return _fail("prodigy/adaptation", "d decreased")
        last_d = state.d
    if state.d <= 1e-6:
        return _fail("prodigy/adaptation", "d never grew over 300 steps")
    return _ok("prodigy/adaptation", f"d grew monotonically to {state.d:.3e}")


def check_sf_convex_combination() -> CheckResult:
    n, steps = 5, 5
    x0 = Rng(9, "sf/x0").normal(n)
    blocks = [ParamBlock("x", x0.copy())]
    state = opts.ScheduleFreeState.for_blocks(blocks, warmup_steps=3)
    zs = []
    cs = []
    grads = _grads("sf/grads", steps, n)
    for t, g in enumerate(grads, start=1):
        before = state.lr_sq_sum
        opts.sfadamw_step(blocks, {"x": g}, state, CommonHyper(1e-2, 0.0), 0.9, 0.9999)
        gamma_sq = state.lr_sq_sum - before
        cs.append(gamma_sq / state.lr_sq_sum)
        zs.append(state.z["x"].copy())
    # expand x_T symbolically: w_t = c_t * prod_{u>t} (1 - c_u)
    weights = []
    for t in range(steps):
        w = cs[t]
        for u in range(t + 1, steps):
            w *= 1.0 - cs[u]
        weights.append(w)
    if any(w < -1e-15 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
        return _fail("sf-adamw/convex-weights", f"weights {weights} are not a convex combination")
    recon = sum(w * z for w, z in zip(weights, zs))
    worst = float(np.max(np.abs(recon - blocks[0].values)))
    if worst > 1e-12:
        return _fail("sf-adamw/convex-weights", f"x differs from weighted z history by {worst:.2e}")
    return _ok("sf-adamw/convex-weights", f"weights sum to 1, reconstruction within {worst:.2e}")


def check_finite_differences() -> CheckResult:
    worst_overall = 0.0
    specs = [
        ("quadratic", {"dim": 20, "condition": 100.0}, 1e-5, 1e-7),
        ("quadratic-noisy", {"dim": 10, "condition": 10.0, "noise": 0.5, "batch_size": 4}, 1e-5, 1e-6),
        ("rosenbrock", {"dim": 6}, 1e-6, 1e-6),
        ("mlp", {"in_dim": 5, "hidden": 7, "classes": 3, "samples": 64, "batch_size": 16}, 1e-5, 1e-6),
    ]
    for label, params, h, tol in specs:
        kind = "quadratic" if label.startswith("quadratic") else label
        problem = build_problem(kind, seed=31, **params)
        for point_idx in range(3):
            blocks = problem.init_blocks(point_idx)
            params_map = {
                b.name: b.values + 0.1 * Rng(31, f"fd/{label}/{point_idx}/{b.name}").normal(b.size).reshape(b.shape)
                for b in blocks
            }
            batch_seed = (31, point_idx + 1)
            _, analytic = problem.loss_and_grad(params_map, batch_seed)
            numeric = finite_difference_gradient(problem, params_map, batch_seed, h)
            for name in analytic:
                scale = max(float(np.max(np.abs(analytic[name]))), 1e-8)
                dev = float(np.max(np.abs(analytic[name] - numeric[name]))) / scale
                worst_overall = max(worst_overall, dev)
                if dev > tol:
                    return _fail(
                        "problems/finite-differences",
                        f"{label}: block {name} rel err {dev:.2e} > {tol} at point {point_idx}",
                    )
    return _ok("problems/finite-differences", f"worst relative error {worst_overall:.2e}")


def check_zero_grad_fixed_points() -> CheckResult:
    n = 6
    x0 = Rng(10, "zero/x0").normal(n)
    zero = np.zeros(n)
    block = ParamBlock("x", x0.copy())
    state = opts.AdamLikeState.zeros(n)
    for _ in range(10):
        opts.adamw_step(block, zero, state, CommonHyper(1e-3, 0.0))
    if not np.array_equal(block.values, x0):
        return _fail("optimizers/zero-grad", "adamw moved under zero gradients")
    block = ParamBlock("x", x0.copy())
    astate = opts.AdoptState.zeros(n)
    opts.adopt_init(astate, zero)
    for _ in range(10):
        opts.adopt_step(block, zero, astate, CommonHyper(1e-3, 0.0, 1e-6))
    if not np.array_equal(block.values, x0):
        return _fail("optimizers/zero-grad", "adopt moved under zero gradients")
    block = ParamBlock("x", x0.copy())
    mstate = opts.AdemamixState.zeros(n)
    ema = EmaScheduleSpec(alpha=8.0, beta3=0.9999, beta_start=0.9, t_alpha=100, t_beta3=100)
    for _ in range(10):
        opts.ademamix_step(block, zero, mstate, CommonHyper(1e-3, 0.0), ema)
    if not np.array_equal(block.values, x0):
        return _fail("optimizers/zero-grad", "ademamix moved under zero gradients")
    if np.any(mstate.m_slow != 0.0):
        return _fail("optimizers/zero-grad", "ademamix slow EMA left zero under zero gradients")
    return _ok("optimizers/zero-grad", "adamw/adopt/ademamix parameters exactly fixed")


def check_muon_wd_independence() -> CheckResult:
    steps = 40
    grads_m = _mat_grads("muon-wd/m", steps, 4, 3)
    grads_v = _grads("muon-wd/v", steps, 5)
    finals = []
    vec_finals = []
    for lam in (0.0, 0.7):
        w = ParamBlock("w", Rng(15, "muon-wd/w0").normal_matrix(4, 3), role="matrix")
        b = ParamBlock("b", Rng(15, "muon-wd/b0").normal(5), role="vector")
        engine = Muon([w, b], lr=0.01, lr_1d=1e-3, weight_decay=lam)
        for gm, gv in zip(grads_m, grads_v):
            engine.step({"w": gm, "b": gv})
        finals.append(w.values.copy())
        vec_finals.append(b.values.copy())
    if not np.array_equal(finals[0], finals[1]):
        return _fail("muon/wd-independence", "matrix parameters changed with lam")
    if np.array_equal(vec_finals[0], vec_finals[1]):
        return _fail("muon/wd-independence", "1-D parameters ignored lam (decay not applied)")
    return _ok("muon/wd-independence", "matrix path independent of lam; adamw path decays")


def check_run_determinism() -> CheckResult:
    from .harness import run

    cfg = {
        "problem.kind": "mlp",
        "problem.in_dim": 4,
        "problem.hidden": 6,
        "problem.classes": 3,
        "problem.samples": 64,
        "problem.batch_size": 8,
        "optimizer.name": "adamw",
        "optimizer.lr": 1e-3,
        "run.steps": 30,
        "run.seed": 3,
        "run.clip": 0.5,
    }
    rec1, rec2 = run(cfg), run(cfg)
    rows1 = [(r.step, r.loss, r.grad_norm, r.update_norm, r.param_norm, r.lr, r.effective_lr, r.d) for r in rec1.rows]
    rows2 = [(r.step, r.loss, r.grad_norm, r.update_norm, r.param_norm, r.lr, r.effective_lr, r.d) for r in rec2.rows]
    if rows1 != rows2 or rec1.final_loss != rec2.final_loss:
        return _fail("harness/determinism", "two runs of the same config differ beyond wall time")
    return _ok("harness/determinism", "trajectories byte-identical apart from wall time")


def check_clip_examples() -> CheckResult:
    from .harness import clip_gradients

    grads, norm = clip_gradients({"a": np.array([0.18, 0.24])}, 0.5)
    if abs(norm - 0.3) > 1e-15 or not np.array_equal(grads["a"], np.array([0.18, 0.24])):
        return _fail("harness/clip", "norm below threshold must pass through unchanged")
    grads, norm = clip_gradients({"a": np.array([3.0, 4.0])}, 0.5)
    if abs(norm - 5.0) > 1e-15:
        return _fail("harness/clip", f"pre-clip norm {norm} != 5")
    clipped = grads["a"]
    if abs(float(np.sqrt(np.sum(clipped**2))) - 0.5) > 1e-12:
        return _fail("harness/clip", "clipped norm != threshold")
    cos = float(clipped @ np.array([3.0, 4.0]) / (np.linalg.norm(clipped) * 5.0))
    if abs(cos - 1.0) > 1e-12:
        return _fail("harness/clip", f"direction not preserved, cos = {cos}")
    return _ok("harness/clip", "3-4-5 clipping exact, direction preserved")


ORACLE_CHECKS = [
    check_oracle_adamw,
    check_oracle_adopt,
    check_oracle_ademamix,
    check_oracle_lion,
    check_oracle_signum,
    check_oracle_muon,
    check_oracle_dmuon,
    check_oracle_soap,
    check_oracle_sophia,
    check_oracle_sfadamw,
    check_oracle_prodigy,
    check_oracle_mars_adamw,
    check_oracle_mars_lion,
    check_oracle_mars_shampoo,
]

ALL_CHECKS = ORACLE_CHECKS + [
    check_matmul_vs_loops,
    check_qr_properties,
    check_eigen_properties,
    check_svd_values,
    check_rng_streams,
    check_schedule_endpoints,
    check_newton_schulz_identity,
    check_newton_schulz_band,
    check_soap_identity_reduction,
    check_sign_scale_invariance,
    check_prodigy_adaptation,
    check_sf_convex_combination,
    check_finite_differences,
    check_zero_grad_fixed_points,
    check_muon_wd_independence,
    check_clip_examples,
    check_run_determinism,
]


def run_all_checks() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]
