"""Single-step behavior of each update rule against hand-worked values."""

import math

import numpy as np
import pytest

import optlab.optimizers as opts
from optlab.blocks import CommonHyper, ParamBlock
from optlab.errors import ContractViolationError, PoisonedStateError
from optlab.schedules import EmaScheduleSpec

H = CommonHyper(0.1, 0.0)


def scalar_block(x0=0.0):
    return ParamBlock("x", np.array([x0]))


class TestAdamW:
    def test_zero_gradient_no_motion(self):
        block = scalar_block(1.5)
        state = opts.AdamLikeState.zeros(1)
        opts.adamw_step(block, np.zeros(1), state, H)
        assert block.values[0] == 1.5

    def test_first_step_is_signed_lr(self):
        # bias correction makes step 1 ~ -gamma * sign(g)
        block = scalar_block(0.0)
        state = opts.AdamLikeState.zeros(1)
        opts.adamw_step(block, np.array([2.0]), state, CommonHyper(0.1, 0.0, 1e-8))
        assert block.values[0] == pytest.approx(-0.1, abs=1e-8)

    def test_nonfinite_gradient_poisons(self):
        block = scalar_block()
        state = opts.AdamLikeState.zeros(1)
        with pytest.raises(PoisonedStateError):
            opts.adamw_step(block, np.array([np.nan]), state, H)

    def test_beta_validation(self):
        block = scalar_block()
        state = opts.AdamLikeState.zeros(1)
        with pytest.raises(ContractViolationError):
            opts.adamw_step(block, np.ones(1), state, H, beta1=1.0)


class TestAdopt:
    def test_init_consumes_then_first_move(self):
        block = scalar_block(0.0)
        state = opts.AdoptState.zeros(1)
        opts.adopt_init(state, np.array([1.0]))
        assert block.values[0] == 0.0
        opts.adopt_step(block, np.array([1.0]), state, CommonHyper(0.1, 0.0, 1e-6))
        assert state.m[0] == pytest.approx(0.1, abs=1e-15)
        assert block.values[0] == pytest.approx(-0.01, abs=1e-15)

    def test_clamp_bound_at_t16(self):
        # t^(1/4) = 2 at t = 16, so a ratio of 5 clamps to 2
        block = scalar_block(0.0)
        state = opts.AdoptState(m=np.zeros(1), v=np.ones(1), t=15, v_ready=True)
        opts.adopt_step(block, np.array([5.0]), state, CommonHyper(0.1, 0.0, 1e-6), beta1=0.5)
        assert state.m[0] == pytest.approx(1.0, abs=1e-15)  # 0.5 * clamp(5, 2)

    def test_step_before_init_rejected(self):
        state = opts.AdoptState.zeros(1)
        with pytest.raises(ContractViolationError):
            opts.adopt_step(scalar_block(), np.ones(1), state, H)


class TestAdemamix:
    def test_early_steps_close_to_adamw(self):
        ema = EmaScheduleSpec(alpha=8.0, beta3=0.9999, beta_start=0.9, t_alpha=10**6, t_beta3=10**6)
        g = np.array([0.7, -1.2, 0.1])
        b1 = ParamBlock("a", np.zeros(3))
        b2 = ParamBlock("b", np.zeros(3))
        s1 = opts.AdemamixState.zeros(3)
        s2 = opts.AdamLikeState.zeros(3)
        opts.ademamix_step(b1, g, s1, H, ema)
        opts.adamw_step(b2, g, s2, H)
        assert np.max(np.abs(b1.values - b2.values)) < 1e-4 * 0.1

    def test_zero_gradient_stream(self):
        ema = EmaScheduleSpec(alpha=8.0, beta3=0.9999, beta_start=0.9, t_alpha=100, t_beta3=100)
        block = ParamBlock("a", np.array([2.0, -1.0]))
        state = opts.AdemamixState.zeros(2)
        for _ in range(5):
            opts.ademamix_step(block, np.zeros(2), state, H, ema)
        assert np.array_equal(block.values, np.array([2.0, -1.0]))
        assert np.all(state.m_slow == 0.0)


class TestLion:
    def test_hand_example(self):
        block = scalar_block(0.0)
        state = opts.SignState.zeros(1)
        opts.lion_step(block, np.array([1.5]), state, H, beta1=0.9, beta2=0.99)
        assert block.values[0] == -0.1
        assert state.m[0] == pytest.approx(0.015, abs=1e-15)

    def test_sign_zero_convention(self):
        block = scalar_block(3.0)
        state = opts.SignState.zeros(1)
        opts.lion_step(block, np.zeros(1), state, H)
        assert block.values[0] == 3.0

    def test_large_beta1_accepted(self):
        block = scalar_block()
        opts.lion_step(block, np.ones(1), opts.SignState.zeros(1), H, beta1=0.99)


class TestSignum:
    def test_hand_example(self):
        block = scalar_block(0.0)
        state = opts.SignState.zeros(1)
        opts.signum_step(block, np.array([-3.0]), state, H, beta=0.95)
        assert state.m[0] == -3.0
        assert block.values[0] == pytest.approx(0.1, abs=1e-18)

    def test_dampening_recovers_ema_momentum(self):
        # tau = beta turns the buffer into m <- beta m + (1 - beta) g
        beta = 0.9
        state = opts.SignState.zeros(2)
        block = ParamBlock("x", np.zeros(2))
        grads = [np.array([1.0, -2.0]), np.array([0.5, 0.5]), np.array([-1.0, 3.0])]
        ema = np.zeros(2)
        for g in grads:
            opts.signum_step(block, g, state, H, beta=beta, nesterov=False, dampening=beta)
            ema = beta * ema + (1 - beta) * g
            assert np.allclose(state.m, ema, atol=1e-15)

    def test_nesterov_requires_zero_dampening(self):
        with pytest.raises(ContractViolationError):
            opts.signum_step(scalar_block(), np.ones(1), opts.SignState.zeros(1), H, beta=0.9, nesterov=True, dampening=0.5)


class TestNewtonSchulz:
    def test_identity_one_step_closed_form(self):
        a, b, c = opts.NS_COEFFS
        expected = (a + b / 2.0 + c / 4.0) / math.sqrt(2.0)
        out = opts.newton_schulz_orthogonalize(np.eye(2), iters=1)
        assert np.allclose(out, expected * np.eye(2), atol=1e-12)
        assert expected == pytest.approx(1.10653, abs=1e-4)

    def test_orthogonal_input_stays_a_multiple(self):
        from optlab.linalg import qr_orthonormal

        q = qr_orthonormal(np.random.default_rng(0).standard_normal((6, 6)))
        out = opts.newton_schulz_orthogonalize(q, iters=5)
        scale = np.trace(q.T @ out) / 6.0
        assert np.max(np.abs(out - scale * q)) < 1e-9

    def test_zero_matrix_rejected(self):
        with pytest.raises(ContractViolationError):
            opts.newton_schulz_orthogonalize(np.zeros((3, 3)))

    def test_tall_input_transposes(self):
        g = np.arange(12.0).reshape(4, 3) + 1.0
        out = opts.newton_schulz_orthogonalize(g, iters=5)
        assert out.shape == (4, 3)


class TestMuonRouting:
    def test_vector_block_matches_adamw(self):
        grads = [np.array([0.3, -0.7, 0.2]) * (i + 1) for i in range(20)]
        b_muon = ParamBlock("b", np.ones(3), role="vector")
        b_adam = ParamBlock("b", np.ones(3), role="vector")
        ms = opts.MuonState.for_block(b_muon)
        asx = opts.AdamLikeState.zeros(3)
        hyper = CommonHyper(1e-3, 0.1)
        for g in grads:
            opts.muon_step(b_muon, g, ms, CommonHyper(0.01, 0.0), adam_hyper=hyper, adam_betas=(0.8, 0.999))
            opts.adamw_step(b_adam, g, asx, hyper, 0.8, 0.999)
        assert np.array_equal(b_muon.values, b_adam.values)

    def test_dmuon_scales_muon_update(self):
        n = 4
        g = np.array(np.arange(n * n), dtype=float).reshape(n, n) / 10.0 + 0.1
        w_m = ParamBlock("w", np.zeros((n, n)), role="matrix")
        w_d = ParamBlock("w", np.zeros((n, n)), role="matrix")
        opts.muon_step(w_m, g, opts.MuonState.for_block(w_m), CommonHyper(1e-2, 0.5))
        opts.dmuon_step(w_d, g, opts.MuonState.for_block(w_d), CommonHyper(1e-2, 0.0))
        assert np.allclose(w_d.values, 0.2 * math.sqrt(n) * w_m.values, atol=1e-15)


class TestSoap:
    def test_vector_block_matches_adamw(self):
        b_soap = ParamBlock("b", np.ones(5), role="vector")
        b_adam = ParamBlock("b", np.ones(5), role="vector")
        state = opts.SoapState.for_block(b_soap)
        astate = opts.AdamLikeState.zeros(5)
        hyper = CommonHyper(1e-3, 0.1)
        for i in range(15):
            g = np.sin(np.arange(5.0) + i)
            opts.soap_step(b_soap, g, state, hyper)
            opts.adamw_step(b_adam, g, astate, hyper)
        assert np.array_equal(b_soap.values, b_adam.values)

    def test_oversized_block_falls_back_to_adamw(self):
        block = ParamBlock("w", np.zeros((4, 3)), role="matrix")
        state = opts.SoapState.for_block(block, max_side=2)
        assert state.adam is not None

    def test_first_gradient_initializes_without_motion(self):
        block = ParamBlock("w", np.ones((3, 3)), role="matrix")
        state = opts.SoapState.for_block(block)
        g = np.arange(9.0).reshape(3, 3) + 1.0
        delta = opts.soap_step(block, g, state, CommonHyper(1e-3, 0.0))
        assert np.all(delta == 0.0) and np.all(block.values == 1.0)
        assert state.q_l is not None and state.t == 0
        # bases are orthonormal after init
        assert np.allclose(state.q_l.T @ state.q_l, np.eye(3), atol=1e-12)


class TestSophia:
    def test_pure_sign_step_when_h_zero(self):
        block = ParamBlock("x", np.zeros(3))
        state = opts.SophiaState.zeros(3)
        g = np.array([0.4, -0.2, 0.9])
        opts.sophia_step(block, g, state, CommonHyper(0.1, 0.0, 1e-15),
                         resampled_grad=np.zeros(3), batch_size=8)
        assert np.allclose(block.values, -0.1 * np.sign(g), atol=1e-18)

    def test_adam_like_regime_when_h_large(self):
        block = ParamBlock("x", np.zeros(1))
        state = opts.SophiaState(m=np.zeros(1), h=np.array([1000.0]), t=1)
        g = np.array([0.5])
        opts.sophia_step(block, g, state, CommonHyper(0.1, 0.0, 1e-15), rho=0.04, estimator_freq=10)
        expected = -0.1 * state.m[0] / (0.04 * 1000.0 + 1e-15)
        assert block.values[0] == pytest.approx(expected, abs=1e-18)

    def test_refresh_requires_estimate(self):
        state = opts.SophiaState.zeros(2)
        with pytest.raises(ContractViolationError):
            opts.sophia_step(ParamBlock("x", np.zeros(2)), np.ones(2), state, H)

    def test_gnb_estimate_nonnegative(self):
        state = opts.SophiaState.zeros(4)
        block = ParamBlock("x", np.zeros(4))
        opts.sophia_step(block, np.ones(4), state, H, resampled_grad=np.array([1.0, -2.0, 0.0, 0.5]),
                         batch_size=16)
        assert np.all(state.h >= 0.0)


class TestScheduleFree:
    def test_first_step_collapse(self):
        blocks = [ParamBlock("x", np.array([1.0, -2.0]))]
        state = opts.ScheduleFreeState.for_blocks(blocks, warmup_steps=0)
        opts.sfadamw_step(blocks, {"x": np.array([0.3, 0.3])}, state, CommonHyper(1e-2, 0.0))
        assert np.array_equal(blocks[0].values, state.z["x"])

    def test_eval_point_interpolates(self):
        blocks = [ParamBlock("x", np.array([1.0]))]
        state = opts.ScheduleFreeState.for_blocks(blocks, warmup_steps=0)
        state.z["x"] = np.array([3.0])
        point = opts.sf_eval_point(blocks, state, beta1=0.9)
        assert point["x"][0] == pytest.approx(0.1 * 3.0 + 0.9 * 1.0)


class TestProdigy:
    def test_first_step_keeps_d(self):
        blocks = [ParamBlock("x", np.array([0.5, -0.5]))]
        state = opts.ProdigyState.for_blocks(blocks)
        _, eff = opts.prodigy_step(blocks, {"x": np.array([1.0, 2.0])}, state, CommonHyper(1.0, 0.0))
        assert state.d == 1e-6
        assert state.r == 0.0
        assert eff > 0.0

    def test_d_never_decreases(self):
        blocks = [ParamBlock("x", np.zeros(3))]
        state = opts.ProdigyState.for_blocks(blocks)
        rng = np.random.default_rng(1)
        last = state.d
        for _ in range(100):
            opts.prodigy_step(blocks, {"x": rng.standard_normal(3)}, state, CommonHyper(1.0, 0.0))
            assert state.d >= last
            last = state.d


class TestMars:
    def test_correction_vanishes_when_gradient_repeats(self):
        g = np.arange(6.0).reshape(2, 3) / 10.0
        block_a = ParamBlock("w", np.zeros((2, 3)), role="matrix")
        block_b = ParamBlock("w", np.zeros((2, 3)), role="matrix")
        state_a = opts.MarsState.for_block(block_a)
        state_b = opts.MarsState.for_block(block_b)
        state_a.g_prev = g.copy()  # c = g when g == g_prev
        opts.mars_step(block_a, g, state_a, H, "adamw", eta=0.025)
        opts.mars_step(block_b, g, state_b, H, "adamw", eta=0.0)  # eta = 0 kills the correction
        assert np.array_equal(block_a.values, block_b.values)

    def test_clip_to_unit_norm(self):
        g = np.zeros((2, 2))
        g[0, 0] = 2.0  # ||c|| = 2 with eta = 0
        block = ParamBlock("w", np.zeros((2, 2)), role="matrix")
        state = opts.MarsState.for_block(block)
        opts.mars_step(block, g, state, H, "adamw", beta1=0.95, beta2=0.99, eta=0.0)
        assert state.m[0, 0] == pytest.approx(0.05 * 1.0, abs=1e-15)

    def test_shampoo_variant_skips_clip(self):
        g = np.zeros((2, 2))
        g[0, 0] = 2.0
        block = ParamBlock("w", np.zeros((2, 2)), role="matrix")
        state = opts.MarsState.for_block(block)
        opts.mars_step(block, g, state, H, "shampoo", beta1=0.95, eta=0.0)
        assert state.m[0, 0] == pytest.approx(0.05 * 2.0, abs=1e-15)

    def test_vector_blocks_route_to_adamw(self):
        b_mars = ParamBlock("b", np.ones(4), role="vector")
        b_adam = ParamBlock("b", np.ones(4), role="vector")
        state = opts.MarsState.for_block(b_mars)
        astate = opts.AdamLikeState.zeros(4)
        hyper = CommonHyper(1e-3, 0.1)
        for i in range(10):
            g = np.cos(np.arange(4.0) * (i + 1))
            opts.mars_step(b_mars, g, state, CommonHyper(3e-3, 0.1), adam_hyper=hyper, adam_betas=(0.8, 0.999))
            opts.adamw_step(b_adam, g, astate, hyper, 0.8, 0.999)
        assert np.array_equal(b_mars.values, b_adam.values)

    def test_unknown_variant_rejected(self):
        block = ParamBlock("w", np.zeros((2, 2)), role="matrix")
        with pytest.raises(ContractViolationError):
            opts.mars_step(block, np.ones((2, 2)), opts.MarsState.for_block(block), H, "sgd")
