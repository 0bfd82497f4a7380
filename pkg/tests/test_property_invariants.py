"""Property tests over randomized inputs for the core invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import optlab.optimizers as opts
from optlab.blocks import CommonHyper, ParamBlock
from optlab.harness import clip_gradients

finite_floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=80, deadline=None)
@given(
    values=st.lists(st.lists(finite_floats, min_size=1, max_size=6), min_size=1, max_size=4),
    threshold=st.floats(1e-6, 10.0),
)
def test_clip_never_exceeds_threshold_and_keeps_direction(values, threshold):
    grads = {f"g{i}": np.array(v) for i, v in enumerate(values)}
    clipped, pre_norm = clip_gradients(dict(grads), threshold)
    post_norm = math.sqrt(sum(float(np.sum(g**2)) for g in clipped.values()))
    assert post_norm <= threshold * (1 + 1e-12)
    if pre_norm <= threshold:
        for name in grads:
            assert np.array_equal(clipped[name], grads[name])
    elif pre_norm > 0:
        dot = sum(float(np.sum(clipped[n] * grads[n])) for n in grads)
        assert abs(dot / (post_norm * pre_norm) - 1.0) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), steps=st.integers(2, 40))
def test_prodigy_d_monotone_on_any_stream(seed, steps):
    rng = np.random.default_rng(seed)
    blocks = [ParamBlock("x", rng.standard_normal(5))]
    state = opts.ProdigyState.for_blocks(blocks)
    last = state.d
    for _ in range(steps):
        g = rng.standard_normal(5) * 10.0 ** rng.integers(-3, 3)
        opts.prodigy_step(blocks, {"x": g}, state, CommonHyper(1.0, 0.0))
        assert state.d >= last
        last = state.d


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), scale=st.floats(1e-3, 1e3))
def test_sign_trajectories_invariant_under_any_positive_scale(seed, scale):
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(4)
    grads = [rng.standard_normal(4) for _ in range(25)]
    finals = []
    for c in (1.0, scale):
        block = ParamBlock("x", x0.copy())
        state = opts.SignState.zeros(4)
        for g in grads:
            opts.signum_step(block, c * g, state, CommonHyper(1e-3, 0.0), 0.95)
        finals.append(block.values.copy())
    assert np.array_equal(finals[0], finals[1])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), steps=st.integers(1, 30))
def test_sf_averaging_weights_always_convex(seed, steps):
    rng = np.random.default_rng(seed)
    blocks = [ParamBlock("x", rng.standard_normal(3))]
    state = opts.ScheduleFreeState.for_blocks(blocks, warmup_steps=int(rng.integers(0, 10)))
    cs = []
    for _ in range(steps):
        before = state.lr_sq_sum
        opts.sfadamw_step(blocks, {"x": rng.standard_normal(3)}, state, CommonHyper(1e-2, 0.0))
        cs.append((state.lr_sq_sum - before) / state.lr_sq_sum)
    weights = []
    for t in range(len(cs)):
        w = cs[t]
        for u in range(t + 1, len(cs)):
            w *= 1.0 - cs[u]
        weights.append(w)
    assert all(w >= -1e-15 for w in weights)
    assert abs(sum(weights) - 1.0) <= 1e-9
