"""Learning-rate-free Adam: the step size d is inferred online.

Two EMA sequences track the correlation between gradients and the distance
travelled from the start (r) and the accumulated weighted gradients (s); the
multiplier grows as d <- max(d, r / ||s||_1) and never decreases. The
effective learning rate of a step is gamma_t * d_t, which is what gets
logged. d, r, and t are scalars over the whole parameter vector, so this
rule operates on the block group as a unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..blocks import CommonHyper, ParamBlock
from .base import check_beta, check_finite_buffers, check_finite_grad, check_finite_values

D_INIT = 1e-6


@dataclass
class ProdigyState:
    d: float
    r: float
    s: dict[str, np.ndarray]
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    x0: dict[str, np.ndarray]  # snapshot of the initial parameters
    t: int = 0
    bias_correction: bool = True

    @classmethod
    def for_blocks(cls, blocks: list[ParamBlock], d0: float = D_INIT, bias_correction: bool = True) -> "ProdigyState":
        return cls(
            d=d0,
            r=0.0,
            s={b.name: np.zeros(b.shape) for b in blocks},
            m={b.name: np.zeros(b.shape) for b in blocks},
            v={b.name: np.zeros(b.shape) for b in blocks},
            x0={b.name: b.values.copy() for b in blocks},
            bias_correction=bias_correction,
        )


def prodigy_step(
    blocks: list[ParamBlock],
    grads: dict[str, np.ndarray],
    state: ProdigyState,
    hyper: CommonHyper,
    beta1: float = 0.9,
    beta2: float = 0.999,
) -> tuple[dict[str, np.ndarray], float]:
    """One update over all blocks; returns (deltas, effective learning rate)."""
    check_beta("beta1", beta1)
    check_beta("beta2", beta2)
    state.t += 1
    t = state.t
    d = state.d
    if state.bias_correction:
        gamma_t = hyper.gamma * math.sqrt(1.0 - beta2**t) / (1.0 - beta1**t)
    else:
        gamma_t = hyper.gamma
    sqb2 = math.sqrt(beta2)
    dot = 0.0
    for block in blocks:
        g = grads[block.name]
        check_finite_grad(g)
        dot += float(np.sum(g * (state.x0[block.name] - block.values)))
        state.m[block.name] = beta1 * state.m[block.name] + (1.0 - beta1) * d * g
        state.v[block.name] = beta2 * state.v[block.name] + (1.0 - beta2) * d * d * g * g
    state.r = sqb2 * state.r + (1.0 - sqb2) * gamma_t * d * d * dot
    s_norm1 = 0.0
    for block in blocks:
        g = grads[block.name]
        state.s[block.name] = sqb2 * state.s[block.name] + (1.0 - sqb2) * gamma_t * d * d * g
        s_norm1 += float(np.sum(np.abs(state.s[block.name])))
    # ||s||_1 == 0 implies r == 0 as well; d then simply stays put
    d_next = max(d, state.r / s_norm1) if s_norm1 > 0.0 else d
    deltas: dict[str, np.ndarray] = {}
    for block in blocks:
        num = state.m[block.name] / (np.sqrt(state.v[block.name]) + d * hyper.eps)
        delta = -gamma_t * d * (num + hyper.lam * block.values)
        block.values += delta
        deltas[block.name] = delta
        check_finite_buffers("prodigy", state.m[block.name], state.v[block.name], state.s[block.name])
        check_finite_values(block)
    state.d = d_next
    return deltas, gamma_t * d
