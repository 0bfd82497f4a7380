"""Variance-reduced updates: the gradient is corrected by a scaled difference
from the previous step's gradient before feeding the moments.

c_t = g_t + eta * (beta1 / (1 - beta1)) * (g_t - g_{t-1})

The corrected gradient is clipped to unit l2 norm for the adamw and lion
variants (not for shampoo, which orthogonalizes the momentum instead). Matrix
blocks take the variance-reduced path; everything else runs AdamW with its
own learning rate, following the usual hybrid routing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blocks import CommonHyper, ParamBlock
from ..errors import ContractViolationError
from ..linalg import frobenius_norm
from .base import (
    AdamLikeState,
    adamw_step,
    check_beta,
    check_finite_buffers,
    check_finite_grad,
    check_finite_values,
)
from .muon import NS_COEFFS, NS_ITERS, newton_schulz_orthogonalize

VARIANTS = ("adamw", "lion", "shampoo")


@dataclass
class MarsState:
    """Last gradient + inner moments for matrix blocks, AdamW state otherwise."""

    g_prev: np.ndarray | None = None
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    t: int = 0
    adam: AdamLikeState | None = None

    @classmethod
    def for_block(cls, block: ParamBlock) -> "MarsState":
        if block.matrix_routed():
            return cls(
                g_prev=np.zeros(block.shape),
                m=np.zeros(block.shape),
                v=np.zeros(block.shape),
            )
        return cls(adam=AdamLikeState.zeros(block.shape))


def mars_step(
    block: ParamBlock,
    grad: np.ndarray,
    state: MarsState,
    hyper: CommonHyper,
    variant: str = "adamw",
    beta1: float = 0.95,
    beta2: float = 0.99,
    eta: float = 0.025,
    ns_iters: int = NS_ITERS,
    ns_coeffs=NS_COEFFS,
    adam_hyper: CommonHyper | None = None,
    adam_betas: tuple[float, float] = (0.8, 0.999),
) -> np.ndarray:
    """One variance-reduced update on a matrix block (AdamW on 1-D blocks)."""
    if variant not in VARIANTS:
        raise ContractViolationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if not block.matrix_routed():
        return adamw_step(block, grad, state.adam, adam_hyper or hyper, *adam_betas)
    check_finite_grad(grad)
    check_beta("beta1", beta1)
    check_beta("beta2", beta2)
    state.t += 1
    t = state.t
    c = grad + eta * (beta1 / (1.0 - beta1)) * (grad - state.g_prev)
    if variant in ("adamw", "lion"):
        c_norm = float(np.sqrt(np.sum(c * c)))
        if c_norm > 1.0:
            c = c / c_norm
    state.m = beta1 * state.m + (1.0 - beta1) * c
    if variant == "adamw":
        state.v = beta2 * state.v + (1.0 - beta2) * c * c
        mhat = state.m / (1.0 - beta1**t)
        vhat = state.v / (1.0 - beta2**t)
        direction = mhat / (np.sqrt(vhat) + hyper.eps)
    elif variant == "lion":
        direction = np.sign(state.m)
    else:  # shampoo: sign-spectrum step U V^T via Newton-Schulz
        if frobenius_norm(state.m) == 0.0:
            direction = np.zeros(block.shape)
        else:
            direction = newton_schulz_orthogonalize(state.m, ns_iters, ns_coeffs)
    delta = -hyper.gamma * (direction + hyper.lam * block.values)
    block.values += delta
    state.g_prev = grad.copy()
    check_finite_buffers("mars", state.m, state.v)
    check_finite_values(block)
    return delta
