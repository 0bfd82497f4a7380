"""Adam-family update rules and the state/validation helpers shared by all rules.

Every ``*_step`` function mutates ``block.values`` and its state in place and
returns the increment that was added to the parameters (for update-norm
logging). Weight decay is decoupled everywhere: the shrinkage term ``lam * x``
rides inside the update, never inside the gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blocks import CommonHyper, ParamBlock
from ..errors import ContractViolationError, PoisonedStateError
from ..schedules import EmaScheduleSpec, ademamix_alpha_at, ademamix_beta3_at


def check_finite_grad(grad: np.ndarray) -> None:
    if not np.all(np.isfinite(grad)):
        raise PoisonedStateError("non-finite gradient")


def check_finite_values(block: ParamBlock) -> None:
    if not np.all(np.isfinite(block.values)):
        raise PoisonedStateError(f"non-finite parameters in block {block.name!r}")


def check_finite_buffers(owner: str, *buffers) -> None:
    """State buffers must never go non-finite silently (e.g. v overflow)."""
    for buf in buffers:
        if not np.all(np.isfinite(buf)):
            raise PoisonedStateError(f"non-finite state buffer in {owner}")


def check_beta(name: str, value: float, *, allow_zero: bool = False) -> None:
    low_ok = value >= 0.0 if allow_zero else value > 0.0
    if not (low_ok and value < 1.0):
        raise ContractViolationError(f"{name} must lie in {'[0, 1)' if allow_zero else '(0, 1)'}, got {value}")


@dataclass
class AdamLikeState:
    """First/second moment EMAs plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, shape) -> "AdamLikeState":
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass
class AdoptState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    v_ready: bool = False

    @classmethod
    def zeros(cls, shape) -> "AdoptState":
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass
class AdemamixState:
    m: np.ndarray
    m_slow: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, shape) -> "AdemamixState":
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))


def adamw_step(
    block: ParamBlock,
    grad: np.ndarray,
    state: AdamLikeState,
    hyper: CommonHyper,
    beta1: float = 0.9,
    beta2: float = 0.999,
) -> np.ndarray:
    """Bias-corrected Adam with decoupled weight decay.

    x <- x - gamma * (mhat / (sqrt(vhat) + eps) + lam * x)
    """
    check_finite_grad(grad)
    check_beta("beta1", beta1)
    check_beta("beta2", beta2)
    state.t += 1
    t = state.t
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    mhat = state.m / (1.0 - beta1**t)
    vhat = state.v / (1.0 - beta2**t)
    delta = -hyper.gamma * (mhat / (np.sqrt(vhat) + hyper.eps) + hyper.lam * block.values)
    block.values += delta
    check_finite_buffers("adamw", state.m, state.v)
    check_finite_values(block)
    return delta


def adopt_init(state: AdoptState, grad: np.ndarray) -> None:
    """Consume the first observed gradient to seed v0 = g0 * g0 (no motion)."""
    check_finite_grad(grad)
    state.v = grad * grad
    state.v_ready = True


def adopt_step(
    block: ParamBlock,
    grad: np.ndarray,
    state: AdoptState,
    hyper: CommonHyper,
    beta1: float = 0.9,
    beta2: float = 0.999,
) -> np.ndarray:
    """Normalize by the previous second moment, clamp by t^(1/4), update v after."""
    if not state.v_ready:
        raise ContractViolationError("adopt_step called before adopt_init seeded v0")
    check_finite_grad(grad)
    check_beta("beta1", beta1)
    check_beta("beta2", beta2)
    state.t += 1
    c = state.t**0.25
    ratio = grad / np.maximum(np.sqrt(state.v), hyper.eps)
    state.m = beta1 * state.m + (1.0 - beta1) * np.clip(ratio, -c, c)
    delta = -hyper.gamma * (state.m + hyper.lam * block.values)
    block.values += delta
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    check_finite_buffers("adopt", state.m, state.v)
    check_finite_values(block)
    return delta


def ademamix_step(
    block: ParamBlock,
    grad: np.ndarray,
    state: AdemamixState,
    hyper: CommonHyper,
    ema: EmaScheduleSpec,
    beta1: float = 0.9,
    beta2: float = 0.999,
) -> np.ndarray:
    """Fast EMA with bias correction plus a scheduled slow EMA weighted by alpha(t).

    The slow EMA is deliberately not bias-corrected; alpha(t) ramps from ~0 so
    early steps reduce to plain AdamW.
    """
    check_finite_grad(grad)
    check_beta("beta1", beta1)
    check_beta("beta2", beta2)
    state.t += 1
    t = state.t
    alpha_t = ademamix_alpha_at(ema, t)
    beta3_t = ademamix_beta3_at(ema, t)
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.m_slow = beta3_t * state.m_slow + (1.0 - beta3_t) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    mhat = state.m / (1.0 - beta1**t)
    vhat = state.v / (1.0 - beta2**t)
    num = mhat + alpha_t * state.m_slow
    delta = -hyper.gamma * (num / (np.sqrt(vhat) + hyper.eps) + hyper.lam * block.values)
    block.values += delta
    check_finite_buffers("ademamix", state.m, state.m_slow, state.v)
    check_finite_values(block)
    return delta
