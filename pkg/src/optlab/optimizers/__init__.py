"""All fourteen update rules plus the routing engines."""

from .base import (
    AdamLikeState,
    AdemamixState,
    AdoptState,
    adamw_step,
    ademamix_step,
    adopt_init,
    adopt_step,
)
from .engine import OPTIMIZER_NAMES, OPTIMIZERS, Optimizer, StepInfo, make_optimizer
from .mars import MarsState, mars_step
from .muon import (
    NS_COEFFS,
    NS_ITERS,
    MuonState,
    dmuon_step,
    muon_step,
    newton_schulz_orthogonalize,
)
from .prodigy import ProdigyState, prodigy_step
from .schedule_free import ScheduleFreeState, sf_eval_point, sfadamw_step
from .sign import SignState, lion_step, signum_step
from .soap import SoapState, soap_step
from .sophia import SophiaState, sophia_step, sophia_wants_estimate

__all__ = [
    "AdamLikeState",
    "AdemamixState",
    "AdoptState",
    "MarsState",
    "MuonState",
    "NS_COEFFS",
    "NS_ITERS",
    "OPTIMIZERS",
    "OPTIMIZER_NAMES",
    "Optimizer",
    "ProdigyState",
    "ScheduleFreeState",
    "SignState",
    "SoapState",
    "SophiaState",
    "StepInfo",
    "adamw_step",
    "ademamix_step",
    "adopt_init",
    "adopt_step",
    "dmuon_step",
    "lion_step",
    "make_optimizer",
    "mars_step",
    "muon_step",
    "newton_schulz_orthogonalize",
    "prodigy_step",
    "sf_eval_point",
    "sfadamw_step",
    "signum_step",
    "soap_step",
    "sophia_step",
    "sophia_wants_estimate",
]
