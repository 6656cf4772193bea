"""Prediction-free stochastic mirror descent baseline.

Same engine, sampler, ledger, and policy extraction as the optimistic
solver, but with the prediction term removed, a fresh single-sample dual
estimator each step (no history averaging), and fixed learning rates that
require the target accuracy up front.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DmdpInstance
from .optimistic_pd import RunOutput, run


@dataclass(frozen=True)
class SmdConfig:
    accuracy_target: float
    horizon: int

    def __post_init__(self):
        if not (0.0 < self.accuracy_target < 1.0):
            raise ValueError("accuracy target must be in (0, 1)")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")


def smd_learning_rates(instance: DmdpInstance, epsilon: float) -> tuple[float, float]:
    """Fixed rates: eta_v = eps/8, eta_mu = eps / (36 ((1-gamma)^-2 + 1) N)."""
    inv = 1.0 / (1.0 - instance.discount)
    eta_v = epsilon / 8.0
    eta_mu = epsilon / (36.0 * (inv**2 + 1.0) * instance.num_pairs)
    return eta_v, eta_mu


def run_smd(
    instance: DmdpInstance,
    q,
    horizon: int,
    epsilon: float,
    seed: int,
    checkpoints=None,
) -> RunOutput:
    config = SmdConfig(accuracy_target=epsilon, horizon=horizon)
    return run(
        instance,
        None,
        q,
        config.horizon,
        seed,
        checkpoints,
        mu_estimator="fresh",
        fixed_rates=smd_learning_rates(instance, config.accuracy_target),
    )
