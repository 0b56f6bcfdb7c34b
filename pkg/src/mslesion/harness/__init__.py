"""Cross-validation protocols, plan execution, ablation and report emission."""

from mslesion.harness.ablation import run_ablation
from mslesion.harness.plans import (
    plan_fixed_split,
    plan_loso_ensemble,
    plan_nested_kfold,
    plan_nested_loso,
)
from mslesion.harness.runner import RunOutcome, run_plan

__all__ = [
    "RunOutcome",
    "plan_fixed_split",
    "plan_loso_ensemble",
    "plan_nested_kfold",
    "plan_nested_loso",
    "run_ablation",
    "run_plan",
]
