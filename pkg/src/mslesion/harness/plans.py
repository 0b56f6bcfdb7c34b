"""Subject-level split generators for the cross-validation protocols.

Generators enumerate held-out subjects from the end of the id list, so for
ids ``1..5`` nested LOSO tests subject 5 first with validation subjects
4, 3, 2, 1 in turn.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mslesion.exceptions import PlanError
from mslesion.models.enums import FusionMethod, Protocol
from mslesion.models.plan import ExperimentPlan, Split

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

FIXED_SPLIT = "fixed-split"


def _unique(ids: Sequence[str]) -> list[str]:
    out = [str(i) for i in ids]
    if len(set(out)) != len(out):
        raise PlanError(f"duplicate subject ids in {out}")
    return out


def _without(ids: Sequence[str], drop: Iterable[str]) -> list[str]:
    dropped = set(drop)
    return [i for i in ids if i not in dropped]


def contiguous_folds(ids: Sequence[str], k: int) -> list[list[str]]:
    """``k`` contiguous chunks of ``len(ids) // k``; the last chunk takes the remainder."""
    size = len(ids) // k
    folds = [list(ids[i * size:(i + 1) * size]) for i in range(k - 1)]
    folds.append(list(ids[(k - 1) * size:]))
    return folds


def plan_nested_loso(
    ids: Sequence[str], fusion: FusionMethod = FusionMethod.MAJORITY_VOTE, seed: int = 0,
) -> ExperimentPlan:
    """One split per (test subject, validation subject) pair; the rest train."""
    ids = _unique(ids)
    if len(ids) < 3:
        raise PlanError(f"nested leave-one-subject-out needs >= 3 subjects, got {len(ids)}")
    splits = []
    for test in reversed(ids):
        rest = _without(ids, [test])
        for val in reversed(rest):
            splits.append(Split(
                name=f"test-{test}_val-{val}",
                train=_without(rest, [val]),
                validation=[val],
                test=[test],
                fold=f"test-{test}",
            ))
    return ExperimentPlan(protocol=Protocol.NESTED_LOSO, splits=splits, fusion=fusion, seed=seed)


def plan_loso_ensemble(
    train_ids: Sequence[str],
    test_ids: Sequence[str],
    fusion: FusionMethod = FusionMethod.MAJORITY_VOTE,
    seed: int = 0,
) -> ExperimentPlan:
    """Leave-one-out over the training subjects; every member shares the external test set."""
    train_ids, test_ids = _unique(train_ids), _unique(test_ids)
    if len(train_ids) < 2:
        raise PlanError(f"a LOSO ensemble needs >= 2 training subjects, got {len(train_ids)}")
    if not test_ids:
        raise PlanError("a LOSO ensemble needs a non-empty test set")
    splits = [
        Split(
            name=f"val-{val}",
            train=_without(train_ids, [val]),
            validation=[val],
            test=list(test_ids),
        )
        for val in reversed(train_ids)
    ]
    return ExperimentPlan(protocol=Protocol.LOSO_ENSEMBLE, splits=splits, fusion=fusion, seed=seed)


def plan_nested_kfold(
    ids: Sequence[str],
    k: int = 4,
    fusion: FusionMethod = FusionMethod.MAJORITY_VOTE,
    seed: int = 0,
) -> ExperimentPlan:
    """Outer k-fold test partition; inside each, k members rotating the validation fold."""
    ids = _unique(ids)
    if k < 2:
        raise PlanError(f"k must be >= 2, got {k}")
    if len(ids) < k * k:
        raise PlanError(f"nested {k}-fold needs >= {k * k} subjects, got {len(ids)}")
    splits = []
    for i, test in enumerate(contiguous_folds(ids, k), start=1):
        rest = _without(ids, test)
        for j, val in enumerate(contiguous_folds(rest, k), start=1):
            splits.append(Split(
                name=f"fold{i}-inner{j}",
                train=_without(rest, val),
                validation=val,
                test=test,
                fold=f"fold{i}",
            ))
    return ExperimentPlan(protocol=Protocol.NESTED_KFOLD, splits=splits, fusion=fusion, seed=seed)


def default_split_sizes(n: int) -> tuple[int, int, int]:
    """Train/validation/test sizes in the 21/7/9 proportion, at least one each."""
    if n < 3:
        raise PlanError(f"a fixed split needs >= 3 subjects, got {n}")
    n_val = max(1, round(n * 7 / 37))
    n_test = max(1, round(n * 9 / 37))
    return n - n_val - n_test, n_val, n_test


def plan_fixed_split(
    ids: Sequence[str],
    n_train: int,
    n_val: int,
    n_test: int,
    seed: int = 0,
    fusion: FusionMethod = FusionMethod.MAJORITY_VOTE,
) -> ExperimentPlan:
    """One random subject-level train/validation/test split."""
    ids = _unique(ids)
    if min(n_train, n_val, n_test) < 1:
        raise PlanError("a fixed split needs at least one subject per set")
    if n_train + n_val + n_test > len(ids):
        raise PlanError(
            f"split sizes {n_train}/{n_val}/{n_test} exceed the {len(ids)} available subjects"
        )
    order = [ids[i] for i in np.random.default_rng(seed).permutation(len(ids))]
    split = Split(
        name="fixed",
        train=order[:n_train],
        validation=order[n_train:n_train + n_val],
        test=order[n_train + n_val:n_train + n_val + n_test],
    )
    return ExperimentPlan(protocol=FIXED_SPLIT, splits=[split], fusion=fusion, seed=seed)


def validate_plan(plan: ExperimentPlan, known_ids: Iterable[str]) -> None:
    """Reject plans naming unknown subjects or testing a subject in two folds."""
    if not plan.splits:
        raise PlanError("plan has no splits")
    known = set(known_ids)
    unknown = sorted({i for split in plan.splits for i in split.ids} - known)
    if unknown:
        raise PlanError(f"plan references subjects missing from the manifest: {unknown}")
    names = [s.name for s in plan.splits]
    if len(set(names)) != len(names):
        raise PlanError("split names must be unique")
    seen: dict[str, str] = {}
    for fold, splits in plan.folds().items():
        tests = {i for s in splits for i in s.test}
        for case_id in tests:
            if case_id in seen and seen[case_id] != fold:
                raise PlanError(f"subject {case_id} is tested in folds {seen[case_id]} and {fold}")
            seen[case_id] = fold
