"""Age-split boundary search, the two-expert composite model, and the
promotion-policy assignment.

Routing convention everywhere: "old" means strictly above the boundary; a
record exactly at the boundary routes to the young expert.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data_model import Dataset, Record
from .errors import PipelineError, SchemaError
from .evaluation import evaluate_predictions
from .forest import (Forest, ForestConfig, forest_from_json, forest_to_json,
                     predict, predict_batch, train_forest)

POLICY_TARGET = "policy1_target"
POLICY_NO_PROMOTION = "policy2_no_promotion"
POLICY_COMMUNITY = "policy2_community_pool"


def _derived_config(config: ForestConfig, *key) -> ForestConfig:
    ss = np.random.SeedSequence(config.seed, spawn_key=tuple(key))
    seed = int(ss.generate_state(1, dtype=np.uint64)[0])
    return ForestConfig(
        n_trees=config.n_trees, max_depth=config.max_depth,
        features_per_split=config.features_per_split,
        bagging=config.bagging, seed=seed,
    )


@dataclass
class BoundaryMetrics:
    young_ppv: Optional[float]
    old_npv: Optional[float]
    young_n: int
    old_n: int


@dataclass
class SplitSearchResult:
    grid: list
    per_boundary: dict
    chosen_boundary: int
    skipped: list = field(default_factory=list)


def split_search(train: Dataset, test: Dataset, grid,
                 config: ForestConfig | None = None) -> SplitSearchResult:
    """Sweep candidate age boundaries, training one expert per side.

    For each boundary the young expert trains on the young training subset
    and is scored by PPV on the young test subset; symmetrically the old
    expert is scored by NPV. The chosen boundary maximizes
    min(young PPV, old NPV) over boundaries where both are defined, ties
    going to the smaller boundary. Boundaries with an empty subset are
    skipped with a warning record.
    """
    config = config or ForestConfig()
    grid = list(grid)
    if not grid:
        raise PipelineError("empty boundary grid")
    if sorted(grid) != grid:
        raise PipelineError("boundary grid must be ascending")

    per_boundary = {}
    skipped = []
    for b in grid:
        tr_young, tr_old = train.split_by_age(b)
        te_young, te_old = test.split_by_age(b)
        if min(len(tr_young), len(tr_old), len(te_young), len(te_old)) == 0:
            skipped.append((b, "empty train or test subset"))
            continue
        young_model = train_forest(tr_young, config=_derived_config(config, b, 0))
        old_model = train_forest(tr_old, config=_derived_config(config, b, 1))
        yp, ys = predict_batch(young_model, te_young)
        op, os_ = predict_batch(old_model, te_old)
        young = evaluate_predictions(yp, te_young.outcome, ys)
        old = evaluate_predictions(op, te_old.outcome, os_)
        per_boundary[b] = BoundaryMetrics(
            young_ppv=young.ppv, old_npv=old.npv,
            young_n=len(te_young), old_n=len(te_old),
        )

    candidates = [(b, m) for b, m in per_boundary.items()
                  if m.young_ppv is not None and m.old_npv is not None]
    if not candidates:
        raise PipelineError(
            "no usable boundary: all grid points were skipped or had an "
            "undefined metric"
        )
    chosen = max(candidates, key=lambda bm: (min(bm[1].young_ppv, bm[1].old_npv),
                                             -bm[0]))[0]
    return SplitSearchResult(grid=grid, per_boundary=per_boundary,
                             chosen_boundary=chosen, skipped=skipped)


@dataclass
class CompositeModel:
    boundary: int
    young_model: Forest
    old_model: Forest
    schema_fingerprint: str
    young_trained_on: str = "full"


def train_composite(train: Dataset, boundary: int = 60,
                    config: ForestConfig | None = None,
                    young_on_subset: bool = False) -> CompositeModel:
    """Train the deployment model: young expert + old expert.

    The young expert trains on the entire training set by default (the
    alternative mode restricts it to the young subset); the old expert
    always trains on records strictly above the boundary.
    """
    config = config or ForestConfig()
    young_data, old_data = train.split_by_age(boundary)
    if len(old_data) == 0:
        raise PipelineError(f"no training records above age {boundary}")
    if len(young_data) == 0:
        raise PipelineError(f"no training records at or below age {boundary}")
    young_model = train_forest(young_data if young_on_subset else train,
                               config=config)
    old_model = train_forest(old_data, config=_derived_config(config, 1))
    return CompositeModel(
        boundary=boundary,
        young_model=young_model,
        old_model=old_model,
        schema_fingerprint=train.schema.fingerprint(),
        young_trained_on="young_subset" if young_on_subset else "full",
    )


def predict_composite(model: CompositeModel, record: Record):
    """(class, score, expert_used) from the age-routed expert."""
    if record.age <= model.boundary:
        cls, score = predict(model.young_model, record)
        return cls, score, "young"
    cls, score = predict(model.old_model, record)
    return cls, score, "old"


def predict_composite_batch(model: CompositeModel, data: Dataset):
    """(classes, scores, expert_used) arrays for a whole dataset."""
    if data.schema.fingerprint() != model.schema_fingerprint:
        raise SchemaError(
            f"schema fingerprint mismatch: data {data.schema.fingerprint()} "
            f"vs model {model.schema_fingerprint}"
        )
    ages = data.ages
    old_mask = ages > model.boundary
    classes = np.zeros(len(data), dtype=np.int8)
    scores = np.zeros(len(data))
    for mask, expert in ((~old_mask, model.young_model),
                         (old_mask, model.old_model)):
        rows = np.flatnonzero(mask)
        if rows.size:
            sub = data.subset(rows)
            cls, sc = predict_batch(expert, sub)
            classes[rows] = cls
            scores[rows] = sc
    return classes, scores, np.where(old_mask, "old", "young")


@dataclass
class PolicyAssignment:
    policy: str
    rationale: dict


def assign_policy(model: CompositeModel, record: Record) -> PolicyAssignment:
    """Map the routed prediction to one of the two deployment policies.

    Predicted-unvaccinated seniors are targeted directly (policy 1); younger
    people join the community promotion pool unless predicted vaccinated;
    predicted-vaccinated seniors get no promotion.
    """
    cls, score, expert = predict_composite(model, record)
    old = record.age > model.boundary
    policy = _policy_for(old, cls)
    return PolicyAssignment(
        policy=policy,
        rationale={
            "age_band": "old" if old else "young",
            "predicted": cls,
            "score": score,
            "expert_used": expert,
        },
    )


def _policy_for(old: bool, cls: int) -> str:
    if old:
        return POLICY_TARGET if cls == 0 else POLICY_NO_PROMOTION
    return POLICY_NO_PROMOTION if cls == 1 else POLICY_COMMUNITY


def assign_policy_batch(model: CompositeModel, data: Dataset):
    classes, scores, experts = predict_composite_batch(model, data)
    old = data.ages > model.boundary
    policies = np.where(
        old,
        np.where(classes == 0, POLICY_TARGET, POLICY_NO_PROMOTION),
        np.where(classes == 1, POLICY_NO_PROMOTION, POLICY_COMMUNITY),
    )
    return policies, classes, scores, experts


# ---------------------------------------------------------------------------
# persistence

def composite_to_json(model: CompositeModel) -> dict:
    return {
        "kind": "composite",
        "boundary": model.boundary,
        "schema_fingerprint": model.schema_fingerprint,
        "young_trained_on": model.young_trained_on,
        "young_model": forest_to_json(model.young_model),
        "old_model": forest_to_json(model.old_model),
    }


def composite_from_json(doc: dict) -> CompositeModel:
    return CompositeModel(
        boundary=doc["boundary"],
        young_model=forest_from_json(doc["young_model"]),
        old_model=forest_from_json(doc["old_model"]),
        schema_fingerprint=doc["schema_fingerprint"],
        young_trained_on=doc.get("young_trained_on", "full"),
    )


def save_composite(model: CompositeModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(composite_to_json(model), fh)
        fh.write("\n")


def load_composite(path) -> CompositeModel:
    with open(path) as fh:
        return composite_from_json(json.load(fh))
