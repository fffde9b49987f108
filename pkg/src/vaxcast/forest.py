"""Depth-bounded entropy decision trees, the bagged random forest, and a
naive Bayes baseline.

Trees are grown greedily on information gain. Binary features split at 0.5;
continuous features split at midpoints between consecutive distinct values
present at the node. Candidate features are drawn per node without
replacement from the full feature set. All randomness flows through streams
derived from (seed, tree index), so training is deterministic however the
work is scheduled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import xlogy

from .data_model import BINARY, CONTINUOUS, Dataset, Record
from .errors import ConfigError, SchemaError

GAIN_EPS = 1e-12


@dataclass
class TreeNode:
    """Leaf (class_ + class_counts) or internal split."""

    feature: Optional[str] = None
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    class_: int = 0
    class_counts: tuple = (0, 0)

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class ForestConfig:
    n_trees: int = 25
    max_depth: int = 20
    features_per_split: int | str = "sqrt"
    bagging: bool = True
    seed: int = 0

    def resolve_mtry(self, n_features: int) -> int:
        m = self.features_per_split
        if m == "sqrt":
            m = int(np.ceil(np.sqrt(n_features)))
        elif m == "all":
            m = n_features
        if not 1 <= m <= n_features:
            raise ConfigError(
                f"features_per_split {self.features_per_split!r} outside "
                f"[1, {n_features}]"
            )
        return int(m)

    def validate(self) -> None:
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0")


@dataclass
class Forest:
    trees: list
    config: ForestConfig
    schema_fingerprint: str
    feature_names: list              # full training schema order
    trained_features: list           # subset the trees were grown on
    bag_coverage: list = field(default_factory=list)
    _flat: list = field(default_factory=list, repr=False)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """The derived random stream used for one tree of a forest."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tree_index,)))


# ---------------------------------------------------------------------------
# training

_LOG2 = float(np.log(2.0))


def _weighted_entropy(pos, n):
    """n * H(pos/n) in bits, elementwise; zero where n == 0 (xlogy(0,0)=0)."""
    neg = n - pos
    return (xlogy(n, n) - xlogy(pos, pos) - xlogy(neg, neg)) / _LOG2


class _Grower:
    """Per-tree training state over bag-gathered arrays."""

    def __init__(self, X, y, kinds, cont_grids, cont_codes, names,
                 max_depth, mtry, rng):
        self.X = X
        self.y = y
        self.is_binary = np.array([k == BINARY for k in kinds])
        self.cont_grids = cont_grids      # feature index -> sorted unique values
        self.cont_codes = cont_codes      # feature index -> codes into its grid
        self.names = names
        self.max_depth = max_depth
        self.mtry = mtry
        self.rng = rng
        self.F = X.shape[1]

    def grow(self, idx, depth) -> TreeNode:
        y = self.y[idx]
        m = idx.size
        pos = int(y.sum())
        counts = (m - pos, pos)
        if depth >= self.max_depth or pos == 0 or pos == m:
            return _leaf(counts)

        cand = np.sort(self.rng.choice(self.F, size=self.mtry, replace=False))
        parent_h = float(_weighted_entropy(float(pos), float(m)))

        # (gain, feature, threshold, code_cut); lowest index wins gain ties
        results = []
        bin_cand = cand[self.is_binary[cand]]
        if bin_cand.size:
            sub = self.X[np.ix_(idx, bin_cand)]
            ones = sub.sum(axis=0)
            pos1 = y @ sub
            child = _weighted_entropy(np.concatenate([pos1, pos - pos1]),
                                      np.concatenate([ones, m - ones]))
            k = bin_cand.size
            gains = np.where((ones > 0) & (ones < m),
                             (parent_h - child[:k] - child[k:]) / m, -np.inf)
            kbest = int(np.argmax(gains))  # first max = lowest feature index
            results.append((float(gains[kbest]), int(bin_cand[kbest]), 0.5, -1))

        for j in cand[~self.is_binary[cand]]:
            gain, thr, cut = self._best_continuous_cut(j, idx, y, m, pos,
                                                       parent_h)
            results.append((gain, int(j), thr, cut))

        best_gain, best_j, best_thr, best_cut = max(
            results, key=lambda r: (r[0], -r[1]))
        if best_gain <= GAIN_EPS:
            return _leaf(counts)

        if self.is_binary[best_j]:
            mask = self.X[idx, best_j] == 0.0
        else:
            mask = self.cont_codes[best_j][idx] <= best_cut
        return TreeNode(
            feature=self.names[best_j],
            threshold=float(best_thr),
            left=self.grow(idx[mask], depth + 1),
            right=self.grow(idx[~mask], depth + 1),
            class_=_majority(counts),
            class_counts=counts,
        )

    def _best_continuous_cut(self, j, idx, y, m, pos, parent_h):
        codes = self.cont_codes[j][idx]
        grid = self.cont_grids[j]
        cnt = np.bincount(codes, minlength=grid.size)
        present = np.flatnonzero(cnt)
        if present.size < 2:
            return -np.inf, 0.0, -1
        cnt1 = np.bincount(codes, weights=y, minlength=grid.size)
        ln = np.cumsum(cnt[present])[:-1]
        l1 = np.cumsum(cnt1[present])[:-1]
        child = (_weighted_entropy(l1, ln)
                 + _weighted_entropy(pos - l1, m - ln))
        gains = (parent_h - child) / m
        k = int(np.argmax(gains))  # first max = lowest threshold on ties
        thr = 0.5 * (grid[present[k]] + grid[present[k + 1]])
        return float(gains[k]), float(thr), int(present[k])


def _leaf(counts) -> TreeNode:
    return TreeNode(class_=_majority(counts), class_counts=counts)


def _majority(counts) -> int:
    # tie -> class 0 (not vaccinated), the promotion-safe default
    return 1 if counts[1] > counts[0] else 0


def _feature_tables(data: Dataset, features=None):
    """Training arrays over a feature subset, kept in schema order."""
    if features is None:
        names = list(data.schema.names)
    else:
        wanted = set(features)
        unknown = wanted - set(data.schema.names)
        if unknown:
            raise SchemaError(f"unknown feature(s) {sorted(unknown)}")
        names = [n for n in data.schema.names if n in wanted]
    X = data.matrix(names)
    if np.isnan(X).any():
        raise SchemaError("training data has missing feature values")
    kinds = [data.schema.feature(n).kind for n in names]
    grids, codes = {}, {}
    for j, kind in enumerate(kinds):
        if kind == CONTINUOUS:
            grids[j], codes[j] = np.unique(X[:, j], return_inverse=True)
    return X, kinds, grids, codes, names


def _outcome_vector(data: Dataset, outcome):
    outcome = outcome or data.schema.outcome_name
    y = data.outcome if outcome == data.schema.outcome_name \
        else data.feature_column(outcome)
    if np.isnan(y).any():
        raise SchemaError("training data has missing outcome values")
    return np.asarray(y, dtype=np.float64)


def train_tree(data: Dataset, outcome=None, max_depth: int = 20,
               features_per_split: int | str = "all",
               rng: np.random.Generator | None = None,
               features=None) -> TreeNode:
    """Grow one entropy decision tree on the full dataset (no bagging)."""
    if len(data) == 0:
        raise SchemaError("cannot train on an empty dataset")
    X, kinds, grids, codes, names = _feature_tables(data, features)
    y = _outcome_vector(data, outcome)
    cfg = ForestConfig(features_per_split=features_per_split)
    mtry = cfg.resolve_mtry(X.shape[1])
    rng = rng if rng is not None else np.random.default_rng(0)
    grower = _Grower(X, y, kinds, grids, codes, names, max_depth, mtry, rng)
    return grower.grow(np.arange(X.shape[0]), 0)


def train_forest(data: Dataset, outcome=None,
                 config: ForestConfig | None = None, features=None) -> Forest:
    """Train a bagged forest; deterministic for fixed (data, config)."""
    config = config or ForestConfig()
    config.validate()
    if len(data) == 0:
        raise SchemaError("cannot train on an empty dataset")
    X, kinds, grids, codes, names = _feature_tables(data, features)
    y = _outcome_vector(data, outcome)
    n, F = X.shape
    mtry = config.resolve_mtry(F)

    trees, coverage = [], []
    for t in range(config.n_trees):
        rng = tree_rng(config.seed, t)
        if config.bagging:
            bag = rng.integers(0, n, size=n)
            coverage.append(float(np.unique(bag).size / n))
        else:
            bag = np.arange(n)
            coverage.append(1.0)
        Xb = X[bag]
        yb = y[bag]
        codes_b = {j: c[bag] for j, c in codes.items()}
        grower = _Grower(Xb, yb, kinds, grids, codes_b, names,
                         config.max_depth, mtry, rng)
        trees.append(grower.grow(np.arange(n), 0))

    return Forest(
        trees=trees,
        config=config,
        schema_fingerprint=data.schema.fingerprint(),
        feature_names=list(data.schema.names),
        trained_features=names,
        bag_coverage=coverage,
    )


# ---------------------------------------------------------------------------
# prediction

def _flatten(tree: TreeNode, name_to_col):
    feat, thr, left, right, cls = [], [], [], [], []

    def visit(node):
        i = len(feat)
        feat.append(-1)
        thr.append(0.0)
        left.append(i)
        right.append(i)
        cls.append(node.class_)
        if not node.is_leaf:
            feat[i] = name_to_col[node.feature]
            thr[i] = node.threshold
            left[i] = visit(node.left)
            right[i] = visit(node.right)
        return i

    visit(tree)
    return (np.asarray(feat, dtype=np.int32), np.asarray(thr),
            np.asarray(left, dtype=np.int32), np.asarray(right, dtype=np.int32),
            np.asarray(cls, dtype=np.int8))


def _flat_trees(forest: Forest):
    if not forest._flat:
        name_to_col = {n: i for i, n in enumerate(forest.feature_names)}
        forest._flat = [_flatten(t, name_to_col) for t in forest.trees]
    return forest._flat


def _tree_votes(flat, X, max_depth):
    feat, thr, left, right, cls = flat
    ptr = np.zeros(X.shape[0], dtype=np.int32)
    rows = np.arange(X.shape[0])
    for _ in range(max_depth):
        f = feat[ptr]
        split = f >= 0
        if not split.any():
            break
        v = X[rows, np.where(split, f, 0)]
        ptr = np.where(split, np.where(v <= thr[ptr], left[ptr], right[ptr]), ptr)
    return cls[ptr]


def predict_batch(forest: Forest, data: Dataset):
    """(classes, scores) for every record; score = share of trees voting 1."""
    if data.schema.fingerprint() != forest.schema_fingerprint:
        raise SchemaError(
            f"schema fingerprint mismatch: data {data.schema.fingerprint()} "
            f"vs model {forest.schema_fingerprint}"
        )
    X = data.matrix()
    if np.isnan(data.matrix(forest.trained_features)).any():
        raise SchemaError("prediction data has missing feature values")
    votes = np.zeros(X.shape[0])
    for flat in _flat_trees(forest):
        votes += _tree_votes(flat, X, forest.config.max_depth)
    scores = votes / forest.config.n_trees
    classes = (scores > 0.5).astype(np.int8)  # exact tie -> class 0
    return classes, scores


def predict(forest: Forest, record: Record):
    """Route one record through every tree; (class, score)."""
    votes = 0
    for tree in forest.trees:
        node = tree
        while not node.is_leaf:
            v = record.feature_value(node.feature)
            if v is None:
                raise SchemaError(f"record missing feature {node.feature!r}")
            node = node.left if v <= node.threshold else node.right
        votes += node.class_
    score = votes / forest.config.n_trees
    return (1 if score > 0.5 else 0), score


def tree_predict(tree: TreeNode, record: Record) -> int:
    node = tree
    while not node.is_leaf:
        v = record.feature_value(node.feature)
        if v is None:
            raise SchemaError(f"record missing feature {node.feature!r}")
        node = node.left if v <= node.threshold else node.right
    return node.class_


# ---------------------------------------------------------------------------
# persistence

def _node_to_json(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"class": node.class_, "counts": list(node.class_counts)}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "counts": list(node.class_counts),
        "left": _node_to_json(node.left),
        "right": _node_to_json(node.right),
    }


def _node_from_json(doc: dict) -> TreeNode:
    counts = tuple(doc.get("counts", (0, 0)))
    if "feature" not in doc:
        return TreeNode(class_=doc["class"], class_counts=counts)
    return TreeNode(
        feature=doc["feature"],
        threshold=doc["threshold"],
        left=_node_from_json(doc["left"]),
        right=_node_from_json(doc["right"]),
        class_=_majority(counts),
        class_counts=counts,
    )


def forest_to_json(forest: Forest) -> dict:
    return {
        "kind": "forest",
        "config": {
            "n_trees": forest.config.n_trees,
            "max_depth": forest.config.max_depth,
            "features_per_split": forest.config.features_per_split,
            "bagging": forest.config.bagging,
            "seed": forest.config.seed,
        },
        "schema_fingerprint": forest.schema_fingerprint,
        "feature_names": forest.feature_names,
        "trained_features": forest.trained_features,
        "bag_coverage": forest.bag_coverage,
        "trees": [_node_to_json(t) for t in forest.trees],
    }


def forest_from_json(doc: dict) -> Forest:
    cfg = ForestConfig(**doc["config"])
    return Forest(
        trees=[_node_from_json(t) for t in doc["trees"]],
        config=cfg,
        schema_fingerprint=doc["schema_fingerprint"],
        feature_names=list(doc["feature_names"]),
        trained_features=list(doc.get("trained_features", doc["feature_names"])),
        bag_coverage=list(doc.get("bag_coverage", [])),
    )


def save_forest(forest: Forest, path) -> None:
    with open(path, "w") as fh:
        json.dump(forest_to_json(forest), fh)
        fh.write("\n")


def load_forest(path) -> Forest:
    with open(path) as fh:
        return forest_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# naive Bayes baseline

@dataclass
class NaiveBayesModel:
    log_prior: np.ndarray            # shape (2,)
    tables: dict                     # name -> {"edges": array|None, "log_p": (2, V)}
    feature_names: list
    schema_fingerprint: str


def train_naive_bayes(data: Dataset, outcome=None, features=None) -> NaiveBayesModel:
    """Class-conditional model with Laplace add-1 smoothing.

    Continuous features are discretized into 10 equal-frequency bins, the
    same treatment the attribute ranking uses.
    """
    from .selection import equal_frequency_edges

    y = _outcome_vector(data, outcome)
    n1 = float(y.sum())
    n0 = float(y.size - n1)
    if n0 == 0 or n1 == 0:
        raise SchemaError("naive Bayes needs both outcome classes present")
    log_prior = np.log(np.array([n0, n1]) / y.size)

    if features is None:
        names = list(data.schema.names)
    else:
        wanted = set(features)
        names = [n for n in data.schema.names if n in wanted]

    tables = {}
    for name in names:
        col = data.feature_column(name)
        if np.isnan(col).any():
            raise SchemaError(f"missing values in feature {name!r}")
        if data.schema.feature(name).kind == BINARY:
            edges = None
            codes, V = col.astype(np.int64), 2
        else:
            edges = equal_frequency_edges(col)
            codes, V = np.digitize(col, edges), edges.size + 1
        log_p = np.empty((2, V))
        for c, mask in enumerate((y == 0.0, y == 1.0)):
            counts = np.bincount(codes[mask], minlength=V).astype(np.float64)
            log_p[c] = np.log((counts + 1.0) / (counts.sum() + V))
        tables[name] = {"edges": edges, "log_p": log_p}

    return NaiveBayesModel(
        log_prior=log_prior,
        tables=tables,
        feature_names=names,
        schema_fingerprint=data.schema.fingerprint(),
    )


def predict_nb_batch(model: NaiveBayesModel, data: Dataset):
    if data.schema.fingerprint() != model.schema_fingerprint:
        raise SchemaError("schema fingerprint mismatch")
    n = len(data)
    log_post = np.tile(model.log_prior, (n, 1))
    for name in model.feature_names:
        col = data.feature_column(name)
        t = model.tables[name]
        codes = col.astype(np.int64) if t["edges"] is None \
            else np.digitize(col, t["edges"])
        log_post += t["log_p"][:, codes].T
    # normalize to the posterior of class 1
    shift = log_post.max(axis=1, keepdims=True)
    p = np.exp(log_post - shift)
    scores = p[:, 1] / p.sum(axis=1)
    return (scores > 0.5).astype(np.int8), scores


def predict_nb(model: NaiveBayesModel, record: Record):
    log_post = model.log_prior.copy()
    for name in model.feature_names:
        v = record.feature_value(name)
        if v is None:
            raise SchemaError(f"record missing feature {name!r}")
        t = model.tables[name]
        code = int(v) if t["edges"] is None else int(np.digitize(v, t["edges"]))
        log_post = log_post + t["log_p"][:, code]
    shift = log_post.max()
    p = np.exp(log_post - shift)
    score = float(p[1] / p.sum())
    return (1 if score > 0.5 else 0), score
