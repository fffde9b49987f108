"""Feature schema, records, dataset container, CSV ingestion and summaries.

A Dataset is column-oriented internally (one float matrix over the schema's
features, NaN marking missing values) so the estimation and tree code can
work on numpy arrays directly. Record objects are materialized on demand.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
import pandas as pd

from .errors import IngestError, SchemaError

BINARY = "binary"
CONTINUOUS = "continuous"

AGE_MIN, AGE_MAX = 12, 110
YEAR_COLUMN = "year"


@dataclass(frozen=True)
class FeatureSpec:
    """One predictor: a name, a kind (binary/continuous) and a group label."""

    name: str
    kind: str
    group: str
    description: str = ""

    def __post_init__(self):
        if self.kind not in (BINARY, CONTINUOUS):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class Schema:
    """Ordered feature list plus the outcome and age column names."""

    features: tuple[FeatureSpec, ...]
    outcome_name: str = "flushot"
    age_name: str = "age"

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate feature names: {dupes}")
        if self.outcome_name in names:
            raise SchemaError(f"outcome {self.outcome_name!r} clashes with a feature")
        if self.age_name not in names:
            raise SchemaError(f"age column {self.age_name!r} missing from schema")
        if self.feature(self.age_name).kind != CONTINUOUS:
            raise SchemaError("age must be a continuous feature")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaError(f"unknown feature {name!r}")

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise SchemaError(f"unknown feature {name!r}")

    def groups(self) -> dict[str, list[str]]:
        """Group label -> member feature names, in schema order."""
        out: dict[str, list[str]] = {}
        for f in self.features:
            out.setdefault(f.group, []).append(f.name)
        return out

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "features": [[f.name, f.kind, f.group] for f in self.features],
                "outcome": self.outcome_name,
                "age": self.age_name,
            },
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def csv_columns(self) -> list[str]:
        return self.names + [YEAR_COLUMN, self.outcome_name]


@dataclass
class Record:
    """One surveyed individual.

    `values` maps feature names to numbers (None = missing); the age feature
    lives in its own field and is looked up through feature_value().
    """

    values: dict
    outcome: int | None
    age: int
    year: int
    weight: float = 1.0

    def feature_value(self, name: str, age_name: str = "age"):
        if name == age_name:
            return float(self.age)
        return self.values.get(name)


class Dataset:
    """Immutable column-typed table of records conforming to a Schema."""

    def __init__(self, schema: Schema, records, source: str = "ingested"):
        arrays = _arrays_from_records(schema, records)
        self._init_from_arrays(schema, *arrays, source=source)

    @classmethod
    def from_arrays(cls, schema, X, outcome, years, weights=None, source="synthetic"):
        ds = cls.__new__(cls)
        X = np.asarray(X, dtype=np.float64)
        outcome = np.asarray(outcome, dtype=np.float64)
        years = np.asarray(years, dtype=np.int64)
        if weights is None:
            weights = np.ones(X.shape[0])
        ds._init_from_arrays(schema, X, outcome, years,
                             np.asarray(weights, dtype=np.float64), source=source)
        return ds

    def _init_from_arrays(self, schema, X, outcome, years, weights, source):
        n = X.shape[0]
        if X.shape != (n, len(schema.features)):
            raise SchemaError(
                f"matrix shape {X.shape} does not match {len(schema.features)} features"
            )
        _validate_columns(schema, X)
        self.schema = schema
        self.source = source
        self._X = X
        self._outcome = outcome
        self._years = years
        self._weights = weights
        for arr in (self._X, self._outcome, self._years, self._weights):
            arr.setflags(write=False)
        self._age_idx = schema.index(schema.age_name)

    def __len__(self) -> int:
        return self._X.shape[0]

    @property
    def n(self) -> int:
        return len(self)

    @property
    def records(self) -> list[Record]:
        return [self.record(i) for i in range(len(self))]

    def record(self, i: int) -> Record:
        age_name = self.schema.age_name
        values = {}
        for j, f in enumerate(self.schema.features):
            if f.name == age_name:
                continue
            v = self._X[i, j]
            values[f.name] = None if np.isnan(v) else float(v)
        y = self._outcome[i]
        return Record(
            values=values,
            outcome=None if np.isnan(y) else int(y),
            age=int(self._X[i, self._age_idx]),
            year=int(self._years[i]),
            weight=float(self._weights[i]),
        )

    def feature_column(self, name: str) -> np.ndarray:
        return self._X[:, self.schema.index(name)]

    def matrix(self, names=None) -> np.ndarray:
        if names is None:
            return self._X
        idx = [self.schema.index(n) for n in names]
        return self._X[:, idx]

    @property
    def outcome(self) -> np.ndarray:
        return self._outcome

    @property
    def ages(self) -> np.ndarray:
        return self._X[:, self._age_idx]

    @property
    def years(self) -> np.ndarray:
        return self._years

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset.from_arrays(
            self.schema, self._X[rows].copy(), self._outcome[rows].copy(),
            self._years[rows].copy(), self._weights[rows].copy(), source=self.source,
        )

    def select_features(self, names) -> "Dataset":
        """Project onto a feature subset, preserving schema order.

        The age column is always retained so age-routing keeps working on
        projected datasets.
        """
        keep = set(names) | {self.schema.age_name}
        specs = tuple(f for f in self.schema.features if f.name in keep)
        unknown = keep - {f.name for f in self.schema.features}
        if unknown:
            raise SchemaError(f"unknown feature(s) {sorted(unknown)}")
        sub = Schema(specs, self.schema.outcome_name, self.schema.age_name)
        idx = [self.schema.index(f.name) for f in specs]
        return Dataset.from_arrays(
            sub, self._X[:, idx].copy(), self._outcome.copy(),
            self._years.copy(), self._weights.copy(), source=self.source,
        )

    def split_by_age(self, boundary: float):
        """(young, old) datasets: young = age <= boundary, old = age > boundary."""
        young = np.flatnonzero(self.ages <= boundary)
        old = np.flatnonzero(self.ages > boundary)
        return self.subset(young), self.subset(old)

    def drop_incomplete(self, names=None, require_outcome=True):
        """Complete-case filter over the given columns (plus the outcome)."""
        cols = self.matrix(names) if names is not None else self._X
        ok = ~np.isnan(cols).any(axis=1)
        if require_outcome:
            ok &= ~np.isnan(self._outcome)
        dropped = int(len(self) - ok.sum())
        return self.subset(np.flatnonzero(ok)), dropped


def _arrays_from_records(schema, records):
    n = len(records)
    F = len(schema.features)
    X = np.full((n, F), np.nan)
    outcome = np.full(n, np.nan)
    years = np.zeros(n, dtype=np.int64)
    weights = np.ones(n)
    age_name = schema.age_name
    name_to_col = {f.name: j for j, f in enumerate(schema.features)}
    for i, r in enumerate(records):
        unknown = set(r.values) - set(name_to_col)
        if unknown:
            raise SchemaError(f"record {i}: unknown feature(s) {sorted(unknown)}")
        for name, v in r.values.items():
            if v is not None:
                X[i, name_to_col[name]] = v
        X[i, name_to_col[age_name]] = r.age
        if r.outcome is not None:
            outcome[i] = r.outcome
        years[i] = r.year
        weights[i] = r.weight
    return X, outcome, years, weights


def _validate_columns(schema, X):
    for j, f in enumerate(schema.features):
        col = X[:, j]
        if f.kind == BINARY:
            bad = ~(np.isnan(col) | (col == 0.0) | (col == 1.0))
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise SchemaError(
                    f"binary feature {f.name!r} holds non-binary value "
                    f"{col[i]!r} at row {i}"
                )
        if f.name == schema.age_name:
            bad = np.isnan(col) | (col < AGE_MIN) | (col > AGE_MAX)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise SchemaError(f"age out of [{AGE_MIN}, {AGE_MAX}] at row {i}")


def concat(datasets) -> Dataset:
    """Pool several datasets with identical schemas (e.g. survey years)."""
    datasets = list(datasets)
    if not datasets:
        raise SchemaError("nothing to concatenate")
    fp = datasets[0].schema.fingerprint()
    for d in datasets[1:]:
        if d.schema.fingerprint() != fp:
            raise SchemaError("schema fingerprint mismatch between datasets")
    source = datasets[0].source if len({d.source for d in datasets}) == 1 \
        else "ingested"
    return Dataset.from_arrays(
        datasets[0].schema,
        np.concatenate([d.matrix() for d in datasets]),
        np.concatenate([d.outcome for d in datasets]),
        np.concatenate([d.years for d in datasets]),
        np.concatenate([d.weights for d in datasets]),
        source=source,
    )


# ---------------------------------------------------------------------------
# restrictions

@dataclass
class RestrictionReport:
    """Exclusion counts, attributed to the first violated rule."""

    excluded_missing_outcome: int = 0
    excluded_missing_education: int = 0
    excluded_missing_income: int = 0
    excluded_missing_marital: int = 0
    retained: int = 0

    @property
    def total(self) -> int:
        return (self.excluded_missing_outcome + self.excluded_missing_education
                + self.excluded_missing_income + self.excluded_missing_marital
                + self.retained)


def apply_restrictions(data: Dataset, education_group: str = "education",
                       income_name: str = "income", marital_group: str = "marital"):
    """Drop records missing outcome / education / income / marital status.

    Rules apply in that fixed order and each record is attributed to the
    first rule it violates.
    """
    groups = data.schema.groups()
    if education_group not in groups:
        raise SchemaError(f"schema has no {education_group!r} group")
    if marital_group not in groups:
        raise SchemaError(f"schema has no {marital_group!r} group")
    income = data.feature_column(income_name)  # raises if absent

    miss_outcome = np.isnan(data.outcome)
    miss_educ = np.isnan(data.matrix(groups[education_group])).any(axis=1)
    miss_income = np.isnan(income)
    miss_marital = np.isnan(data.matrix(groups[marital_group])).any(axis=1)

    rep = RestrictionReport()
    rep.excluded_missing_outcome = int(miss_outcome.sum())
    taken = miss_outcome
    rep.excluded_missing_education = int((miss_educ & ~taken).sum())
    taken = taken | miss_educ
    rep.excluded_missing_income = int((miss_income & ~taken).sum())
    taken = taken | miss_income
    rep.excluded_missing_marital = int((miss_marital & ~taken).sum())
    taken = taken | miss_marital
    rep.retained = int((~taken).sum())

    return data.subset(np.flatnonzero(~taken)), rep


# ---------------------------------------------------------------------------
# summaries

@dataclass
class ColumnSummary:
    name: str
    mean: float
    sd: float
    count: int


def summarize(data: Dataset) -> list[ColumnSummary]:
    """Per-column mean, sample SD (divisor n-1) and non-missing count.

    The outcome is reported first, then every feature in schema order.
    Missing values are excluded per column.
    """
    if len(data) == 0:
        raise SchemaError("cannot summarize an empty dataset")
    rows = []
    cols = [(data.schema.outcome_name, data.outcome)]
    cols += [(f.name, data.feature_column(f.name)) for f in data.schema.features]
    for name, col in cols:
        kept = col[~np.isnan(col)]
        n = kept.size
        mean = float(kept.mean()) if n else float("nan")
        sd = float(kept.std(ddof=1)) if n > 1 else 0.0
        rows.append(ColumnSummary(name, mean, sd, n))
    return rows


# ---------------------------------------------------------------------------
# CSV and schema files

MISSING_TOKENS = ("", "NA")


def ingest_csv(path, schema: Schema) -> Dataset:
    """Read a normalized CSV into a Dataset, preserving missing values.

    Header must carry exactly the schema's feature names plus `year` and the
    outcome column; cells that are empty or "NA" become missing.
    """
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as e:
        raise IngestError(f"cannot read {path}: {e}") from None
    except Exception as e:
        raise IngestError(f"malformed CSV {path}: {e}") from None

    expected = schema.csv_columns()
    got = list(raw.columns)
    for c in got:
        if c not in expected:
            raise SchemaError(f"CSV column {c!r} not in schema")
    for c in expected:
        if c not in got:
            raise SchemaError(f"CSV is missing schema column {c!r}")

    def numeric(colname, required=False):
        s = raw[colname].str.strip()
        out = pd.to_numeric(s, errors="coerce").to_numpy(dtype=np.float64)
        missing = s.isin(MISSING_TOKENS).to_numpy()
        bad = np.isnan(out) & ~missing
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise IngestError(
                f"non-numeric value {s.iloc[i]!r} in column {colname!r} at data row {i}"
            )
        if required and missing.any():
            i = int(np.flatnonzero(missing)[0])
            raise IngestError(f"missing value in column {colname!r} at data row {i}")
        return out

    X = np.column_stack([numeric(f.name) for f in schema.features])
    outcome = numeric(schema.outcome_name)
    years = numeric(YEAR_COLUMN, required=True).astype(np.int64)
    return Dataset.from_arrays(schema, X, outcome, years, source="ingested")


def write_csv(data: Dataset, path) -> None:
    """Write a Dataset back out; missing cells become empty strings."""
    schema = data.schema
    kinds = [f.kind for f in schema.features]
    is_age = [f.name == schema.age_name for f in schema.features]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(schema.csv_columns())
        X, outcome, years = data.matrix(), data.outcome, data.years
        for i in range(len(data)):
            row = []
            for j, kind in enumerate(kinds):
                v = X[i, j]
                if np.isnan(v):
                    row.append("")
                elif kind == BINARY or is_age[j]:
                    row.append(str(int(v)))
                else:
                    row.append(repr(float(v)))
            row.append(str(int(years[i])))
            y = outcome[i]
            row.append("" if np.isnan(y) else str(int(y)))
            w.writerow(row)


def schema_to_json(schema: Schema) -> dict:
    return {
        "features": [
            {"name": f.name, "kind": f.kind, "group": f.group,
             "description": f.description}
            for f in schema.features
        ],
        "outcome": schema.outcome_name,
        "age": schema.age_name,
    }


def schema_from_json(doc: dict) -> Schema:
    feats = tuple(
        FeatureSpec(d["name"], d["kind"], d["group"], d.get("description", ""))
        for d in doc["features"]
    )
    return Schema(feats, doc.get("outcome", "flushot"), doc.get("age", "age"))


def load_schema(path) -> Schema:
    with open(path) as fh:
        return schema_from_json(json.load(fh))


def save_schema(schema: Schema, path) -> None:
    with open(path, "w") as fh:
        json.dump(schema_to_json(schema), fh, indent=1)
        fh.write("\n")


def default_schema() -> Schema:
    """The 47-predictor post-expansion schema shipped with the package."""
    doc = json.loads(resources.files("vaxcast").joinpath("schema47.json").read_text())
    return schema_from_json(doc)
