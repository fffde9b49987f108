"""Synthetic survey populations from a probit ground-truth process.

Each record draws its features independently from configured marginals, then
the binary outcome is 1 iff the latent index (intercept + sum of coefficient
times feature, plus an elder shift above the age boundary) plus standard
normal noise is positive. Because features are independent, the optimal
classifier and every marginal effect are available in closed form, which is
what the downstream acceptance tests lean on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np
from scipy.special import ndtr

from .data_model import BINARY, Dataset, FeatureSpec, Schema
from .errors import CalibrationError, ConfigError

INTERCEPT = "intercept"


@dataclass
class GeneratorConfig:
    """Ground-truth process parameters for one synthetic survey year."""

    n: int
    year: int
    seed: int
    features: tuple[FeatureSpec, ...]
    feature_params: dict
    latent_coefficients: dict
    age_distribution: dict
    elder_shift: dict = field(default_factory=dict)
    elder_boundary: int = 60
    missingness: dict = field(default_factory=dict)
    outcome_name: str = "flushot"
    age_name: str = "age"

    def schema(self) -> Schema:
        return Schema(tuple(self.features), self.outcome_name, self.age_name)

    def validate(self) -> None:
        names = {f.name for f in self.features}
        if INTERCEPT not in self.latent_coefficients:
            raise ConfigError("latent_coefficients must include an intercept")
        for key in self.latent_coefficients:
            if key != INTERCEPT and key not in names:
                raise ConfigError(f"latent coefficient for unknown feature {key!r}")
        for key in self.elder_shift:
            if key != INTERCEPT and key not in names:
                raise ConfigError(f"elder shift for unknown feature {key!r}")
        for f in self.features:
            if f.name == self.age_name:
                continue
            p = self.feature_params.get(f.name)
            if p is None:
                raise ConfigError(f"no distribution for feature {f.name!r}")
            if f.kind == BINARY:
                if not 0.0 <= p["p"] <= 1.0:
                    raise ConfigError(f"Bernoulli p for {f.name!r} outside [0, 1]")
            else:
                if p["sd"] <= 0 or p["min"] > p["max"]:
                    raise ConfigError(f"bad continuous parameters for {f.name!r}")
        ages = np.asarray(self.age_distribution["ages"], dtype=np.int64)
        probs = np.asarray(self.age_distribution["probs"], dtype=np.float64)
        if ages.shape != probs.shape or not np.isclose(probs.sum(), 1.0):
            raise ConfigError("age distribution probabilities must sum to 1")
        if (probs < 0).any():
            raise ConfigError("negative age probability")
        for col, rate in self.missingness.items():
            if col not in names and col != self.outcome_name:
                raise ConfigError(f"missingness rate for unknown column {col!r}")
            if col == self.age_name:
                raise ConfigError("age cannot be missing; records need it to route")
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"missingness rate for {col!r} outside [0, 1]")


def uniform_decades(lo: int = 18, hi: int = 90, weights=None) -> dict:
    """Age distribution: pick a decade band, then a uniform age inside it."""
    if not 12 <= lo <= 29 or not 80 <= hi <= 110:
        raise ConfigError("decade bands need lo in [12, 29] and hi in [80, 110]")
    bands = [(lo, 29), (30, 39), (40, 49), (50, 59), (60, 69), (70, 79), (80, hi)]
    if weights is None:
        weights = [1.0 / len(bands)] * len(bands)
    if len(weights) != len(bands):
        raise ConfigError(f"expected {len(bands)} decade weights")
    ages, probs = [], []
    for (a, b), w in zip(bands, weights):
        span = b - a + 1
        for age in range(a, b + 1):
            ages.append(age)
            probs.append(w / span)
    probs = np.asarray(probs)
    probs = probs / probs.sum()
    return {"ages": ages, "probs": probs.tolist()}


def generate(config: GeneratorConfig, n: int | None = None,
             seed: int | None = None, year: int | None = None) -> Dataset:
    """Draw a synthetic population. Deterministic for a given (config, seed)."""
    config.validate()
    n = config.n if n is None else n
    seed = config.seed if seed is None else seed
    year = config.year if year is None else year
    if n <= 0:
        raise ConfigError("record count must be positive")

    rng = np.random.default_rng(seed)
    schema = config.schema()
    F = len(schema.features)
    X = np.empty((n, F))

    ages = rng.choice(np.asarray(config.age_distribution["ages"], dtype=np.int64),
                      size=n, p=np.asarray(config.age_distribution["probs"]))
    for j, f in enumerate(schema.features):
        if f.name == config.age_name:
            X[:, j] = ages
            continue
        p = config.feature_params[f.name]
        if f.kind == BINARY:
            X[:, j] = (rng.random(n) < p["p"]).astype(np.float64)
        else:
            draw = rng.normal(p["mean"], p["sd"], size=n)
            step = p.get("step")
            if step:
                draw = np.round(draw / step) * step
            X[:, j] = np.clip(draw, p["min"], p["max"])

    index = _latent_index(config, schema, X, ages)
    eps = rng.standard_normal(n)
    outcome = (index + eps > 0).astype(np.float64)

    # missingness last, in schema order then outcome
    for f in schema.features:
        rate = config.missingness.get(f.name, 0.0)
        if rate > 0:
            X[:, schema.index(f.name)][rng.random(n) < rate] = np.nan
    rate = config.missingness.get(config.outcome_name, 0.0)
    if rate > 0:
        outcome[rng.random(n) < rate] = np.nan

    years = np.full(n, year, dtype=np.int64)
    return Dataset.from_arrays(schema, X, outcome, years, source="synthetic")


def _latent_index(config, schema, X, ages):
    beta = np.zeros(len(schema.features))
    for name, b in config.latent_coefficients.items():
        if name != INTERCEPT:
            beta[schema.index(name)] = b
    index = X @ beta + config.latent_coefficients[INTERCEPT]
    if config.elder_shift:
        shift = np.zeros(len(schema.features))
        base = 0.0
        for name, s in config.elder_shift.items():
            if name == INTERCEPT:
                base = s
            else:
                shift[schema.index(name)] = s
        index = index + (ages > config.elder_boundary) * (X @ shift + base)
    return index


def true_probabilities(config: GeneratorConfig, data: Dataset) -> np.ndarray:
    """P(outcome=1 | features) under the generating process, per record."""
    schema = data.schema
    return ndtr(_latent_index(config, schema, data.matrix(), data.ages))


# ---------------------------------------------------------------------------
# calibration

def simulated_ame(config: GeneratorConfig, name: str, X=None, ages=None,
                  n: int = 200_000, seed: int = 12345) -> float:
    """True average marginal effect of a binary feature under the process."""
    schema = config.schema()
    if X is None:
        X, ages = _feature_draw(config, schema, n, seed)
    xj = X[:, schema.index(name)]
    coef = config.latent_coefficients.get(name, 0.0)
    elder = config.elder_shift.get(name, 0.0)
    if elder:
        coef = coef + elder * (ages > config.elder_boundary)
    idx = _latent_index(config, schema, X, ages)
    # switching x_j moves the index by its effective coefficient
    p1 = ndtr(idx + (1.0 - xj) * coef)
    p0 = ndtr(idx - xj * coef)
    return float(np.mean(p1 - p0))


def _feature_draw(config, schema, n, seed):
    """Features-only draw used as common random numbers by the calibrator."""
    rng = np.random.default_rng(seed)
    F = len(schema.features)
    X = np.empty((n, F))
    ages = rng.choice(np.asarray(config.age_distribution["ages"], dtype=np.int64),
                      size=n, p=np.asarray(config.age_distribution["probs"]))
    for j, f in enumerate(schema.features):
        if f.name == config.age_name:
            X[:, j] = ages
            continue
        p = config.feature_params[f.name]
        if f.kind == BINARY:
            X[:, j] = (rng.random(n) < p["p"]).astype(np.float64)
        else:
            draw = rng.normal(p["mean"], p["sd"], size=n)
            step = p.get("step")
            if step:
                draw = np.round(draw / step) * step
            X[:, j] = np.clip(draw, p["min"], p["max"])
    return X, ages


def calibrate_to_targets(targets: dict, base: GeneratorConfig, n: int = 200_000,
                         tol: float = 0.001, max_rounds: int = 60,
                         prevalence_target: float | None = None,
                         seed: int = 977_001) -> GeneratorConfig:
    """Find latent coefficients whose simulated AMEs match the targets.

    Coordinate bisection over one fixed feature draw (common random numbers):
    the AME of a feature is monotone in its own coefficient with the others
    held fixed, so each coordinate solve is a plain bisection. Rounds repeat
    until every target is met because coefficients interact through the index
    distribution. A fresh draw verifies the result before returning.
    """
    base.validate()
    schema = base.schema()
    for name in targets:
        if schema.feature(name).kind != BINARY:
            raise CalibrationError(f"calibration target {name!r} is not binary")

    config = replace(base, latent_coefficients=dict(base.latent_coefficients))
    X, ages = _feature_draw(config, schema, n, seed)
    elder_mask = ages > config.elder_boundary
    beta = config.latent_coefficients

    def ame(name):
        return simulated_ame(config, name, X=X, ages=ages)

    for _ in range(max_rounds):
        for name, target in targets.items():
            elder = config.elder_shift.get(name, 0.0)
            if target == 0.0 and elder == 0.0:
                beta[name] = 0.0
                continue
            xj = X[:, schema.index(name)]
            coef = beta.get(name, 0.0) + elder * elder_mask
            idx_other = _latent_index(config, schema, X, ages) - xj * coef
            p0 = ndtr(idx_other)
            lo, hi = -8.0, 8.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                got = float(np.mean(ndtr(idx_other + mid + elder * elder_mask) - p0))
                if got < target:
                    lo = mid
                else:
                    hi = mid
            beta[name] = 0.5 * (lo + hi)
        if prevalence_target is not None:
            idx_rest = (_latent_index(config, schema, X, ages) - beta[INTERCEPT])
            lo, hi = -8.0, 8.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if float(np.mean(ndtr(idx_rest + mid))) < prevalence_target:
                    lo = mid
                else:
                    hi = mid
            beta[INTERCEPT] = 0.5 * (lo + hi)
        worst = max(abs(ame(name) - t) for name, t in targets.items())
        if worst <= tol:
            break
    else:
        errs = {name: abs(ame(name) - t) for name, t in targets.items()}
        bad = max(errs, key=errs.get)
        raise CalibrationError(
            f"calibration did not converge; worst feature {bad!r} "
            f"off by {errs[bad]:.4f}"
        )

    # independent verification on a fresh draw
    Xv, agesv = _feature_draw(config, schema, max(n, 200_000), seed + 1)
    for name, target in targets.items():
        got = simulated_ame(config, name, X=Xv, ages=agesv)
        if abs(got - target) > 0.01:
            raise CalibrationError(
                f"verification failed for {name!r}: AME {got:.4f} vs target {target:.4f}"
            )
    return config


# ---------------------------------------------------------------------------
# JSON round-trip and shipped configs

def config_to_json(config: GeneratorConfig) -> dict:
    return {
        "n": config.n,
        "year": config.year,
        "seed": config.seed,
        "features": [
            {"name": f.name, "kind": f.kind, "group": f.group,
             "description": f.description}
            for f in config.features
        ],
        "feature_params": config.feature_params,
        "latent_coefficients": config.latent_coefficients,
        "age_distribution": config.age_distribution,
        "elder_shift": config.elder_shift,
        "elder_boundary": config.elder_boundary,
        "missingness": config.missingness,
        "outcome": config.outcome_name,
        "age": config.age_name,
    }


def config_from_json(doc: dict) -> GeneratorConfig:
    feats = tuple(
        FeatureSpec(d["name"], d["kind"], d["group"], d.get("description", ""))
        for d in doc["features"]
    )
    return GeneratorConfig(
        n=doc["n"], year=doc["year"], seed=doc["seed"], features=feats,
        feature_params=doc["feature_params"],
        latent_coefficients=doc["latent_coefficients"],
        age_distribution=doc["age_distribution"],
        elder_shift=doc.get("elder_shift", {}),
        elder_boundary=doc.get("elder_boundary", 60),
        missingness=doc.get("missingness", {}),
        outcome_name=doc.get("outcome", "flushot"),
        age_name=doc.get("age", "age"),
    )


def load_config(path) -> GeneratorConfig:
    with open(path) as fh:
        return config_from_json(json.load(fh))


def save_config(config: GeneratorConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_json(config), fh, indent=1)
        fh.write("\n")


def default_config() -> GeneratorConfig:
    """Calibrated 47-feature population shipped with the package."""
    doc = json.loads(resources.files("vaxcast").joinpath("default_gen.json").read_text())
    return config_from_json(doc)


def table_effects_config() -> GeneratorConfig:
    """Balanced-prevalence population calibrated to the published effect sizes."""
    doc = json.loads(resources.files("vaxcast").joinpath("effects_gen.json").read_text())
    return config_from_json(doc)
