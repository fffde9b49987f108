import pytest

import vaxcast as vx
from vaxcast.data_model import FeatureSpec


def binary_features(n, group="g", prefix="x"):
    return [FeatureSpec(f"{prefix}{i}", "binary", group) for i in range(n)]


def simple_config(n=5000, seed=7, coefs=None, p=0.5, n_features=4,
                  elder_shift=None, missingness=None, groups=None):
    """Small all-binary generator config plus the mandatory age column."""
    if groups is None:
        feats = binary_features(n_features)
    else:
        feats = [FeatureSpec(f"x{i}", "binary", g)
                 for i, g in enumerate(groups)]
    feats = tuple(feats + [FeatureSpec("age", "continuous", "demographics")])
    params = {f.name: {"p": p} for f in feats if f.name != "age"}
    latent = {"intercept": 0.0}
    latent.update(coefs or {})
    return vx.GeneratorConfig(
        n=n, year=2012, seed=seed, features=feats, feature_params=params,
        latent_coefficients=latent, age_distribution=vx.uniform_decades(),
        elder_shift=elder_shift or {}, missingness=missingness or {},
    )


def planted_boundary_config():
    """Two-regime process switching at age 60.

    Young signal lives on x0..x5; above 60 those six flip direction and
    x6..x11 carry the signal instead, with the intercept recentred so both
    bands keep a one-half base rate. Mass is concentrated around the
    boundary so contaminated subsets pay a visible price.
    """
    beta, rev = 0.65, 1.3
    feats = tuple(binary_features(12)
                  + [FeatureSpec("age", "continuous", "demographics")])
    params = {f"x{i}": {"p": 0.5} for i in range(12)}
    coefs = {"intercept": -3 * beta}
    shift = {"intercept": 3 * rev * beta}
    for i in range(6):
        coefs[f"x{i}"] = beta
        shift[f"x{i}"] = -(1.0 + rev) * beta
        shift[f"x{i + 6}"] = beta
    return vx.GeneratorConfig(
        n=50000, year=2009, seed=0, features=feats, feature_params=params,
        latent_coefficients=coefs,
        age_distribution=vx.uniform_decades(
            weights=[0.06, 0.08, 0.12, 0.22, 0.28, 0.16, 0.08]),
        elder_shift=shift, elder_boundary=60,
    )


def planted_population(seed, n_train_per_year=50000, n_test=45000):
    cfg = planted_boundary_config()
    years = [vx.generate(cfg, n=n_train_per_year, seed=seed * 1000 + k,
                         year=2009 + k) for k in range(5)]
    train = vx.concat(years)
    test = vx.generate(cfg, n=n_test, seed=seed * 1000 + 99, year=2014)
    return cfg, train, test


@pytest.fixture(scope="session")
def default_cfg():
    return vx.default_config()


@pytest.fixture(scope="session")
def effects_cfg():
    return vx.table_effects_config()


@pytest.fixture(scope="session")
def small_default_pop(default_cfg):
    """Restricted, complete-case draw from the shipped population."""
    data = vx.generate(default_cfg, n=20000, seed=1234, year=2012)
    data, _ = vx.apply_restrictions(data)
    data, _ = data.drop_incomplete()
    return data
