"""A compact two-regime generator shared by the age-split demos.

Twelve balanced binary predictors plus age. At or below 60 the first six
carry the signal; above 60 they flip direction and the other six activate,
with the intercept recentred so both bands keep a one-half base rate. The
switch is the structure the boundary search is supposed to recover.
"""

import vaxcast as vx
from vaxcast.data_model import FeatureSpec


def planted_config(beta=0.65, reversal=1.3):
    feats = tuple([FeatureSpec(f"x{i}", "binary", "g") for i in range(12)]
                  + [FeatureSpec("age", "continuous", "demographics")])
    params = {f"x{i}": {"p": 0.5} for i in range(12)}
    coefs = {"intercept": -3 * beta}
    shift = {"intercept": 3 * reversal * beta}
    for i in range(6):
        coefs[f"x{i}"] = beta
        shift[f"x{i}"] = -(1.0 + reversal) * beta
        shift[f"x{i + 6}"] = beta
    return vx.GeneratorConfig(
        n=50_000, year=2009, seed=0, features=feats, feature_params=params,
        latent_coefficients=coefs,
        age_distribution=vx.uniform_decades(
            weights=[0.06, 0.08, 0.12, 0.22, 0.28, 0.16, 0.08]),
        elder_shift=shift, elder_boundary=60,
    )
