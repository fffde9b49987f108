"""Probit screening: estimation, marginal effects, and group elimination.

Fits the vaccination outcome on all 47 predictors, reports the largest
average marginal effects with significance stars, runs joint group tests,
and then lets the iterative elimination loose on a model that also carries
planted noise variables.
"""

import numpy as np

import vaxcast as vx
from vaxcast.data_model import FeatureSpec

cfg = vx.default_config()
years = [vx.generate(cfg, n=15_000, seed=100 + k, year=2009 + k)
         for k in range(4)]
data, _ = vx.apply_restrictions(vx.concat(years))
data, _ = data.drop_incomplete()
print(f"estimation sample: {len(data)} records")

fit = vx.fit(data, list(data.schema.names))
print(f"converged in {fit.iterations} Newton iterations, "
      f"pseudo R2 {fit.pseudo_r2:.4f}")

stats = vx.marginal_effects(fit, data)
stars = {"1%": "***", "5%": "**", "10%": "*", "none": ""}
print("\nlargest marginal effects on the probability of vaccination:")
for t in sorted(stats, key=lambda t: -abs(t.ame))[:12]:
    direction = "more" if t.ame > 0 else "less"
    print(f"  {t.term:<24} {abs(t.ame)*100:5.2f}% {direction} likely"
          f"{stars[t.ame_significant_at]}")

print("\njoint group significance (Wald):")
for group, members in data.schema.groups().items():
    g = vx.group_test(fit, members, group=group)
    flag = "keep" if g.reject_at_5pct else "DROP"
    print(f"  {group:<14} chi2={g.chi2_stat:9.1f} df={g.df:>2} "
          f"p={g.p_value:.2e}  -> {flag}")

# Add three pure-noise variables in their own group and let the iterative
# elimination find them.
rng = np.random.default_rng(0)
noise_names = [f"noise_{i}" for i in range(3)]
feats = tuple(list(data.schema.features)
              + [FeatureSpec(n, "binary", "noise") for n in noise_names])
X = np.column_stack([data.matrix()]
                    + [(rng.random(len(data)) < 0.5).astype(float)
                       for _ in noise_names])
noisy = vx.Dataset.from_arrays(
    vx.Schema(feats), X, data.outcome.copy(), data.years.copy())

final, log = vx.eliminate_groups(noisy, noisy.schema)
print(f"\nelimination: pseudo R2 {log.initial_pseudo_r2:.4f} -> "
      f"{log.final_pseudo_r2:.4f} over {len(log.rounds)} round(s)")
for r in log.rounds:
    print(f"  round {r.round}: dropped {r.dropped or 'nothing'}")
print(f"surviving groups: {log.surviving_groups}")
