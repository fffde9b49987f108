"""The deployment model: age-routed experts and the two promotion policies.

Trains the composite (young expert on everything, old expert on seniors
only), verifies it against the known optimum of the generating process, and
tallies the policy assignments a health authority would act on.
"""

import numpy as np

import vaxcast as vx

from population_with_planted_boundary import planted_config

cfg = planted_config()
years = [vx.generate(cfg, n=30_000, seed=2000 + k, year=2009 + k)
         for k in range(5)]
train = vx.concat(years)
test = vx.generate(cfg, n=30_000, seed=2099, year=2014)

model = vx.train_composite(
    train, boundary=60,
    config=vx.ForestConfig(n_trees=25, max_depth=12, seed=9))
print(f"composite: boundary {model.boundary}, young expert trained on "
      f"{model.young_trained_on} data")

classes, scores, experts = vx.predict_composite_batch(model, test)
acc = np.mean(classes == test.outcome)
p = vx.true_probabilities(cfg, test)
bayes = np.mean(np.maximum(p, 1 - p))
print(f"held-out accuracy {acc:.4f} vs best achievable {bayes:.4f} "
      f"(gap {bayes - acc:+.4f})")

young = test.ages <= 60
young_rep = vx.evaluate_predictions(classes[young], test.outcome[young],
                                    scores[young])
old_rep = vx.evaluate_predictions(classes[~young], test.outcome[~young],
                                  scores[~young])
print(f"young side: ppv={young_rep.ppv:.3f} (who is already vaccinated)")
print(f"old side:   npv={old_rep.npv:.3f} (who still needs a shot)")

policies, _, _, _ = vx.assign_policy_batch(model, test)
print("\npolicy assignments over the held-out year:")
for policy, action in (
    ("policy1_target", "target senior directly with promotion"),
    ("policy2_no_promotion", "skip: likely already vaccinated"),
    ("policy2_community_pool", "reach through community-wide promotion"),
):
    n = int((policies == policy).sum())
    print(f"  {policy:<24} {n:>6}  {action}")

record = test.record(0)
assignment = vx.assign_policy(model, record)
print(f"\nexample record: age {record.age} -> {assignment.policy} "
      f"{assignment.rationale}")
