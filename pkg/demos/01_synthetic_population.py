"""Draw a survey-like population and inspect it.

Walks through the generator config that ships with the package: what the
marginals look like, how the missingness and sample restrictions interact,
and how the summary table compares to the configured prevalences.
"""

import vaxcast as vx

cfg = vx.default_config()
print(f"config: {len(cfg.features)} features, elder boundary {cfg.elder_boundary}, "
      f"seed {cfg.seed}")

pop = vx.generate(cfg, n=45_000, seed=2014, year=2014)
print(f"generated {len(pop)} records for year 2014")

# Exactly the cleaning step a real survey extract would need: drop records
# missing the outcome, education, income or marital status, in that order.
restricted, report = vx.apply_restrictions(pop)
print("\nrestriction report (first violated rule wins):")
print(f"  missing outcome    {report.excluded_missing_outcome:>6}")
print(f"  missing education  {report.excluded_missing_education:>6}")
print(f"  missing income     {report.excluded_missing_income:>6}")
print(f"  missing marital    {report.excluded_missing_marital:>6}")
print(f"  retained           {report.retained:>6}")

complete, n_dropped = restricted.drop_incomplete()
print(f"complete cases for modelling: {len(complete)} (further {n_dropped} dropped)")

print("\nsample means with standard deviations in brackets (selection):")
rows = {s.name: s for s in vx.summarize(complete)}
show = ["flushot", "female", "daily_smoker", "has_family_doctor", "diabetes",
        "arthritis", "age", "bmi", "income"]
for name in show:
    s = rows[name]
    print(f"  {name:<20} {s.mean:>10.3f}  ({s.sd:.3f})   n={s.count}")

print("\nconfigured vs realized prevalence for a few binaries:")
for name in ("female", "diabetes", "province_qc"):
    p = cfg.feature_params[name]["p"]
    print(f"  {name:<14} configured {p:.3f}  realized {rows[name].mean:.3f}")

young = complete.outcome[complete.ages <= 60].mean()
old = complete.outcome[complete.ages > 60].mean()
print(f"\nvaccination rate: {young:.3f} at or below 60, {old:.3f} above 60")
print("the generating process shifts the latent index above age 60, which is")
print("what the age-split experiments later go looking for")
