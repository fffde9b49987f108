"""Command-line front end.

One binary with subcommands: generate, fit, rank, curve, train, split-search,
train-composite, evaluate, predict. Every randomized command takes an
explicit seed (generate's may come from the config file); reports embed the
resolved configuration so a run can be reproduced from its outputs alone.
Errors print a single machine-parsable line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__, data_model, evaluation, forest, pipeline, probit
from . import selection, synth
from .errors import VaxcastError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"vaxcast: error: [cli] {message}", file=sys.stderr)
        sys.exit(2)


def _load_schema(arg):
    if arg in (None, "default"):
        return data_model.default_schema()
    return data_model.load_schema(arg)


def _load_gen_config(arg):
    if arg == "default":
        return synth.default_config()
    if arg == "effects":
        return synth.table_effects_config()
    return synth.load_config(arg)


def _load_data(paths_arg, schema, restrict=True, require_outcome=True):
    """Ingest one or more comma-separated CSVs, pool them, clean them."""
    parts = [data_model.ingest_csv(p, schema) for p in paths_arg.split(",")]
    data = parts[0] if len(parts) == 1 else data_model.concat(parts)
    report = None
    if restrict:
        try:
            data, report = data_model.apply_restrictions(data)
        except VaxcastError:
            report = None  # reduced schemas without the restriction columns
        data, _ = data.drop_incomplete(require_outcome=require_outcome)
    return data, report


def _forest_config(args) -> forest.ForestConfig:
    mtry = args.mtry
    if mtry not in ("sqrt", "all"):
        try:
            mtry = int(mtry)
        except ValueError:
            raise VaxcastError(
                f"--mtry must be 'sqrt', 'all' or a count, got {mtry!r}"
            ) from None
    return forest.ForestConfig(
        n_trees=args.trees,
        max_depth=args.depth,
        features_per_split=mtry,
        bagging=not args.no_bagging,
        seed=args.seed,
    )


def _provenance(command, args) -> dict:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {"command": command, "version": __version__, "args": resolved}


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _restriction_dict(rep):
    if rep is None:
        return None
    return {
        "excluded_missing_outcome": rep.excluded_missing_outcome,
        "excluded_missing_education": rep.excluded_missing_education,
        "excluded_missing_income": rep.excluded_missing_income,
        "excluded_missing_marital": rep.excluded_missing_marital,
        "retained": rep.retained,
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_generate(args):
    config = _load_gen_config(args.config)
    data = synth.generate(config, n=args.n, seed=args.seed, year=args.year)
    data_model.write_csv(data, args.out)
    print(f"wrote {len(data)} records to {args.out}")
    return 0


def cmd_fit(args):
    schema = _load_schema(args.schema)
    data, restriction = _load_data(args.data, schema)
    terms = args.terms.split(",") if args.terms else list(schema.names)

    doc = {"provenance": _provenance("fit", args),
           "restrictions": _restriction_dict(restriction),
           "n_used": len(data)}
    if args.eliminate:
        result, log = probit.eliminate_groups(data, schema,
                                              max_rounds=args.max_rounds)
        doc["elimination"] = {
            "initial_pseudo_r2": log.initial_pseudo_r2,
            "final_pseudo_r2": log.final_pseudo_r2,
            "surviving_groups": log.surviving_groups,
            "rounds": [
                {
                    "round": r.round,
                    "pseudo_r2": r.pseudo_r2,
                    "dropped": r.dropped,
                    "tests": [_group_test_dict(t) for t in r.tests],
                }
                for r in log.rounds
            ],
        }
        terms = result.term_order[1:]
    else:
        result = probit.fit(data, terms)

    doc["fit"] = {
        "coefficients": result.coefficients,
        "term_order": result.term_order,
        "covariance": result.covariance.tolist(),
        "log_likelihood": result.log_likelihood,
        "null_log_likelihood": result.null_log_likelihood,
        "pseudo_r2": result.pseudo_r2,
        "n_used": result.n_used,
        "converged": result.converged,
        "iterations": result.iterations,
    }
    doc["term_stats"] = [
        {
            "term": t.term, "estimate": t.estimate, "std_error": t.std_error,
            "t_stat": t.t_stat, "ame": t.ame, "ame_std_error": t.ame_std_error,
            "ame_significant_at": t.ame_significant_at,
        }
        for t in probit.marginal_effects(result, data)
    ]
    groups = {g: [t for t in members if t in terms]
              for g, members in schema.groups().items()}
    doc["group_tests"] = [
        _group_test_dict(probit.group_test(result, members, group=g))
        for g, members in groups.items() if members
    ]
    _write_json(args.out, doc)
    print(f"fit written to {args.out} (pseudo R2 {result.pseudo_r2:.4f})")
    return 0


def _group_test_dict(t):
    return {"group": t.group, "terms": t.terms, "chi2_stat": t.chi2_stat,
            "df": t.df, "p_value": t.p_value,
            "reject_at_5pct": t.reject_at_5pct}


def cmd_rank(args):
    schema = _load_schema(args.schema)
    data, _ = _load_data(args.data, schema)
    methods = selection.METHODS if args.method == "all" else (args.method,)
    doc = {"provenance": _provenance("rank", args), "rankings": {}}
    for m in methods:
        r = selection.rank(data, method=m)
        doc["rankings"][m] = {"scores": r.scores, "order": r.order}
    _write_json(args.out, doc)
    print(f"rankings ({', '.join(methods)}) written to {args.out}")
    return 0


def cmd_curve(args):
    schema = _load_schema(args.schema)
    train, _ = _load_data(args.train, schema)
    test, _ = _load_data(args.test, schema)
    with open(args.ranks) as fh:
        ranks_doc = json.load(fh)
    if args.method not in ranks_doc["rankings"]:
        raise VaxcastError(f"ranking method {args.method!r} not in {args.ranks}")
    ranking = selection.FeatureRanking(
        method=args.method,
        scores=ranks_doc["rankings"][args.method]["scores"],
        order=ranks_doc["rankings"][args.method]["order"],
    )
    steps = [int(s) for s in args.steps.split(",")]
    trainer = "naive_bayes" if args.classifier == "naive_bayes" \
        else _forest_config(args)
    if args.classifier == "tree":
        trainer = forest.ForestConfig(n_trees=1, max_depth=args.depth,
                                      features_per_split="all", bagging=False,
                                      seed=args.seed)
    curve = selection.incremental_eval(train, test, ranking, steps, trainer)
    doc = {"provenance": _provenance("curve", args),
           "curve": [
               {"n_features": p.n_features, "features": p.features,
                "ppv": p.ppv, "npv": p.npv, "acc": p.acc, "auc": p.auc}
               for p in curve
           ]}
    _write_json(args.out, doc)
    print(f"evaluation curve written to {args.out}")
    return 0


def cmd_train(args):
    schema = _load_schema(args.schema)
    data, _ = _load_data(args.data, schema)
    model = forest.train_forest(data, config=_forest_config(args))
    forest.save_forest(model, args.out)
    print(f"forest ({model.config.n_trees} trees) written to {args.out}")
    return 0


def cmd_split_search(args):
    schema = _load_schema(args.schema)
    train, _ = _load_data(args.train, schema)
    test, _ = _load_data(args.test, schema)
    grid = [int(g) for g in args.grid.split(",")]
    result = pipeline.split_search(train, test, grid, _forest_config(args))
    for b, reason in result.skipped:
        print(f"vaxcast: warning: boundary {b} skipped ({reason})",
              file=sys.stderr)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["boundary", "young_ppv", "old_npv", "young_n", "old_n"])
        for b in grid:
            m = result.per_boundary.get(b)
            if m is None:
                continue
            w.writerow([b,
                        "" if m.young_ppv is None else repr(m.young_ppv),
                        "" if m.old_npv is None else repr(m.old_npv),
                        m.young_n, m.old_n])
    print(f"chosen boundary: {result.chosen_boundary} (curve in {args.out})")
    return 0


def cmd_train_composite(args):
    schema = _load_schema(args.schema)
    train, _ = _load_data(args.train, schema)
    model = pipeline.train_composite(train, boundary=args.boundary,
                                     config=_forest_config(args),
                                     young_on_subset=args.young_on_subset)
    pipeline.save_composite(model, args.out)
    print(f"composite model (boundary {model.boundary}) written to {args.out}")
    return 0


def _load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") == "composite":
        return pipeline.composite_from_json(doc)
    return forest.forest_from_json(doc)


def cmd_evaluate(args):
    schema = _load_schema(args.schema)
    data, _ = _load_data(args.data, schema)
    model = _load_model(args.model)
    if isinstance(model, pipeline.CompositeModel):
        pred, scores, _ = pipeline.predict_composite_batch(model, data)
    else:
        pred, scores = forest.predict_batch(model, data)
    report = evaluation.evaluate_predictions(pred, data.outcome, scores)
    doc = {
        "provenance": _provenance("evaluate", args),
        "metrics": {"ppv": report.ppv, "npv": report.npv, "acc": report.acc,
                    "auc": report.auc},
        "matrix": {"tp": report.matrix.tp, "fp": report.matrix.fp,
                   "tn": report.matrix.tn, "fn": report.matrix.fn},
        "n": report.n,
    }
    _write_json(args.report, doc)
    if args.roc_points:
        with open(args.roc_points, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["threshold", "tpr", "fpr"])
            for row in evaluation.roc_points(scores, data.outcome):
                w.writerow([repr(v) for v in row])
    ppv = "n/a" if report.ppv is None else f"{report.ppv:.4f}"
    npv = "n/a" if report.npv is None else f"{report.npv:.4f}"
    print(f"ppv={ppv} npv={npv} acc={report.acc:.4f} -> {args.report}")
    return 0


def cmd_predict(args):
    schema = _load_schema(args.schema)
    data, _ = _load_data(args.data, schema, restrict=False)
    if args.drop_incomplete:
        data, _ = data.drop_incomplete(require_outcome=False)
    model = _load_model(args.model)
    if args.policies and not isinstance(model, pipeline.CompositeModel):
        raise VaxcastError("--policies needs a composite model")
    if isinstance(model, pipeline.CompositeModel):
        policies, pred, scores, experts = pipeline.assign_policy_batch(model, data)
    else:
        pred, scores = forest.predict_batch(model, data)
        policies = experts = None
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["row", "age", "year", "predicted", "score"]
        if experts is not None:
            header.append("expert")
        if args.policies:
            header.append("policy")
        w.writerow(header)
        ages, years = data.ages, data.years
        for i in range(len(data)):
            row = [i, int(ages[i]), int(years[i]), int(pred[i]),
                   repr(float(scores[i]))]
            if experts is not None:
                row.append(experts[i])
            if args.policies:
                row.append(policies[i])
            w.writerow(row)
    print(f"{len(data)} predictions written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# wiring

def _add_forest_flags(p, seed_required=True):
    p.add_argument("--trees", type=int, default=25)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--mtry", default="sqrt",
                   help="features per split: sqrt, all, or a count")
    p.add_argument("--no-bagging", action="store_true")
    p.add_argument("--seed", type=int, required=seed_required)


def build_parser() -> _Parser:
    parser = _Parser(prog="vaxcast", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="draw a synthetic survey population")
    p.add_argument("--config", required=True,
                   help="generator JSON, or 'default' / 'effects'")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--year", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="probit fit with tests and marginal effects")
    p.add_argument("--data", required=True, help="CSV path(s), comma separated")
    p.add_argument("--schema", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--terms", default=None)
    p.add_argument("--eliminate", action="store_true",
                   help="run iterative group elimination")
    p.add_argument("--max-rounds", type=int, default=4)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rank", help="attribute rankings")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--method", default="all",
                   choices=("all",) + selection.METHODS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("curve", help="incremental feature-prefix evaluation")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--ranks", required=True)
    p.add_argument("--method", default="info_gain")
    p.add_argument("--steps", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--classifier", default="forest",
                   choices=("forest", "naive_bayes", "tree"))
    _add_forest_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("train", help="train a random forest")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--out", required=True)
    _add_forest_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("split-search", help="age-boundary sweep")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True)
    _add_forest_flags(p)
    p.set_defaults(func=cmd_split_search)

    p = sub.add_parser("train-composite", help="train the two-expert model")
    p.add_argument("--train", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--boundary", type=int, default=60)
    p.add_argument("--out", required=True)
    p.add_argument("--young-on-subset", action="store_true")
    _add_forest_flags(p)
    p.set_defaults(func=cmd_train_composite)

    p = sub.add_parser("evaluate", help="score a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--report", required=True)
    p.add_argument("--roc-points", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="predictions and policy assignments")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--policies", action="store_true")
    p.add_argument("--drop-incomplete", action="store_true",
                   help="silently drop rows with missing values")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VaxcastError as e:
        print(f"vaxcast: error: [{e.module}] {e.message}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as e:
        # malformed files and arguments still get the one-line contract
        msg = str(e).replace("\n", "; ")
        print(f"vaxcast: error: [cli] {e.__class__.__name__}: {msg}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
