"""Flu-vaccination screening pipeline.

Estimate a probit model on survey microdata, rank and select predictors,
train age-split random-forest experts, and assign the two promotion
policies -- all validated against a synthetic population generator with a
known ground truth.
"""

from .data_model import (BINARY, CONTINUOUS, ColumnSummary, Dataset,
                         FeatureSpec, Record, RestrictionReport, Schema,
                         apply_restrictions, concat, default_schema,
                         ingest_csv, load_schema, save_schema, summarize,
                         write_csv)
from .errors import (CalibrationError, ConfigError, EvaluationError, FitError,
                     IngestError, PipelineError, SchemaError, SeparationError,
                     VaxcastError)
from .evaluation import (ConfusionMatrix, MetricsReport, auc_from_scores,
                         confusion, evaluate_predictions, metrics, roc_points)
from .forest import (Forest, ForestConfig, NaiveBayesModel, TreeNode,
                     load_forest, predict, predict_batch, predict_nb,
                     predict_nb_batch, save_forest, train_forest,
                     train_naive_bayes, train_tree, tree_rng)
from .pipeline import (CompositeModel, PolicyAssignment, SplitSearchResult,
                       assign_policy, assign_policy_batch, load_composite,
                       predict_composite, predict_composite_batch,
                       save_composite, split_search, train_composite)
from .probit import (EliminationLog, GroupTest, ProbitFit, TermStats,
                     eliminate_groups, fit, group_test, marginal_effects,
                     norm_cdf, norm_pdf, norm_ppf)
from .selection import (CurvePoint, FeatureRanking, entropy, incremental_eval,
                        rank)
from .synth import (GeneratorConfig, calibrate_to_targets, default_config,
                    generate, load_config, save_config, simulated_ame,
                    table_effects_config, true_probabilities, uniform_decades)

__version__ = "0.1.0"
