"""Probit maximum likelihood with inference and marginal effects.

Newton-Raphson with step-halving on the exact (observed) Hessian, which for
the probit log-likelihood is negative semi-definite everywhere, so accepted
steps can only improve the likelihood. Covariance is the inverse negative
Hessian at the optimum; joint group tests are Wald by default with a
likelihood-ratio cross-check available.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri
from scipy.stats import chi2 as chi2_dist

from .data_model import BINARY, Dataset, Schema
from .errors import FitError, SeparationError

MAX_ITER = 100
LL_TOL = 1e-8
MAX_HALVINGS = 30
SEPARATION_INDEX = 30.0

_Z_CRITICAL = {"1%": ndtri(0.995), "5%": ndtri(0.975), "10%": ndtri(0.95)}


def norm_cdf(x):
    """Standard normal CDF, accurate to better than 1e-12 absolute."""
    return ndtr(x)


def norm_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)


def norm_ppf(p):
    return ndtri(p)


def log_likelihood(X, y, beta) -> float:
    """Bernoulli-probit log-likelihood at the given coefficient vector."""
    eta = X @ beta
    return float(np.sum(y * log_ndtr(eta) + (1.0 - y) * log_ndtr(-eta)))


def score(X, y, beta) -> np.ndarray:
    """Analytic gradient of the log-likelihood."""
    eta = X @ beta
    lam = _score_factor(y, eta)
    return X.T @ lam


def hessian(X, y, beta) -> np.ndarray:
    """Exact second derivative matrix (negative semi-definite)."""
    eta = X @ beta
    lam = _score_factor(y, eta)
    # lam*(lam + eta) >= 0 for both outcome values, so -X'WX is NSD
    w = lam * (lam + eta)
    return -(X * w[:, None]).T @ X


def _score_factor(y, eta):
    # y=1: phi/Phi evaluated at eta; y=0: -phi/(1-Phi) = -phi(-eta's mills)
    log_phi = -0.5 * eta * eta - 0.5 * np.log(2.0 * np.pi)
    mills_pos = np.exp(log_phi - log_ndtr(eta))
    mills_neg = np.exp(log_phi - log_ndtr(-eta))
    return np.where(y == 1.0, mills_pos, -mills_neg)


@dataclass
class ProbitFit:
    """Estimated coefficients with covariance and fit statistics."""

    coefficients: dict
    covariance: np.ndarray
    term_order: list
    log_likelihood: float
    null_log_likelihood: float
    pseudo_r2: float
    n_used: int
    converged: bool
    iterations: int

    def beta(self) -> np.ndarray:
        return np.array([self.coefficients[t] for t in self.term_order])

    def std_errors(self) -> dict:
        se = np.sqrt(np.diag(self.covariance))
        return dict(zip(self.term_order, se))


@dataclass
class TermStats:
    term: str
    estimate: float
    std_error: float
    t_stat: float
    ame: float
    ame_std_error: float
    ame_significant_at: str


@dataclass
class GroupTest:
    group: str
    terms: list
    chi2_stat: float
    df: int
    p_value: float
    reject_at_5pct: bool


def _design(data: Dataset, terms, outcome):
    y = data.outcome if outcome == data.schema.outcome_name else data.feature_column(outcome)
    cols = [np.ones(len(data))]
    for t in terms:
        cols.append(data.feature_column(t))
    X = np.column_stack(cols)
    if np.isnan(X).any() or np.isnan(y).any():
        raise FitError("missing values among used columns; apply restrictions first")
    return X, np.asarray(y, dtype=np.float64)


def fit(data: Dataset, terms, outcome: str | None = None) -> ProbitFit:
    """Probit MLE of the outcome on an intercept plus the given terms."""
    outcome = outcome or data.schema.outcome_name
    terms = list(terms)
    X, y = _design(data, terms, outcome)
    n, k = X.shape
    if n <= k:
        raise FitError(f"n={n} rows cannot identify {k} parameters")
    if not np.isin(y, (0.0, 1.0)).all():
        raise FitError("outcome must be binary 0/1")

    beta, ll, converged, iters = _newton(X, y)
    if ll >= -1e-6:
        # supremum of the likelihood is 0 and it is being attained: every
        # fitted probability sits at its boundary
        raise SeparationError("complete separation: likelihood at its boundary")
    # null model through the same code path so an intercept-only fit has
    # pseudo R^2 of exactly zero
    ll0 = ll if not terms else _newton(np.ones((n, 1)), y)[1]
    neg_h = -hessian(X, y, beta)
    try:
        cov = np.linalg.inv(neg_h)
    except np.linalg.LinAlgError:
        raise SeparationError("Hessian singular at the optimum") from None
    cov = 0.5 * (cov + cov.T)  # exact symmetry despite inversion noise

    pseudo_r2 = 0.0 if ll0 == 0.0 else 1.0 - ll / ll0
    names = ["intercept"] + terms
    return ProbitFit(
        coefficients=dict(zip(names, map(float, beta))),
        covariance=cov,
        term_order=names,
        log_likelihood=ll,
        null_log_likelihood=ll0,
        pseudo_r2=pseudo_r2,
        n_used=n,
        converged=converged,
        iterations=iters,
    )


def _newton(X, y):
    n, k = X.shape
    beta = np.zeros(k)
    p = min(max(float(np.mean(y)), 1e-10), 1.0 - 1e-10)
    beta[0] = ndtri(p)
    ll = log_likelihood(X, y, beta)

    for it in range(1, MAX_ITER + 1):
        g = score(X, y, beta)
        H = hessian(X, y, beta)
        try:
            step = np.linalg.solve(-H, g)
        except np.linalg.LinAlgError:
            raise SeparationError("Hessian numerically singular") from None
        if not np.all(np.isfinite(step)):
            raise SeparationError("non-finite Newton step")

        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + lam * step
            cand_ll = log_likelihood(X, y, cand)
            if cand_ll >= ll:
                break
            lam *= 0.5
        else:
            return beta, ll, abs(cand_ll - ll) < LL_TOL, it

        improving = cand_ll > ll
        if improving and np.max(np.abs(X @ cand)) > SEPARATION_INDEX:
            raise SeparationError(
                "linear index exceeded the separation guard while the "
                "likelihood was still growing"
            )
        delta = cand_ll - ll
        beta, ll = cand, cand_ll
        if abs(delta) < LL_TOL:
            return beta, ll, True, it
    return beta, ll, False, MAX_ITER


def marginal_effects(fit_result: ProbitFit, data: Dataset) -> list[TermStats]:
    """Average marginal effects with delta-method standard errors.

    Binary terms use the discrete 0->1 difference averaged over the sample,
    continuous terms the density-weighted slope.
    """
    if not fit_result.converged:
        raise FitError("marginal effects require a converged fit")
    terms = fit_result.term_order[1:]
    X, _ = _design(data, terms, data.schema.outcome_name)
    beta = fit_result.beta()
    n = X.shape[0]
    eta = X @ beta
    se_map = fit_result.std_errors()

    out = []
    for pos, term in enumerate(terms, start=1):
        kind = data.schema.feature(term).kind
        b = beta[pos]
        if kind == BINARY:
            x = X[:, pos]
            eta1 = eta + (1.0 - x) * b
            eta0 = eta - x * b
            ame = float(np.mean(ndtr(eta1) - ndtr(eta0)))
            d1 = norm_pdf(eta1)
            d0 = norm_pdf(eta0)
            # gradient wrt beta: densities weight the counterfactual rows,
            # and the term's own column is 1 in one branch, 0 in the other
            grad = (d1 - d0) @ X / n
            grad[pos] = float(d1.sum()) / n
        else:
            dens = norm_pdf(eta)
            ame = float(np.mean(dens) * b)
            grad = (-eta * dens * b) @ X / n
            grad[pos] += float(np.mean(dens))
        var = float(grad @ fit_result.covariance @ grad)
        ame_se = float(np.sqrt(max(var, 0.0)))
        est_se = float(se_map[term])
        t_stat = float(beta[pos] / est_se) if est_se > 0 else float("inf")
        out.append(TermStats(
            term=term,
            estimate=float(beta[pos]),
            std_error=est_se,
            t_stat=t_stat,
            ame=ame,
            ame_std_error=ame_se,
            ame_significant_at=_significance(ame, ame_se),
        ))
    return out


def _significance(est, se) -> str:
    if se <= 0:
        return "1%" if est != 0 else "none"
    z = abs(est / se)
    for level in ("1%", "5%", "10%"):
        if z > _Z_CRITICAL[level]:
            return level
    return "none"


def group_test(fit_result: ProbitFit, terms, group: str = "",
               method: str = "wald", data: Dataset | None = None,
               outcome: str | None = None) -> GroupTest:
    """Joint significance test for a set of terms.

    Wald by default (single fit); method="lr" refits without the group and
    uses the likelihood-ratio statistic, for cross-checking.
    """
    terms = list(terms)
    for t in terms:
        if t not in fit_result.term_order:
            raise FitError(f"term {t!r} not in fit")
    df = len(terms)
    if df < 1:
        raise FitError("empty term group")

    if method == "wald":
        idx = [fit_result.term_order.index(t) for t in terms]
        bg = fit_result.beta()[idx]
        vg = fit_result.covariance[np.ix_(idx, idx)]
        try:
            stat = max(float(bg @ np.linalg.solve(vg, bg)), 0.0)
        except np.linalg.LinAlgError:
            raise FitError(f"singular sub-covariance for group {group!r}") from None
    elif method == "lr":
        if data is None:
            raise FitError("likelihood-ratio test needs the original data")
        rest = [t for t in fit_result.term_order[1:] if t not in terms]
        reduced = fit(data, rest, outcome)
        stat = 2.0 * (fit_result.log_likelihood - reduced.log_likelihood)
    else:
        raise FitError(f"unknown group test method {method!r}")

    p = float(chi2_dist.sf(stat, df))
    return GroupTest(group=group, terms=terms, chi2_stat=stat, df=df,
                     p_value=p, reject_at_5pct=p < 0.05)


@dataclass
class EliminationRound:
    round: int
    pseudo_r2: float
    tests: list
    dropped: list


@dataclass
class EliminationLog:
    rounds: list = field(default_factory=list)
    initial_pseudo_r2: float = 0.0
    final_pseudo_r2: float = 0.0
    surviving_groups: list = field(default_factory=list)


def eliminate_groups(data: Dataset, schema: Schema, outcome: str | None = None,
                     max_rounds: int = 4, alpha: float = 0.05):
    """Iteratively drop variable groups that fail the joint 5% test.

    Each round fits on the surviving features, tests every group, drops all
    failing groups at once and refits. Stops when every surviving group
    passes or the round budget is exhausted.
    """
    outcome = outcome or schema.outcome_name
    groups = {g: list(members) for g, members in schema.groups().items()}
    log = EliminationLog()
    current = fit(data, [t for ts in groups.values() for t in ts], outcome)
    log.initial_pseudo_r2 = current.pseudo_r2

    for rnd in range(1, max_rounds + 1):
        tests = [group_test(current, members, group=g, method="wald")
                 for g, members in groups.items()]
        dropped = [t.group for t in tests if t.p_value >= alpha]
        log.rounds.append(EliminationRound(
            round=rnd, pseudo_r2=current.pseudo_r2, tests=tests, dropped=dropped,
        ))
        if not dropped:
            break
        for g in dropped:
            groups.pop(g)
        current = fit(data, [t for ts in groups.values() for t in ts], outcome)

    log.final_pseudo_r2 = current.pseudo_r2
    log.surviving_groups = list(groups)
    return current, log
