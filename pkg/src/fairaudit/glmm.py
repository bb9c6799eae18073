"""Mixed-effects Poisson error-count regression with a Laplace marginal.

Model: for utterance i with error count y_i, reference length N_i, demographic
level dummies x_i, and speaker g(i),

    y_i ~ Poisson(mu_i),  log mu_i = log N_i + beta0 + x_i' beta + u_g(i),
    u_g ~ Normal(0, sigma_u^2),

so the linear predictor is a log-link model of the per-word error rate (WER).
The marginal log-likelihood integrates the random intercepts out with a
Laplace approximation; fitting runs a penalized IRLS over (beta, u) inside a
golden-section search over sigma_u. Nested full/reduced fits feed a
chi-square likelihood-ratio test for the demographic attribute.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFinite,
    NotNested,
    DegenerateXbar,
    Separation,
    SingleLevelAttribute,
    UnknownLevel,
)

MERGED_LEVEL = "other_merged"


# ---------------------------------------------------------------------------
# Design construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignRow:
    """One utterance joined with its demographics: the unit of regression."""

    errors: int
    ref_len: int
    level: str
    speaker_id: str


@dataclass(frozen=True)
class DesignSpec:
    """What to regress: attribute dummies plus the log-reference-length covariate.

    reference_level=None picks the most frequent level. Levels with fewer than
    merge_threshold rows are pooled into "other_merged" before dummy coding.
    """

    attribute: str
    reference_level: str | None = None
    include_log_ref_len: bool = True
    merge_threshold: int = 10
    continuity_correction: bool = True
    grouping: str = "speaker_id"


@dataclass(frozen=True)
class Design:
    """Materialized regression arrays for one demographic attribute."""

    attribute: str
    y: np.ndarray                 # error counts, continuity-corrected if needed
    offset: np.ndarray            # log N_i
    X: np.ndarray                 # n x p fixed-effect columns, no intercept
    columns: tuple[str, ...]
    levels: tuple[str, ...]       # all post-merge levels, reference first
    reference_level: str
    row_levels: tuple[str, ...]   # post-merge level of each row
    group_index: np.ndarray
    n_groups: int
    covariate_center: float | None

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]


def merge_rare_levels(levels: list[str], threshold: int) -> dict[str, str]:
    """Map raw levels to themselves or to the pooled "other_merged" level."""
    counts = Counter(levels)
    mapping = {}
    for level, n in counts.items():
        mapping[level] = MERGED_LEVEL if n < threshold else level
    # A pooled level that still ends up rare is kept; it simply stays small.
    return mapping


def build_design(rows: list[DesignRow], spec: DesignSpec) -> Design:
    """Dummy-code the attribute against its reference level with a log-length offset.

    Raises SingleLevelAttribute when fewer than two levels remain after
    merging, and Separation when a level has zero total errors and the
    continuity correction is disabled.
    """
    if not rows:
        raise SingleLevelAttribute(f"{spec.attribute}: no rows")
    if any(r.ref_len < 1 for r in rows):
        raise ValueError("every design row needs ref_len >= 1")

    mapping = merge_rare_levels([r.level for r in rows], spec.merge_threshold)
    row_levels = tuple(mapping[r.level] for r in rows)
    level_counts = Counter(row_levels)
    if len(level_counts) < 2:
        raise SingleLevelAttribute(
            f"{spec.attribute}: {len(level_counts)} observed level(s) after merging"
        )

    if spec.reference_level is not None:
        reference = mapping.get(spec.reference_level, spec.reference_level)
        if reference not in level_counts:
            raise UnknownLevel(f"{spec.attribute}: reference {spec.reference_level!r} not observed")
    else:
        # Most frequent level; ties broken lexicographically for determinism.
        reference = max(sorted(level_counts), key=lambda lv: level_counts[lv])

    others = sorted(lv for lv in level_counts if lv != reference)
    levels = (reference, *others)

    y = np.array([float(r.errors) for r in rows])
    offset = np.log([float(r.ref_len) for r in rows])

    # Continuity correction: a level with zero total errors has an infinite
    # MLE on the log scale; spread 0.5 pseudo-errors over its rows instead.
    for level in levels:
        idx = [i for i, lv in enumerate(row_levels) if lv == level]
        if y[idx].sum() == 0.0:
            if not spec.continuity_correction:
                raise Separation(f"{spec.attribute}: level {level!r} has zero total errors")
            y[idx] += 0.5 / len(idx)

    columns: list[str] = []
    cols: list[np.ndarray] = []
    for level in others:
        cols.append(np.array([1.0 if lv == level else 0.0 for lv in row_levels]))
        columns.append(f"level:{level}")

    center = None
    if spec.include_log_ref_len:
        center = float(offset.mean())
        cols.append(offset - center)
        columns.append("log_ref_len")

    X = np.column_stack(cols) if cols else np.empty((len(rows), 0))

    speakers = sorted({r.speaker_id for r in rows})
    speaker_pos = {s: i for i, s in enumerate(speakers)}
    group_index = np.array([speaker_pos[r.speaker_id] for r in rows], dtype=np.intp)

    return Design(
        attribute=spec.attribute,
        y=y,
        offset=offset,
        X=X,
        columns=tuple(columns),
        levels=levels,
        reference_level=reference,
        row_levels=row_levels,
        group_index=group_index,
        n_groups=len(speakers),
        covariate_center=center,
    )


def reduced_design(design: Design) -> Design:
    """Drop the attribute dummies, keeping the identical response and offset.

    The reduced model of the likelihood-ratio test must see the same data,
    including any continuity correction chosen by the full design.
    """
    keep = [i for i, name in enumerate(design.columns) if not name.startswith("level:")]
    return replace(
        design,
        X=design.X[:, keep] if keep else np.empty((design.n_rows, 0)),
        columns=tuple(design.columns[i] for i in keep),
    )


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitSettings:
    inner_tol: float = 1e-8
    inner_max_iter: int = 100
    sigma_max: float = 5.0
    sigma_tol: float = 1e-4


@dataclass(frozen=True)
class FittedModel:
    """Fixed effects, random-intercept scale, and the Laplace log-likelihood.

    beta_g maps every post-merge level to its coefficient; the reference level
    is pinned at exactly 0. beta_logref multiplies the centered log reference
    length (0.0 when the design had no covariate).
    """

    attribute: str
    beta0: float
    beta_g: dict[str, float]
    beta_logref: float
    sigma_u: float
    loglik: float
    converged: bool
    n_iter: int
    reference_level: str
    covariate_center: float | None = None

    def to_dict(self) -> dict:
        """Debug-dump document for cross-checking against external software."""
        return {
            "beta0": self.beta0,
            "beta": dict(self.beta_g),
            "beta_logref": self.beta_logref,
            "sigma_u": self.sigma_u,
            "loglik": self.loglik,
            "converged": self.converged,
            "n_iter": self.n_iter,
        }


@dataclass
class _InnerState:
    beta: np.ndarray        # intercept first
    u: np.ndarray
    loglik: float = math.nan
    converged: bool = False
    n_iter: int = 0


def _penalized_objective(F, y, offset, groups, beta, u, sigma):
    with np.errstate(over="ignore"):
        eta = offset + F @ beta + (u[groups] if u.size else 0.0)
        mu = np.exp(eta)
        if not np.all(np.isfinite(mu)):
            return -math.inf
        q = float(np.sum(y * eta - mu))
    if sigma > 0.0 and u.size:
        q -= float(np.sum(u * u)) / (2.0 * sigma * sigma)
    return q


def _laplace_loglik(F, y, offset, groups, n_groups, beta, u, sigma):
    """Laplace-approximate marginal log-likelihood at conditional modes u."""
    eta = offset + F @ beta + (u[groups] if sigma > 0.0 else 0.0)
    mu = np.exp(eta)
    base = float(np.sum(y * eta - mu) - sum(math.lgamma(v + 1.0) for v in y))
    if sigma <= 0.0:
        return base
    w_g = np.bincount(groups, weights=mu, minlength=n_groups)
    return (
        base
        - float(np.sum(u * u)) / (2.0 * sigma * sigma)
        - 0.5 * float(np.sum(np.log(sigma * sigma * w_g + 1.0)))
    )


def _penalized_irls(F, y, offset, groups, n_groups, sigma, state, settings):
    """Maximize the penalized joint log-likelihood over (beta, u) at fixed sigma.

    Newton steps via the blocked normal equations: the random-intercept block
    of the information matrix is diagonal, so u is eliminated analytically and
    only a p x p system is solved per iteration. Steps are halved whenever the
    penalized objective would decrease.
    """
    n, p = F.shape
    beta = state.beta.copy()
    u = state.u.copy() if sigma > 0.0 else np.zeros(n_groups)
    inv_s2 = 1.0 / (sigma * sigma) if sigma > 0.0 else 0.0

    obj = _penalized_objective(F, y, offset, groups, beta, u if sigma > 0 else np.zeros(0), sigma)
    converged = False
    it = 0
    for it in range(1, settings.inner_max_iter + 1):
        eta = offset + F @ beta + (u[groups] if sigma > 0.0 else 0.0)
        mu = np.exp(eta)
        r = y - mu

        g_beta = F.T @ r
        if sigma > 0.0:
            g_u = np.bincount(groups, weights=r, minlength=n_groups) - u * inv_s2
            grad_norm = math.sqrt(float(g_beta @ g_beta) + float(g_u @ g_u))
        else:
            grad_norm = math.sqrt(float(g_beta @ g_beta))
        if grad_norm <= settings.inner_tol:
            converged = True
            break

        w = mu
        z = (eta - offset) + r / mu
        Fw = F * w[:, None]
        S_FF = F.T @ Fw
        r_F = F.T @ (w * z)
        if sigma > 0.0:
            d = np.bincount(groups, weights=w, minlength=n_groups) + inv_s2
            S_FZ = np.empty((p, n_groups))
            for k in range(p):
                S_FZ[k] = np.bincount(groups, weights=Fw[:, k], minlength=n_groups)
            r_Z = np.bincount(groups, weights=w * z, minlength=n_groups)
            A = S_FF - (S_FZ / d) @ S_FZ.T
            b = r_F - S_FZ @ (r_Z / d)
            try:
                beta_new = np.linalg.solve(A, b)
            except np.linalg.LinAlgError:
                beta_new = np.linalg.lstsq(A, b, rcond=None)[0]
            u_new = (r_Z - S_FZ.T @ beta_new) / d
        else:
            try:
                beta_new = np.linalg.solve(S_FF, r_F)
            except np.linalg.LinAlgError:
                beta_new = np.linalg.lstsq(S_FF, r_F, rcond=None)[0]
            u_new = u

        # Step-halving keeps iterates inside the finite-objective region.
        step = 1.0
        for _ in range(40):
            beta_try = beta + step * (beta_new - beta)
            u_try = u + step * (u_new - u)
            obj_try = _penalized_objective(
                F, y, offset, groups, beta_try, u_try if sigma > 0 else np.zeros(0), sigma
            )
            if obj_try >= obj - 1e-12 * max(1.0, abs(obj)):
                break
            step *= 0.5
        beta, u, obj = beta_try, u_try, obj_try

    loglik = _laplace_loglik(F, y, offset, groups, n_groups, beta, u, sigma)
    return _InnerState(beta=beta, u=u, loglik=loglik, converged=converged, n_iter=it)


def fit_poisson_glmm(design: Design, settings: FitSettings = FitSettings()) -> FittedModel:
    """Fit the mixed-effects Poisson model by profiling sigma_u.

    The outer golden-section search maximizes the Laplace marginal
    log-likelihood over sigma_u in [0, sigma_max]; each evaluation reuses the
    previous (beta, u) as a warm start. Hitting the iteration cap returns
    converged=False rather than raising.
    """
    n = design.n_rows
    F = np.column_stack([np.ones(n), design.X])
    y, offset, groups = design.y, design.offset, design.group_index

    ybar = float(y.mean())
    beta_init = np.zeros(F.shape[1])
    beta_init[0] = math.log(max(ybar, 1e-8)) - float(offset.mean())
    state = _InnerState(beta=beta_init, u=np.zeros(design.n_groups))

    total_iter = 0
    all_converged = True

    def profile(sigma: float, warm: _InnerState) -> _InnerState:
        nonlocal total_iter, all_converged
        out = _penalized_irls(F, y, offset, groups, design.n_groups, sigma, warm, settings)
        total_iter += out.n_iter
        all_converged = all_converged and out.converged
        return out

    zero_state = profile(0.0, state)
    best_sigma, best_state = 0.0, zero_state

    if design.n_groups >= 2:
        # Golden-section search for the profile maximum on [0, sigma_max].
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        lo, hi = 0.0, settings.sigma_max
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        s1 = profile(x1, zero_state)
        s2 = profile(x2, s1)
        while hi - lo > settings.sigma_tol:
            if s1.loglik >= s2.loglik:
                hi, x2, s2 = x2, x1, s1
                x1 = hi - invphi * (hi - lo)
                s1 = profile(x1, s2)
            else:
                lo, x1, s1 = x1, x2, s2
                x2 = lo + invphi * (hi - lo)
                s2 = profile(x2, s1)
        cand_sigma, cand_state = (x1, s1) if s1.loglik >= s2.loglik else (x2, s2)
        if cand_state.loglik > zero_state.loglik:
            best_sigma, best_state = cand_sigma, cand_state

    if not math.isfinite(best_state.loglik):
        raise NonFinite(f"{design.attribute}: marginal log-likelihood diverged")

    beta = best_state.beta
    beta_g = {design.reference_level: 0.0}
    beta_logref = 0.0
    for name, value in zip(design.columns, beta[1:]):
        if name.startswith("level:"):
            beta_g[name.removeprefix("level:")] = float(value)
        elif name == "log_ref_len":
            beta_logref = float(value)

    return FittedModel(
        attribute=design.attribute,
        beta0=float(beta[0]),
        beta_g=beta_g,
        beta_logref=beta_logref,
        sigma_u=best_sigma,
        loglik=best_state.loglik,
        converged=all_converged,
        n_iter=total_iter,
        reference_level=design.reference_level,
        covariate_center=design.covariate_center,
    )


def _model_coefficients(model: FittedModel, design: Design) -> np.ndarray:
    """Reassemble the coefficient vector in the design's column order."""
    coef = [model.beta0]
    for name in design.columns:
        if name.startswith("level:"):
            level = name.removeprefix("level:")
            if level not in model.beta_g:
                raise DimensionMismatch(f"model lacks coefficient for level {level!r}")
            coef.append(model.beta_g[level])
        elif name == "log_ref_len":
            coef.append(model.beta_logref)
        else:
            raise DimensionMismatch(f"unknown design column {name!r}")
    # Dummy columns (plus the reference) define which levels the model must carry.
    expected_levels = {design.reference_level} | {
        name.removeprefix("level:") for name in design.columns if name.startswith("level:")
    }
    if set(model.beta_g) != expected_levels:
        raise DimensionMismatch(
            f"model levels {sorted(model.beta_g)} != design levels {sorted(expected_levels)}"
        )
    return np.array(coef)


def log_likelihood(model: FittedModel, design: Design) -> float:
    """Laplace marginal log-likelihood of `design` under `model`.

    Conditional modes of the random intercepts are recomputed for the given
    fixed effects by a per-group scalar Newton iteration, so the value is a
    deterministic function of (model, design).
    """
    coef = _model_coefficients(model, design)
    F = np.column_stack([np.ones(design.n_rows), design.X])
    eta_fixed = design.offset + F @ coef
    sigma = model.sigma_u
    groups, n_groups = design.group_index, design.n_groups

    if sigma <= 0.0:
        u = np.zeros(n_groups)
        return _laplace_loglik(F, design.y, design.offset, groups, n_groups, coef, u, 0.0)

    t_g = np.bincount(groups, weights=design.y, minlength=n_groups)
    e_g = np.bincount(groups, weights=np.exp(eta_fixed), minlength=n_groups)
    inv_s2 = 1.0 / (sigma * sigma)

    # Solve t_g - e_g * exp(u) - u / sigma^2 = 0 per group (strictly concave).
    u = np.zeros(n_groups)
    for _ in range(100):
        expu = np.exp(u)
        grad = t_g - e_g * expu - u * inv_s2
        if float(np.max(np.abs(grad))) < 1e-11:
            break
        hess = -e_g * expu - inv_s2
        step = grad / hess
        u = u - np.clip(step, -5.0, 5.0)

    return _laplace_loglik(F, design.y, design.offset, groups, n_groups, coef, u, sigma)


# ---------------------------------------------------------------------------
# Likelihood-ratio test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LrtResult:
    """Nested-model likelihood-ratio statistic and its chi-square p-value."""

    stat: float
    df: int
    p_value: float


def lrt(full: FittedModel, reduced: FittedModel, df: int) -> LrtResult:
    """2 * (loglik_full - loglik_reduced), clamped at zero, chi-square tail."""
    if df <= 0:
        raise NotNested(f"df must be positive, got {df}")
    stat = max(0.0, 2.0 * (full.loglik - reduced.loglik))
    return LrtResult(stat=stat, df=df, p_value=chi_square_sf(stat, df))


def predict_group_wer(model: FittedModel, level: str, xbar: float) -> float:
    """Predicted per-group WER at the corpus-mean log reference length.

    Evaluates exp(beta0 + beta_level + beta_logref * xbar) / (exp(xbar) - 1).
    The denominator and the covariate term are shared across levels, so the
    downstream min-max scaling is insensitive to both.
    """
    if xbar <= 0.0:
        raise DegenerateXbar(f"xbar must be positive, got {xbar}")
    if level not in model.beta_g:
        raise UnknownLevel(f"{model.attribute}: level {level!r} not in fitted model")
    numerator = math.exp(model.beta0 + model.beta_g[level] + model.beta_logref * xbar)
    return numerator / (math.exp(xbar) - 1.0)


# ---------------------------------------------------------------------------
# Chi-square upper tail via the regularized incomplete gamma function
# ---------------------------------------------------------------------------

_GAMMA_EPS = 1e-15
_GAMMA_MAX_ITER = 500


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_GAMMA_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction (Lentz)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_upper_gamma(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a); series for small x, CF for large."""
    if a <= 0.0:
        raise ValueError("shape parameter must be positive")
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_gamma_series(a, x)))
    return min(1.0, max(0.0, _upper_gamma_cf(a, x)))


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail P(X >= x) for a chi-square variate with df degrees of freedom."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if x <= 0.0:
        return 1.0
    return regularized_upper_gamma(df / 2.0, x / 2.0)
