"""Fairness scoring cascade: group scores, significance penalty, FAAS, tiers.

Per demographic attribute: predicted group WERs are min-max rescaled to raw
fairness scores on [0, 100] (lower WER is fairer), combined into a
proportion-weighted category score, and penalized by p/0.05 when the
likelihood-ratio test finds the disparity significant. Category scores
average (with optional weights) into the overall fairness score, and

    FAAS = 10 * log10(overall score / corpus WER)

folds accuracy and fairness into one decibel-style number.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import glmm
from .alignment import ScoredUtterance, corpus_wer, score_utterance
from .corpus import DEMOGRAPHIC_ATTRIBUTES, Corpus
from .errors import (
    AttributeAuditError,
    BadProportions,
    CoverageTooLow,
    FairauditError,
    KeyMismatch,
    NonPositiveWeight,
    TooFewLevels,
    ZeroWer,
)
from .glmm import DesignRow, DesignSpec, LrtResult

SIGNIFICANCE_ALPHA = 0.05

TIER_SEVERELY_BIASED = "severely biased"
TIER_BIASED = "biased"
TIER_MODERATELY_FAIR = "moderately fair"
TIER_FAIR = "fair"
TIER_EXEMPLARILY_FAIR = "exemplarily fair"

# Uniform 20-point bands over the overall fairness score.
TIER_THRESHOLDS = (
    (20.0, TIER_SEVERELY_BIASED),
    (40.0, TIER_BIASED),
    (60.0, TIER_MODERATELY_FAIR),
    (80.0, TIER_FAIR),
)

FAAS_PERFECT_ACCURACY = "perfect_accuracy"
FAAS_ZERO_FAIRNESS = "zero_fairness"


def raw_fairness_scores(predicted: dict[str, float]) -> dict[str, float]:
    """Min-max rescale predicted WERs to [0, 100]; identical WERs all score 100."""
    if len(predicted) < 2:
        raise TooFewLevels(f"need >= 2 levels, got {len(predicted)}")
    lo = min(predicted.values())
    hi = max(predicted.values())
    if hi == lo:
        return {level: 100.0 for level in predicted}
    return {
        level: 100.0 * (1.0 - (w - lo) / (hi - lo)) for level, w in predicted.items()
    }


def category_score(scores: dict[str, float], proportions: dict[str, float]) -> float:
    """Proportion-weighted mean of raw fairness scores within one attribute."""
    if set(scores) != set(proportions):
        raise KeyMismatch(f"{sorted(scores)} vs {sorted(proportions)}")
    total = sum(proportions.values())
    if abs(total - 1.0) > 1e-9:
        raise BadProportions(f"proportions sum to {total}")
    return sum(proportions[level] * scores[level] for level in scores)


def adjusted_score(score: float, p_value: float) -> float:
    """Scale the category score by p/0.05 when the disparity is significant."""
    if p_value < SIGNIFICANCE_ALPHA:
        return score * (p_value / SIGNIFICANCE_ALPHA)
    return score


def overall_score(adjusted: dict[str, float], weights: dict[str, float]) -> float:
    """Weighted average of adjusted category scores."""
    if set(adjusted) != set(weights):
        raise KeyMismatch(f"{sorted(adjusted)} vs {sorted(weights)}")
    for category, w in weights.items():
        if w <= 0.0:
            raise NonPositiveWeight(f"{category}: {w}")
    total_w = sum(weights.values())
    return sum(weights[c] * adjusted[c] for c in adjusted) / total_w


def faas(overall: float, wer: float) -> float:
    """10 * log10(overall / wer); WER enters as a fraction (0.10, not 10.0)."""
    if wer <= 0.0:
        raise ZeroWer("perfect accuracy: FAAS undefined, rank first")
    if overall <= 0.0:
        return -math.inf
    return 10.0 * math.log10(overall / wer)


def classify_tier(overall: float) -> str:
    """Map an overall fairness score onto the five-tier label scale."""
    for cutoff, label in TIER_THRESHOLDS:
        if overall < cutoff:
            return label
    return TIER_EXEMPLARILY_FAIR


# ---------------------------------------------------------------------------
# Audit orchestration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditConfig:
    attributes: tuple[str, ...] = DEMOGRAPHIC_ATTRIBUTES
    weights: dict[str, float] | None = None  # None -> weight 1 per attribute
    coverage_threshold: float = 0.95
    merge_threshold: int = 10
    keep_per_utterance: bool = True
    fit_settings: glmm.FitSettings = field(default_factory=glmm.FitSettings)

    def weight_map(self) -> dict[str, float]:
        if self.weights is None:
            return {a: 1.0 for a in self.attributes}
        return dict(self.weights)


@dataclass(frozen=True)
class GroupRow:
    predicted_wer: float
    raw_score: float
    proportion: float


@dataclass(frozen=True)
class CategoryReport:
    """Per-attribute fairness outcome: group scores, LRT, adjusted score."""

    attribute: str
    group_rows: dict[str, GroupRow]
    category_score: float
    lrt: LrtResult
    adjusted_score: float
    tier: str
    reference_level: str
    model: glmm.FittedModel | None = None


@dataclass(frozen=True)
class AuditResult:
    """Complete audit of one submitted model against the reference corpus."""

    model_id: str
    corpus_wer: float
    categories: list[CategoryReport]
    overall_score: float
    faas: float | None
    faas_sentinel: str | None
    tier: str
    created_at: str
    coverage: float
    missing_hypotheses: tuple[str, ...] = ()
    per_utterance: list[ScoredUtterance] | None = None


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _perfect_category(attribute, levels, proportions, reference) -> CategoryReport:
    # Zero errors everywhere: identical (zero) predicted WER for every level.
    rows = {
        level: GroupRow(predicted_wer=0.0, raw_score=100.0, proportion=proportions[level])
        for level in levels
    }
    return CategoryReport(
        attribute=attribute,
        group_rows=rows,
        category_score=100.0,
        lrt=LrtResult(stat=0.0, df=max(1, len(levels) - 1), p_value=1.0),
        adjusted_score=100.0,
        tier=classify_tier(100.0),
        reference_level=reference,
    )


def audit_category(
    rows: list[DesignRow],
    attribute: str,
    xbar: float,
    config: AuditConfig,
) -> CategoryReport:
    """Fit full and reduced models for one attribute and score the groups."""
    design = glmm.build_design(
        rows,
        DesignSpec(attribute=attribute, merge_threshold=config.merge_threshold),
    )
    full = glmm.fit_poisson_glmm(design, config.fit_settings)
    reduced = glmm.fit_poisson_glmm(glmm.reduced_design(design), config.fit_settings)
    test = glmm.lrt(full, reduced, df=len(design.levels) - 1)

    predicted = {
        level: glmm.predict_group_wer(full, level, xbar) for level in design.levels
    }
    raw = raw_fairness_scores(predicted)
    level_counts = Counter(design.row_levels)
    total = len(design.row_levels)
    proportions = {level: level_counts[level] / total for level in design.levels}

    cat = category_score(raw, proportions)
    adj = adjusted_score(cat, test.p_value)
    return CategoryReport(
        attribute=attribute,
        group_rows={
            level: GroupRow(
                predicted_wer=predicted[level],
                raw_score=raw[level],
                proportion=proportions[level],
            )
            for level in design.levels
        },
        category_score=cat,
        lrt=test,
        adjusted_score=adj,
        tier=classify_tier(adj),
        reference_level=design.reference_level,
    )


def run_audit(
    corpus: Corpus,
    transcripts: dict[str, str],
    model_id: str,
    config: AuditConfig = AuditConfig(),
) -> AuditResult:
    """Score transcripts against the corpus and run the full fairness cascade.

    Deterministic given (corpus, transcripts, config) apart from created_at.
    """
    covered = [r for r in corpus if r.utterance_id in transcripts]
    missing = tuple(r.utterance_id for r in corpus if r.utterance_id not in transcripts)
    coverage = len(covered) / len(corpus) if len(corpus) else 0.0
    if coverage < config.coverage_threshold:
        raise CoverageTooLow(coverage, config.coverage_threshold)

    scored: list[ScoredUtterance] = []
    for record in covered:
        scored.append(
            score_utterance(record.utterance_id, record.reference, transcripts[record.utterance_id])
        )
    pooled_wer = corpus_wer(scored)
    total_errors = sum(s.error_count for s in scored)
    xbar = sum(math.log(s.counts.N) for s in scored) / len(scored)

    by_id = {r.utterance_id: r for r in covered}
    categories: list[CategoryReport] = []
    for attribute in config.attributes:
        if total_errors == 0:
            # Perfect transcripts: no error model to fit, everything is fair.
            levels = sorted({by_id[s.utterance_id].profile.level(attribute) for s in scored})
            counts = Counter(by_id[s.utterance_id].profile.level(attribute) for s in scored)
            proportions = {lv: counts[lv] / len(scored) for lv in levels}
            reference = max(levels, key=lambda lv: counts[lv])
            categories.append(_perfect_category(attribute, levels, proportions, reference))
            continue
        rows = [
            DesignRow(
                errors=s.error_count,
                ref_len=s.counts.N,
                level=by_id[s.utterance_id].profile.level(attribute),
                speaker_id=by_id[s.utterance_id].speaker_id,
            )
            for s in scored
        ]
        try:
            categories.append(audit_category(rows, attribute, xbar, config))
        except FairauditError as exc:
            raise AttributeAuditError(attribute, exc) from exc

    weights = config.weight_map()
    overall = overall_score(
        {c.attribute: c.adjusted_score for c in categories},
        {c.attribute: weights.get(c.attribute, 1.0) for c in categories},
    )

    if pooled_wer == 0.0:
        faas_value, sentinel = None, FAAS_PERFECT_ACCURACY
    else:
        faas_value = faas(overall, pooled_wer)
        sentinel = None
        if faas_value == -math.inf:
            faas_value, sentinel = None, FAAS_ZERO_FAIRNESS

    return AuditResult(
        model_id=model_id,
        corpus_wer=pooled_wer,
        categories=categories,
        overall_score=overall,
        faas=faas_value,
        faas_sentinel=sentinel,
        tier=classify_tier(overall),
        created_at=_utc_now(),
        coverage=coverage,
        missing_hypotheses=missing,
        per_utterance=scored if config.keep_per_utterance else None,
    )


# ---------------------------------------------------------------------------
# Serialization (store format == API payload)
# ---------------------------------------------------------------------------


def audit_to_dict(result: AuditResult) -> dict:
    doc = {
        "model_id": result.model_id,
        "wer": result.corpus_wer,
        "overall_score": result.overall_score,
        "faas": result.faas,
        "faas_sentinel": result.faas_sentinel,
        "tier": result.tier,
        "created_at": result.created_at,
        "coverage": result.coverage,
        "missing_hypotheses": list(result.missing_hypotheses),
        "categories": [
            {
                "attribute": c.attribute,
                "category_score": c.category_score,
                "adjusted_score": c.adjusted_score,
                "tier": c.tier,
                "reference_level": c.reference_level,
                "lrt": {"stat": c.lrt.stat, "df": c.lrt.df, "p_value": c.lrt.p_value},
                "groups": {
                    level: {
                        "predicted_wer": row.predicted_wer,
                        "raw_score": row.raw_score,
                        "proportion": row.proportion,
                    }
                    for level, row in c.group_rows.items()
                },
            }
            for c in result.categories
        ],
    }
    if result.per_utterance is not None:
        doc["per_utterance"] = [
            {
                "utterance_id": s.utterance_id,
                "S": s.counts.S,
                "D": s.counts.D,
                "I": s.counts.I,
                "C": s.counts.C,
                "N": s.counts.N,
                "wer": s.wer,
            }
            for s in result.per_utterance
        ]
    return doc
