"""Seeded generators for synthetic corpora, error counts, and transcripts.

Everything here is driven by numpy Generators seeded explicitly, so fixtures
are reproducible byte-for-byte. The count simulator draws from the exact
model the fitter assumes (Poisson errors, log-length offset, per-speaker
normal random intercepts), which makes it the ground-truth oracle for
parameter recovery and likelihood-ratio calibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, DemographicProfile, UtteranceRecord
from .glmm import DesignRow

# Marginals shaped after a US-participant voice-assistant corpus; the joint
# distribution is the product of the marginals.
GENDER_LEVELS = (("female", 0.55), ("male", 0.45))
FIRST_LANGUAGE_LEVELS = (("english", 0.65), ("spanish", 0.20), ("other", 0.10), ("unknown", 0.05))
SOCIOECONOMIC_LEVELS = (("middle", 0.65), ("low", 0.22), ("high", 0.13))
ETHNICITY_LEVELS = (
    ("white", 0.30),
    ("black", 0.22),
    ("hispanic", 0.15),
    ("asian", 0.12),
    ("mixed", 0.10),
    ("native", 0.06),
    ("other", 0.05),
)
AGE_BANDS = (("18-30", 0.35), ("31-45", 0.30), ("46-60", 0.20), ("61+", 0.15))

_VOCAB = (
    "play call text send open stop music timer alarm volume next weather "
    "lights message home remind list show skip pause answer again cancel "
    "news turn set what where please today tomorrow morning evening phone "
    "camera photo video note read start find search close delete"
).split()

_JUNK = "zdrak velp quorn xith blun jarv wemp norv gleck trysm".split()


def _pick(rng: np.random.Generator, levels) -> str:
    names = [name for name, _ in levels]
    probs = [p for _, p in levels]
    return names[rng.choice(len(names), p=probs)]


def synthetic_profile(rng: np.random.Generator) -> DemographicProfile:
    return DemographicProfile(
        gender=_pick(rng, GENDER_LEVELS),
        first_language=_pick(rng, FIRST_LANGUAGE_LEVELS),
        socioeconomic_bkg=_pick(rng, SOCIOECONOMIC_LEVELS),
        ethnicity=_pick(rng, ETHNICITY_LEVELS),
        age_band=_pick(rng, AGE_BANDS),
    )


def synthetic_corpus(
    n_records: int,
    n_speakers: int,
    seed: int,
    mean_duration_s: float = 7.42,
    ref_len_range: tuple[int, int] = (4, 18),
) -> Corpus:
    """A demographically diverse reference corpus with plain-text references."""
    rng = np.random.default_rng(seed)
    profiles = [synthetic_profile(rng) for _ in range(n_speakers)]
    records = []
    for i in range(n_records):
        speaker = int(rng.integers(0, n_speakers))
        length = int(rng.integers(ref_len_range[0], ref_len_range[1] + 1))
        words = [_VOCAB[int(rng.integers(0, len(_VOCAB)))] for _ in range(length)]
        duration = max(0.5, float(rng.normal(mean_duration_s, 2.0)))
        records.append(UtteranceRecord(
            utterance_id=f"utt{i:06d}",
            speaker_id=f"spk{speaker:05d}",
            reference=" ".join(words),
            duration_s=round(duration, 2),
            profile=profiles[speaker],
        ))
    return Corpus(records=tuple(records), provenance=f"synthetic(seed={seed})")


# ---------------------------------------------------------------------------
# Ground-truth count model (the fitter's oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountSimTruth:
    beta0: float
    effect: float
    sigma_u: float
    levels: tuple[str, str] = ("a", "b")


def simulate_error_counts(
    n_speakers: int,
    utterances_per_speaker: int,
    beta0: float,
    effect: float,
    sigma_u: float,
    seed: int,
    ref_len_range: tuple[int, int] = (5, 20),
) -> tuple[list[DesignRow], CountSimTruth]:
    """Draw Poisson error counts from the exact mixed-effects model.

    Speakers alternate between the two levels of a binary attribute, level "b"
    carrying the multiplicative effect; each speaker gets one normal random
    intercept shared by its utterances.
    """
    rng = np.random.default_rng(seed)
    rows: list[DesignRow] = []
    for s in range(n_speakers):
        level = "b" if s % 2 else "a"
        u = float(rng.normal(0.0, sigma_u)) if sigma_u > 0 else 0.0
        for _ in range(utterances_per_speaker):
            n_ref = int(rng.integers(ref_len_range[0], ref_len_range[1] + 1))
            eta = math.log(n_ref) + beta0 + (effect if level == "b" else 0.0) + u
            y = int(rng.poisson(math.exp(eta)))
            rows.append(DesignRow(errors=y, ref_len=n_ref, level=level, speaker_id=f"s{s:04d}"))
    return rows, CountSimTruth(beta0=beta0, effect=effect, sigma_u=sigma_u)


# ---------------------------------------------------------------------------
# Transcript corruption with optional planted disparities
# ---------------------------------------------------------------------------


def corrupt_transcripts(
    corpus: Corpus,
    seed: int,
    base_token_error_rate: float = 0.12,
    sigma_u: float = 0.3,
    disparity: dict[tuple[str, str], float] | None = None,
) -> dict[str, str]:
    """Simulate an ASR system's hypotheses by corrupting reference tokens.

    disparity maps (attribute, level) to a rate multiplier, e.g.
    {("gender", "male"): 1.5} plants 50% more errors for male speakers.
    Errors split into substitutions, deletions, and trailing insertions drawn
    from a junk vocabulary that never collides with real tokens.
    """
    rng = np.random.default_rng(seed)
    disparity = disparity or {}
    speaker_u: dict[str, float] = {}
    hypotheses: dict[str, str] = {}
    for record in corpus:
        if record.speaker_id not in speaker_u:
            speaker_u[record.speaker_id] = (
                float(rng.normal(0.0, sigma_u)) if sigma_u > 0 else 0.0
            )
        rate = base_token_error_rate * math.exp(speaker_u[record.speaker_id])
        for (attribute, level), mult in disparity.items():
            if record.profile.level(attribute) == level:
                rate *= mult
        rate = min(rate, 0.9)

        tokens = record.reference.split()
        out: list[str] = []
        for token in tokens:
            roll = rng.random()
            if roll < rate * 0.6:
                out.append(_JUNK[int(rng.integers(0, len(_JUNK)))])  # substitution
            elif roll < rate * 0.85:
                pass  # deletion
            else:
                out.append(token)
                if rng.random() < rate * 0.15:
                    out.append(_JUNK[int(rng.integers(0, len(_JUNK)))])  # insertion
        hypotheses[record.utterance_id] = " ".join(out)
    return hypotheses


def perfect_transcripts(corpus: Corpus) -> dict[str, str]:
    return {r.utterance_id: r.reference for r in corpus}
