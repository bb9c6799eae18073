"""Corpus data model, CSV ingestion, demographic entropy, stratified sampling."""

from __future__ import annotations

import csv
import math
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from .alignment import normalize_text
from .errors import DuplicateId, EmptyCorpus, MalformedRow, UnknownAttribute

DEMOGRAPHIC_ATTRIBUTES = ("gender", "first_language", "socioeconomic_bkg", "ethnicity")
UNKNOWN = "unknown"

CSV_HEADER = [
    "utterance_id",
    "speaker_id",
    "reference",
    "duration_s",
    "gender",
    "first_language",
    "socioeconomic_bkg",
    "ethnicity",
    "age_band",
]

# Strata for subsampling: joint cells over the four core attributes, which
# preserves the joint distribution and hence every marginal entropy.
STRATUM_ATTRIBUTES = DEMOGRAPHIC_ATTRIBUTES


def normalize_label(raw: str | None) -> str:
    """Case-normalize a category label; empty or missing becomes "unknown"."""
    if raw is None:
        return UNKNOWN
    label = raw.strip().lower()
    return label if label else UNKNOWN


@dataclass(frozen=True)
class DemographicProfile:
    """Self-reported demographic labels for one speaker.

    Labels are lowercase and non-empty; absent values carry the sentinel
    "unknown", which is a first-class category everywhere downstream.
    """

    gender: str
    first_language: str
    socioeconomic_bkg: str
    ethnicity: str
    age_band: str = UNKNOWN

    @classmethod
    def from_raw(cls, gender, first_language, socioeconomic_bkg, ethnicity,
                 age_band=None) -> "DemographicProfile":
        return cls(
            gender=normalize_label(gender),
            first_language=normalize_label(first_language),
            socioeconomic_bkg=normalize_label(socioeconomic_bkg),
            ethnicity=normalize_label(ethnicity),
            age_band=normalize_label(age_band),
        )

    def level(self, attribute: str) -> str:
        if attribute not in DEMOGRAPHIC_ATTRIBUTES and attribute != "age_band":
            raise UnknownAttribute(attribute)
        return getattr(self, attribute)


@dataclass(frozen=True)
class UtteranceRecord:
    """One reference utterance with its speaker's demographic profile."""

    utterance_id: str
    speaker_id: str
    reference: str
    profile: DemographicProfile
    duration_s: float | None = None


@dataclass(frozen=True)
class Corpus:
    """Ordered collection of utterance records; iteration order is load order."""

    records: tuple[UtteranceRecord, ...]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def by_id(self) -> dict[str, UtteranceRecord]:
        return {r.utterance_id: r for r in self.records}


@dataclass(frozen=True)
class CorpusStats:
    """Summary used to verify sampling fidelity: counts, duration, entropies."""

    count: int
    total_duration_s: float
    entropies: dict[str, float] = field(default_factory=dict)

    @property
    def total_duration_hrs(self) -> float:
        return self.total_duration_s / 3600.0


def load_corpus(path: str | Path, format: str = "csv") -> Corpus:
    """Load a corpus CSV, rejecting malformed rows and duplicate ids.

    Rows whose reference normalizes to zero tokens are rejected here because
    WER is undefined for an empty reference.
    """
    if format != "csv":
        raise ValueError(f"unsupported corpus format {format!r}")
    path = Path(path)
    records: list[UtteranceRecord] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MalformedRow(1, "missing header")
        missing = set(CSV_HEADER[:3]) - set(reader.fieldnames)
        if missing:
            raise MalformedRow(1, f"missing columns: {sorted(missing)}")
        for row in reader:
            line = reader.line_num
            utterance_id = (row.get("utterance_id") or "").strip()
            if not utterance_id:
                raise MalformedRow(line, "empty utterance_id")
            if utterance_id in seen:
                raise DuplicateId(utterance_id)
            seen.add(utterance_id)
            reference = row.get("reference") or ""
            if not normalize_text(reference):
                raise MalformedRow(line, "reference normalizes to zero tokens")
            duration_raw = (row.get("duration_s") or "").strip()
            if duration_raw:
                try:
                    duration = float(duration_raw)
                except ValueError:
                    raise MalformedRow(line, f"bad duration_s {duration_raw!r}") from None
                if duration < 0:
                    raise MalformedRow(line, "negative duration_s")
            else:
                duration = None
            records.append(UtteranceRecord(
                utterance_id=utterance_id,
                speaker_id=(row.get("speaker_id") or "").strip() or UNKNOWN,
                reference=reference,
                duration_s=duration,
                profile=DemographicProfile.from_raw(
                    row.get("gender"),
                    row.get("first_language"),
                    row.get("socioeconomic_bkg"),
                    row.get("ethnicity"),
                    row.get("age_band"),
                ),
            ))
    if not records:
        raise EmptyCorpus(str(path))
    return Corpus(records=tuple(records), provenance=str(path))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out in the canonical CSV schema."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in corpus:
            writer.writerow([
                r.utterance_id,
                r.speaker_id,
                r.reference,
                "" if r.duration_s is None else format(r.duration_s, "g"),
                r.profile.gender,
                r.profile.first_language,
                r.profile.socioeconomic_bkg,
                r.profile.ethnicity,
                "" if r.profile.age_band == UNKNOWN else r.profile.age_band,
            ])


def attribute_distribution(corpus: Corpus, attribute: str) -> dict[str, float]:
    """Empirical category proportions of one attribute ("unknown" included)."""
    if attribute not in DEMOGRAPHIC_ATTRIBUTES and attribute != "age_band":
        raise UnknownAttribute(attribute)
    counts = Counter(r.profile.level(attribute) for r in corpus)
    total = sum(counts.values())
    return {level: n / total for level, n in counts.items()}


def entropy(corpus: Corpus, attribute: str) -> float:
    """Shannon entropy in bits of the attribute's empirical distribution."""
    dist = attribute_distribution(corpus, attribute)
    return -sum(p * math.log2(p) for p in dist.values() if p > 0.0)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    return CorpusStats(
        count=len(corpus),
        total_duration_s=sum(r.duration_s or 0.0 for r in corpus),
        entropies={a: entropy(corpus, a) for a in DEMOGRAPHIC_ATTRIBUTES},
    )


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def stratified_sample(corpus: Corpus, fraction: float, seed: int) -> Corpus:
    """Per-stratum proportional subsample, deterministic for a fixed seed.

    Strata are the joint cells over the four core demographic attributes.
    A stratum of size n contributes max(1, round(fraction * n)) records via a
    seeded shuffle followed by a prefix take; output keeps corpus order, so
    fraction=1.0 returns an identical copy.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if len(corpus) == 0:
        raise EmptyCorpus("cannot sample an empty corpus")

    strata: dict[tuple[str, ...], list[int]] = {}
    for idx, record in enumerate(corpus):
        key = tuple(record.profile.level(a) for a in STRATUM_ATTRIBUTES)
        strata.setdefault(key, []).append(idx)

    rng = random.Random(seed)
    chosen: list[int] = []
    for key in sorted(strata):
        members = strata[key]
        take = max(1, _round_half_up(fraction * len(members)))
        if take >= len(members):
            chosen.extend(members)
            continue
        shuffled = members[:]
        rng.shuffle(shuffled)
        chosen.extend(shuffled[:take])

    chosen.sort()
    return replace(
        corpus,
        records=tuple(corpus.records[i] for i in chosen),
        provenance=f"{corpus.provenance} [stratified fraction={fraction} seed={seed}]",
    )


def stratum_count(corpus: Corpus) -> int:
    """Number of non-empty joint strata (used for sampling size tolerances)."""
    return len({
        tuple(r.profile.level(a) for a in STRATUM_ATTRIBUTES) for r in corpus
    })
