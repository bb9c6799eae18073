"""Text normalization and token-level edit-distance alignment.

The alignment produces the substitution/deletion/insertion counts that define
word error rate: WER = (S + D + I) / N over a minimum-cost alignment with unit
costs. Backtrace ties prefer match, then substitution, then a deletion or
insertion order fixed by the pair's orientation; the path is deterministic,
reproducible, and mirrors exactly when reference and hypothesis swap roles.
"""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyCollection, EmptyReference, MalformedRow, ZeroReference


def normalize_text(raw: str) -> list[str]:
    """Lowercase, strip Unicode punctuation, and whitespace-tokenize."""
    cleaned = []
    for ch in raw.lower():
        if unicodedata.category(ch).startswith("P"):
            continue
        cleaned.append(ch)
    return "".join(cleaned).split()


@dataclass(frozen=True)
class AlignmentCounts:
    """Error and match counts from one reference/hypothesis alignment.

    Invariants: N = S + D + C and len(hyp) = S + I + C; all counts >= 0.
    """

    S: int
    D: int
    I: int
    C: int
    N: int

    def __post_init__(self):
        if min(self.S, self.D, self.I, self.C, self.N) < 0:
            raise ValueError("alignment counts must be nonnegative")
        if self.N != self.S + self.D + self.C:
            raise ValueError("N must equal S + D + C")

    @property
    def error_count(self) -> int:
        return self.S + self.D + self.I


@dataclass(frozen=True)
class ScoredUtterance:
    """Alignment counts for one utterance, keyed for the audit join."""

    utterance_id: str
    counts: AlignmentCounts

    @property
    def error_count(self) -> int:
        return self.counts.error_count

    @property
    def wer(self) -> float:
        return wer(self.counts)


# Backtrace operations, in tie-break preference order.
_MATCH, _SUB, _DEL, _INS = 0, 1, 2, 3


def align(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentCounts:
    """Minimum-edit-distance alignment counts with unit S/D/I costs.

    S + D + I equals the token Levenshtein distance. Ties prefer match, then
    substitution; between deletion and insertion the preference follows a
    fixed orientation of the input pair, which flips when the arguments swap
    so that align(r, h) and align(h, r) trace mirror-image paths (D and I
    exchange roles, S and C agree).
    """
    if not ref:
        raise EmptyReference("reference token sequence is empty")
    m, n = len(ref), len(hyp)

    # A fixed del-before-ins order would not survive transposition: swapping
    # the inputs turns deletions into insertions, so the preference between
    # them must flip with the pair orientation or mirrored calls diverge on
    # cost ties.
    del_first = (m, tuple(ref)) > (n, tuple(hyp))

    # dist[i][j]: edit distance between ref[:i] and hyp[:j]
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    op = [[_INS] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        dist[i][0] = i
        op[i][0] = _DEL
    for j in range(1, n + 1):
        dist[0][j] = j
    for i in range(1, m + 1):
        row, prev = dist[i], dist[i - 1]
        for j in range(1, n + 1):
            if ref[i - 1] == hyp[j - 1]:
                diag_cost, diag_op = prev[j - 1], _MATCH
            else:
                diag_cost, diag_op = prev[j - 1] + 1, _SUB
            best, best_op = diag_cost, diag_op
            if del_first:
                if prev[j] + 1 < best:
                    best, best_op = prev[j] + 1, _DEL
                if row[j - 1] + 1 < best:
                    best, best_op = row[j - 1] + 1, _INS
            else:
                if row[j - 1] + 1 < best:
                    best, best_op = row[j - 1] + 1, _INS
                if prev[j] + 1 < best:
                    best, best_op = prev[j] + 1, _DEL
            row[j] = best
            op[i][j] = best_op

    s = d = ins = c = 0
    i, j = m, n
    while i > 0 or j > 0:
        o = op[i][j]
        if i > 0 and j > 0 and o == _MATCH:
            c += 1
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and o == _SUB:
            s += 1
            i -= 1
            j -= 1
        elif i > 0 and o == _DEL:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return AlignmentCounts(S=s, D=d, I=ins, C=c, N=m)


def wer(counts: AlignmentCounts) -> float:
    """(S + D + I) / N; may exceed 1 when insertions dominate."""
    if counts.N < 1:
        raise ZeroReference("WER is undefined for an empty reference")
    return counts.error_count / counts.N


def corpus_wer(scored: Iterable[ScoredUtterance]) -> float:
    """Pooled (micro-averaged) WER: total errors over total reference tokens."""
    total_errors = 0
    total_n = 0
    for s in scored:
        total_errors += s.error_count
        total_n += s.counts.N
    if total_n == 0:
        raise EmptyCollection("no scored utterances")
    return total_errors / total_n


def score_utterance(utterance_id: str, reference: str, hypothesis: str) -> ScoredUtterance:
    """Normalize both texts and align them."""
    return ScoredUtterance(
        utterance_id=utterance_id,
        counts=align(normalize_text(reference), normalize_text(hypothesis)),
    )


def load_transcripts(path: str | Path) -> dict[str, str]:
    """Load a `utterance_id,hypothesis` CSV into an id -> hypothesis map.

    Later rows for a repeated id win; missing ids surface downstream as
    MissingHypothesis entries in the audit summary.
    """
    path = Path(path)
    transcripts: dict[str, str] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"utterance_id", "hypothesis"} <= set(reader.fieldnames):
            raise MalformedRow(1, "transcript CSV needs utterance_id and hypothesis columns")
        for row in reader:
            utterance_id = (row.get("utterance_id") or "").strip()
            if not utterance_id:
                raise MalformedRow(reader.line_num, "empty utterance_id")
            transcripts[utterance_id] = row.get("hypothesis") or ""
    return transcripts
