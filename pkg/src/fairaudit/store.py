"""Durable audit persistence and the derived leaderboard ranking.

Layout: one JSON document per audit version under
`<root>/audits/<model_id>/<version>.json`, plus a derived `<root>/index.json`
that is regenerable from the documents alone. Writes are atomic
(write-temp-then-rename) and serialized behind a per-store lock; the ranking
is always derived, never stored as truth.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import IoFailure, NotFound
from .fairness import FAAS_PERFECT_ACCURACY, FAAS_ZERO_FAIRNESS

MODEL_ID_PATTERN = re.compile(r"^[A-Za-z0-9._/-]{1,128}$")


def validate_model_id(model_id: str) -> None:
    """Accept ids like `openai/whisper-medium`; refuse path escapes."""
    if not MODEL_ID_PATTERN.match(model_id):
        raise ValueError(f"invalid model_id {model_id!r}")
    segments = model_id.split("/")
    if any(seg in ("", ".", "..") for seg in segments):
        raise ValueError(f"model_id {model_id!r} contains unsafe path segments")


@dataclass(frozen=True)
class LeaderboardEntry:
    model_id: str
    faas: float | None
    faas_sentinel: str | None
    wer: float
    overall_score: float
    tier: str
    created_at: str
    version: int

    def sort_key(self):
        # FAAS descending; perfect-accuracy audits rank first and zero-fairness
        # audits last. Ties break by lower WER, then lexicographic model_id.
        if self.faas_sentinel == FAAS_PERFECT_ACCURACY:
            effective = float("inf")
        elif self.faas_sentinel == FAAS_ZERO_FAIRNESS or self.faas is None:
            effective = float("-inf")
        else:
            effective = self.faas
        return (-effective, self.wer, self.model_id)

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "faas": self.faas,
            "faas_sentinel": self.faas_sentinel,
            "wer": self.wer,
            "overall_score": self.overall_score,
            "tier": self.tier,
            "created_at": self.created_at,
            "version": self.version,
        }


def dump_json(doc: dict) -> str:
    """Canonical JSON used everywhere: sorted keys, stable float repr."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


class AuditStore:
    """File-backed audit store; safe for threads within one process."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.audits_dir = self.root / "audits"
        self.index_path = self.root / "index.json"
        self._lock = threading.Lock()
        self.audits_dir.mkdir(parents=True, exist_ok=True)

    # -- writes --------------------------------------------------------------

    def save_audit(self, doc: dict) -> str:
        """Persist an audit document atomically; returns `model_id@version`.

        Resubmitting a model_id writes the next version; earlier versions stay
        on disk as the archive and the index points at the latest.
        """
        model_id = doc.get("model_id")
        if not isinstance(model_id, str):
            raise ValueError("audit document lacks model_id")
        validate_model_id(model_id)
        with self._lock:
            model_dir = self.audits_dir / model_id
            try:
                model_dir.mkdir(parents=True, exist_ok=True)
                version = self._latest_version(model_dir) + 1
                target = model_dir / f"v{version:04d}.json"
                self._atomic_write(target, dump_json(doc))
                self._rewrite_index()
            except OSError as exc:
                raise IoFailure(str(exc)) from exc
            return f"{model_id}@v{version:04d}"

    def _atomic_write(self, target: Path, text: str) -> None:
        tmp = target.with_name(target.name + ".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)

    @staticmethod
    def _latest_version(model_dir: Path) -> int:
        versions = [
            int(p.stem[1:])
            for p in model_dir.glob("v*.json")
            if p.stem[1:].isdigit()
        ]
        return max(versions, default=0)

    # -- reads ---------------------------------------------------------------

    def get_audit(self, model_id: str, version: int | None = None) -> dict:
        """Latest stored document for a model, or a specific archived version."""
        validate_model_id(model_id)
        model_dir = self.audits_dir / model_id
        if version is None:
            version = self._latest_version(model_dir)
            if version == 0:
                raise NotFound(model_id)
        path = model_dir / f"v{version:04d}.json"
        if not path.exists():
            raise NotFound(f"{model_id}@v{version:04d}")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IoFailure(str(exc)) from exc

    def list_versions(self, model_id: str) -> list[int]:
        validate_model_id(model_id)
        model_dir = self.audits_dir / model_id
        return sorted(
            int(p.stem[1:]) for p in model_dir.glob("v*.json") if p.stem[1:].isdigit()
        )

    def list_leaderboard(self) -> list[LeaderboardEntry]:
        """All latest audits, sorted by FAAS descending with tie-breaks."""
        entries = [self._entry_for(model_id) for model_id in self._model_ids()]
        entries.sort(key=lambda e: e.sort_key())
        return entries

    def _model_ids(self) -> list[str]:
        ids = []
        if not self.audits_dir.exists():
            return ids
        for path in self.audits_dir.rglob("v*.json"):
            if path.stem[1:].isdigit():
                model_id = str(path.parent.relative_to(self.audits_dir))
                if model_id not in ids:
                    ids.append(model_id)
        return sorted(ids)

    def _entry_for(self, model_id: str) -> LeaderboardEntry:
        model_dir = self.audits_dir / model_id
        version = self._latest_version(model_dir)
        doc = self.get_audit(model_id, version)
        return LeaderboardEntry(
            model_id=model_id,
            faas=doc.get("faas"),
            faas_sentinel=doc.get("faas_sentinel"),
            wer=doc["wer"],
            overall_score=doc["overall_score"],
            tier=doc["tier"],
            created_at=doc["created_at"],
            version=version,
        )

    # -- derived index ---------------------------------------------------------

    def _rewrite_index(self) -> None:
        index = {
            "entries": [e.to_dict() for e in self.list_leaderboard()],
        }
        self._atomic_write(self.index_path, dump_json(index))

    def rebuild_index(self) -> None:
        """Regenerate index.json from the audit documents (ranking is derived)."""
        with self._lock:
            try:
                self._rewrite_index()
            except OSError as exc:
                raise IoFailure(str(exc)) from exc

    def etag(self) -> str:
        """Cheap change token for leaderboard polling."""
        try:
            payload = self.index_path.read_bytes()
        except FileNotFoundError:
            payload = b""
        return hashlib.sha256(payload).hexdigest()[:32]
