import csv
from pathlib import Path

import pytest

from fairaudit.corpus import load_corpus

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines after capture ends."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

CORPUS_HEADER = [
    "utterance_id", "speaker_id", "reference", "duration_s",
    "gender", "first_language", "socioeconomic_bkg", "ethnicity", "age_band",
]


def write_corpus_csv(path: Path, rows: list[dict]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CORPUS_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in CORPUS_HEADER})
    return path


def write_transcript_csv(path: Path, hypotheses: dict[str, str]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["utterance_id", "hypothesis"])
        for utterance_id, hyp in hypotheses.items():
            writer.writerow([utterance_id, hyp])
    return path


@pytest.fixture
def tiny_corpus_rows():
    return [
        {"utterance_id": "u1", "speaker_id": "s1", "reference": "Hello, World!",
         "duration_s": "2.0", "gender": "Female", "first_language": "english",
         "socioeconomic_bkg": "middle", "ethnicity": "white", "age_band": "18-30"},
        {"utterance_id": "u2", "speaker_id": "s1", "reference": "the cat sat",
         "duration_s": "1.5", "gender": "female", "first_language": "english",
         "socioeconomic_bkg": "middle", "ethnicity": "white", "age_band": "18-30"},
        {"utterance_id": "u3", "speaker_id": "s2", "reference": "it's 5 o'clock",
         "duration_s": "", "gender": "male", "first_language": "spanish",
         "socioeconomic_bkg": "low", "ethnicity": "black", "age_band": ""},
    ]


@pytest.fixture
def tiny_corpus(tmp_path, tiny_corpus_rows):
    path = write_corpus_csv(tmp_path / "corpus.csv", tiny_corpus_rows)
    return load_corpus(path)
