#!/usr/bin/env python3
"""Generate a synthetic corpus plus transcript files for local experiments.

Writes three CSVs into the output directory: the reference corpus, a
perfect-transcript submission, and a submission with a planted gender
disparity. Handy for driving the CLI and the web service by hand:

    python scripts/make_fixtures.py --out fixtures --records 2000 --speakers 300
    fairaudit audit --corpus fixtures/corpus.csv \
        --transcripts fixtures/disparity.csv --model-id demo-biased
"""

import argparse
import csv
from pathlib import Path

from fairaudit.corpus import save_corpus
from fairaudit.simulate import corrupt_transcripts, perfect_transcripts, synthetic_corpus


def write_transcripts(path: Path, hypotheses: dict[str, str]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["utterance_id", "hypothesis"])
        for utterance_id, hyp in hypotheses.items():
            writer.writerow([utterance_id, hyp])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures")
    parser.add_argument("--records", type=int, default=2000)
    parser.add_argument("--speakers", type=int, default=300)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--disparity-level", default="male")
    parser.add_argument("--disparity-mult", type=float, default=1.5)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    corpus = synthetic_corpus(args.records, args.speakers, seed=args.seed)
    save_corpus(corpus, out / "corpus.csv")
    write_transcripts(out / "perfect.csv", perfect_transcripts(corpus))
    write_transcripts(
        out / "disparity.csv",
        corrupt_transcripts(
            corpus,
            seed=args.seed + 1,
            disparity={("gender", args.disparity_level): args.disparity_mult},
        ),
    )
    write_transcripts(out / "control.csv", corrupt_transcripts(corpus, seed=args.seed + 2))
    print(f"wrote corpus.csv, perfect.csv, disparity.csv, control.csv under {out}/")


if __name__ == "__main__":
    main()
