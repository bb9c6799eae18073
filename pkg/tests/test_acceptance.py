"""Acceptance criteria, one test per criterion.

Each test prints a single `ACCEPTANCE <name>: PASS|FAIL` line on the real
stdout (bypassing capture) so a plain `pytest tests/test_acceptance.py` run
shows the verdict table. Every tolerance is pinned here, not configurable.
"""

import json
import math
import os
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from fairaudit.alignment import align
from fairaudit.corpus import (
    DEMOGRAPHIC_ATTRIBUTES,
    entropy,
    save_corpus,
    stratified_sample,
    stratum_count,
)
from fairaudit.fairness import (
    AuditConfig,
    adjusted_score,
    faas,
    raw_fairness_scores,
    run_audit,
)
from fairaudit.glmm import DesignSpec, build_design, fit_poisson_glmm, lrt, reduced_design
from fairaudit.simulate import corrupt_transcripts, simulate_error_counts, synthetic_corpus

import conftest
from conftest import write_transcript_csv
from test_glmm import oracle_irls_poisson, oracle_poisson_loglik


def report(name: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    line = f"ACCEPTANCE {name}: {verdict}{suffix}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)
    assert ok, f"{name}: {detail}"


def brute_edit_distance(ref, hyp):
    prev = list(range(len(hyp) + 1))
    for i in range(1, len(ref) + 1):
        cur = [i] + [0] * len(hyp)
        for j in range(1, len(hyp) + 1):
            cur[j] = min(
                prev[j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1),
                prev[j] + 1,
                cur[j - 1] + 1,
            )
        prev = cur
    return prev[len(hyp)]


def test_wer_oracle_equivalence():
    rng = random.Random(20260810)
    start = time.monotonic()
    mismatches = 0
    for _ in range(1000):
        ref = [rng.choice("abcd") for _ in range(rng.randint(1, 8))]
        hyp = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
        if align(ref, hyp).error_count != brute_edit_distance(ref, hyp):
            mismatches += 1
    elapsed = time.monotonic() - start
    report(
        "wer-oracle-equivalence",
        mismatches == 0 and elapsed < 5.0,
        f"mismatches={mismatches}, elapsed={elapsed:.2f}s",
    )


def test_alignment_count_conservation():
    rng = random.Random(77)
    violations = 0
    for _ in range(10_000):
        ref = [rng.choice("abcd") for _ in range(rng.randint(1, 8))]
        hyp = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
        c = align(ref, hyp)
        if c.N != c.S + c.D + c.C or len(hyp) != c.S + c.I + c.C or c.N != len(ref):
            violations += 1
    report("alignment-count-conservation", violations == 0, f"violations={violations}")


def test_glmm_parameter_recovery():
    start = time.monotonic()
    rows, truth = simulate_error_counts(
        n_speakers=500, utterances_per_speaker=5,
        beta0=-2.0, effect=0.3, sigma_u=0.5, seed=42, ref_len_range=(5, 20),
    )
    design = build_design(rows, DesignSpec(attribute="sim", merge_threshold=1))
    model = fit_poisson_glmm(design)
    elapsed = time.monotonic() - start

    checks = {
        "beta0": abs(model.beta0 - truth.beta0) <= 0.1,
        "effect": abs(model.beta_g["b"] - truth.effect) <= 0.1,
        "beta_logref": abs(model.beta_logref - 0.0) <= 0.1,
        "sigma_u": abs(model.sigma_u - truth.sigma_u) <= 0.15,
        "converged": model.converged,
        "runtime": elapsed < 60.0,
    }

    # Independent oracle for the sigma_u = 0 slice: a plain Poisson GLM fit by
    # a standalone IRLS must agree with the fitter when sigma is pinned at 0.
    rows0, _ = simulate_error_counts(200, 5, beta0=-2.0, effect=0.3, sigma_u=0.0, seed=43)
    design0 = build_design(rows0, DesignSpec(attribute="sim", merge_threshold=1))
    model0 = fit_poisson_glmm(design0)
    F = np.column_stack([np.ones(design0.n_rows), design0.X])
    beta_oracle = oracle_irls_poisson(F, design0.y, design0.offset)
    if model0.sigma_u == 0.0:
        fitted0 = np.array([model0.beta0, model0.beta_g["b"], model0.beta_logref])
        checks["irls_oracle"] = bool(
            np.allclose(fitted0, beta_oracle, atol=1e-6)
            and abs(model0.loglik - oracle_poisson_loglik(F, design0.y, design0.offset, beta_oracle)) < 1e-6
        )
    else:
        # Fitted sigma drifted off zero: the plain-GLM loglik at the oracle
        # betas must not beat the mixed fit (the GLM is nested within it).
        checks["irls_oracle"] = (
            model0.loglik >= oracle_poisson_loglik(F, design0.y, design0.offset, beta_oracle) - 1e-6
        )

    detail = (
        f"beta0={model.beta0:.3f}/-2.0 effect={model.beta_g['b']:.3f}/0.3 "
        f"sigma={model.sigma_u:.3f}/0.5 elapsed={elapsed:.1f}s "
        + " ".join(k for k, ok in checks.items() if not ok)
    )
    report("glmm-parameter-recovery", all(checks.values()), detail.strip())


def test_lrt_null_calibration():
    p_values = []
    for rep in range(200):
        rows, _ = simulate_error_counts(
            n_speakers=60, utterances_per_speaker=4,
            beta0=-2.0, effect=0.0, sigma_u=0.5, seed=1000 + rep,
        )
        design = build_design(rows, DesignSpec(attribute="sim", merge_threshold=1))
        full = fit_poisson_glmm(design)
        reduced = fit_poisson_glmm(reduced_design(design))
        p_values.append(lrt(full, reduced, df=1).p_value)

    ps = np.sort(p_values)
    n = len(ps)
    ks = max(
        float(np.max(np.arange(1, n + 1) / n - ps)),
        float(np.max(ps - np.arange(0, n) / n)),
    )
    report("lrt-null-calibration", ks < 0.1, f"KS={ks:.4f} over {n} replications")


def test_scoring_cascade_arithmetic():
    checks = {
        "faas(50,0.5)": abs(faas(50.0, 0.5) - 20.0) <= 1e-9,
        "faas(100,0.01)": abs(faas(100.0, 0.01) - 40.0) <= 1e-9,
        "adjusted(80,0.025)": adjusted_score(80.0, 0.025) == 40.0,
    }
    scores = raw_fairness_scores({"a": 0.08, "b": 0.13, "c": 0.21, "d": 0.17})
    checks["raw-endpoints"] = scores["a"] == 100.0 and scores["c"] == 0.0
    report(
        "scoring-cascade-arithmetic",
        all(checks.values()),
        " ".join(k for k, ok in checks.items() if not ok) or "all exact",
    )


def test_sampling_fidelity():
    corpus = synthetic_corpus(26_471, 593, seed=7)
    n_strata = stratum_count(corpus)
    sample = stratified_sample(corpus, 0.1, seed=11)

    size_ok = abs(len(sample) - 2_647) <= n_strata
    deltas = {
        a: abs(entropy(corpus, a) - entropy(sample, a)) for a in DEMOGRAPHIC_ATTRIBUTES
    }
    entropy_ok = all(d <= 0.02 for d in deltas.values())
    worst = max(deltas, key=deltas.get)
    report(
        "sampling-fidelity",
        size_ok and entropy_ok,
        f"size={len(sample)} (target 2647 ± {n_strata}), "
        f"worst delta {worst}={deltas[worst]:.4f}",
    )


def test_end_to_end_disparity_detection():
    corpus = synthetic_corpus(1000, 200, seed=3)

    planted = corrupt_transcripts(corpus, seed=5, disparity={("gender", "male"): 1.5})
    result = run_audit(corpus, planted, "planted")
    gender = next(c for c in result.categories if c.attribute == "gender")
    planted_ok = gender.lrt.p_value < 0.05 and gender.adjusted_score < gender.category_score

    control_config = AuditConfig(attributes=("gender",))
    calm = 0
    for seed in range(20):
        hypotheses = corrupt_transcripts(corpus, seed=100 + seed)
        control = run_audit(corpus, hypotheses, "control", control_config)
        if control.categories[0].lrt.p_value >= 0.05:
            calm += 1
    control_ok = calm >= 18  # >= 90% of 20 runs

    report(
        "end-to-end-disparity-detection",
        planted_ok and control_ok,
        f"planted p={gender.lrt.p_value:.2e}, control calm {calm}/20",
    )


def test_cli_audit_determinism(tmp_path):
    corpus = synthetic_corpus(300, 60, seed=83)
    save_corpus(corpus, tmp_path / "corpus.csv")
    write_transcript_csv(tmp_path / "hyp.csv", corrupt_transcripts(corpus, seed=89))

    dumps = []
    for name in ("one.json", "two.json"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "fairaudit", "audit",
             "--corpus", str(tmp_path / "corpus.csv"),
             "--transcripts", str(tmp_path / "hyp.csv"),
             "--model-id", "determinism-check", "--out", str(out)],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(out.read_text())
        doc.pop("created_at")
        dumps.append(json.dumps(doc, sort_keys=True))
    report("cli-audit-determinism", dumps[0] == dumps[1],
           f"{len(dumps[0])} bytes compared")


def test_service_round_trip_and_atomicity(tmp_path, monkeypatch):
    import io

    from fastapi.testclient import TestClient

    import fairaudit.store as store_mod
    from fairaudit.service import create_app
    from fairaudit.store import AuditStore, dump_json

    corpus = synthetic_corpus(240, 60, seed=41)
    store = AuditStore(tmp_path / "store")
    app = create_app(corpus, store)

    def csv_bytes(hypotheses):
        lines = ["utterance_id,hypothesis"]
        lines += [f'{k},"{v}"' for k, v in hypotheses.items()]
        return "\n".join(lines).encode()

    with TestClient(app) as client:
        for model_id, seed, rate in (("clean", 43, 0.08), ("noisy", 47, 0.30)):
            hyp = corrupt_transcripts(corpus, seed=seed, base_token_error_rate=rate)
            response = client.post(
                "/api/submit", data={"model_id": model_id},
                files={"transcripts": ("t.csv", io.BytesIO(csv_bytes(hyp)), "text/csv")},
            )
            assert response.status_code == 202
            job_id = response.json()["job_id"]
            deadline = time.time() + 60
            while time.time() < deadline:
                job = client.get(f"/api/status/{job_id}").json()
                if job["state"] in ("done", "failed"):
                    break
                time.sleep(0.05)
            assert job["state"] == "done", job

        board = client.get("/api/leaderboard").json()
        faas_values = [e["faas"] for e in board]
        ranking_ok = (
            [e["model_id"] for e in board] == ["clean", "noisy"]
            and faas_values == sorted(faas_values, reverse=True)
        )

    # Fault injection: crash between temp-write and rename must leave the
    # previously stored audits untouched.
    before = {m: dump_json(store.get_audit(m)) for m in ("clean", "noisy")}

    def exploding_replace(src, dst):
        os.unlink(src)
        raise OSError("simulated crash during rename")

    monkeypatch.setattr(store_mod.os, "replace", exploding_replace)
    crashed = False
    try:
        store.save_audit({"model_id": "clean", "faas": 99.0, "wer": 0.0,
                          "overall_score": 100.0, "tier": "exemplarily fair",
                          "created_at": "x", "faas_sentinel": None})
    except Exception:
        crashed = True
    monkeypatch.undo()

    after = {m: dump_json(store.get_audit(m)) for m in ("clean", "noisy")}
    atomic_ok = crashed and before == after
    board_after = [e.model_id for e in store.list_leaderboard()]

    report(
        "service-round-trip-atomicity",
        ranking_ok and atomic_ok and board_after == ["clean", "noisy"],
        f"ranking_ok={ranking_ok} atomic_ok={atomic_ok}",
    )
