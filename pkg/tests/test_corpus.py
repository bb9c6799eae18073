import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairaudit.corpus import (
    Corpus,
    DemographicProfile,
    UtteranceRecord,
    corpus_stats,
    entropy,
    load_corpus,
    save_corpus,
    stratified_sample,
    stratum_count,
)
from fairaudit.errors import DuplicateId, EmptyCorpus, MalformedRow, UnknownAttribute
from fairaudit.simulate import synthetic_corpus

from conftest import write_corpus_csv


def make_corpus(levels_by_attr, n_per_combo=1):
    """Build a corpus whose gender column cycles through the given labels."""
    records = []
    i = 0
    for gender in levels_by_attr:
        for _ in range(n_per_combo):
            records.append(UtteranceRecord(
                utterance_id=f"u{i}",
                speaker_id=f"s{i}",
                reference="one two three",
                duration_s=1.0,
                profile=DemographicProfile.from_raw(gender, "english", "middle", "white"),
            ))
            i += 1
    return Corpus(records=tuple(records))


class TestLoadCorpus:
    def test_well_formed_file(self, tiny_corpus):
        assert len(tiny_corpus) == 3
        assert [r.utterance_id for r in tiny_corpus] == ["u1", "u2", "u3"]

    def test_labels_case_normalized_and_unknowns(self, tiny_corpus):
        u1, _, u3 = tiny_corpus.records
        assert u1.profile.gender == "female"  # "Female" in the file
        assert u3.profile.age_band == "unknown"
        assert u3.duration_s is None

    def test_duplicate_id_rejected(self, tmp_path, tiny_corpus_rows):
        rows = tiny_corpus_rows + [dict(tiny_corpus_rows[0])]
        path = write_corpus_csv(tmp_path / "dup.csv", rows)
        with pytest.raises(DuplicateId):
            load_corpus(path)

    def test_empty_reference_rejected(self, tmp_path, tiny_corpus_rows):
        rows = tiny_corpus_rows + [{
            "utterance_id": "u4", "speaker_id": "s4", "reference": "!!! ...",
            "gender": "male", "first_language": "english",
            "socioeconomic_bkg": "middle", "ethnicity": "white",
        }]
        path = write_corpus_csv(tmp_path / "bad.csv", rows)
        with pytest.raises(MalformedRow):
            load_corpus(path)

    def test_empty_file_rejected(self, tmp_path):
        path = write_corpus_csv(tmp_path / "empty.csv", [])
        with pytest.raises(EmptyCorpus):
            load_corpus(path)

    def test_bad_duration_rejected(self, tmp_path, tiny_corpus_rows):
        rows = [dict(tiny_corpus_rows[0], duration_s="-3")]
        path = write_corpus_csv(tmp_path / "neg.csv", rows)
        with pytest.raises(MalformedRow):
            load_corpus(path)

    def test_save_load_roundtrip(self, tmp_path, tiny_corpus):
        out = tmp_path / "roundtrip.csv"
        save_corpus(tiny_corpus, out)
        again = load_corpus(out)
        assert again.records == tiny_corpus.records


class TestEntropy:
    def test_single_category_is_zero(self):
        corpus = make_corpus(["female"] * 5)
        assert entropy(corpus, "gender") == 0.0

    def test_four_equal_categories(self):
        corpus = make_corpus(["a", "b", "c", "d"], n_per_combo=3)
        assert entropy(corpus, "gender") == pytest.approx(2.0)

    def test_52_48_split(self):
        # oracle: -(0.52 log2 0.52 + 0.48 log2 0.48) computed independently
        corpus = make_corpus(["female"] * 52 + ["male"] * 48)
        assert entropy(corpus, "gender") == pytest.approx(0.9988455359952018, abs=1e-12)

    def test_unknown_attribute(self, tiny_corpus):
        with pytest.raises(UnknownAttribute):
            entropy(tiny_corpus, "favorite_color")

    def test_unknown_is_a_category(self):
        corpus = make_corpus(["female", ""])
        assert entropy(corpus, "gender") == pytest.approx(1.0)

    @given(st.permutations(["a"] * 3 + ["b"] * 5 + ["c"] * 2))
    def test_permutation_invariant(self, labels):
        assert entropy(make_corpus(labels), "gender") == pytest.approx(
            entropy(make_corpus(sorted(labels)), "gender")
        )

    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=4))
    def test_uniform_is_maximal(self, k, n_per):
        labels = [f"lv{i}" for i in range(k)]
        uniform = entropy(make_corpus(labels, n_per_combo=n_per), "gender")
        assert uniform == pytest.approx(math.log2(k))
        skewed = entropy(make_corpus(labels + ["lv0"] * 3, n_per_combo=n_per), "gender")
        assert skewed <= uniform + 1e-12


class TestStratifiedSample:
    def test_fraction_one_is_identity(self, tiny_corpus):
        sampled = stratified_sample(tiny_corpus, 1.0, seed=9)
        assert sampled.records == tiny_corpus.records

    def test_same_seed_same_output(self):
        corpus = synthetic_corpus(500, 40, seed=1)
        a = stratified_sample(corpus, 0.25, seed=4)
        b = stratified_sample(corpus, 0.25, seed=4)
        assert a.records == b.records

    def test_different_seed_usually_differs(self):
        corpus = synthetic_corpus(500, 40, seed=1)
        a = stratified_sample(corpus, 0.25, seed=4)
        b = stratified_sample(corpus, 0.25, seed=5)
        assert a.records != b.records

    def test_per_stratum_size(self):
        corpus = make_corpus(["a"] * 20 + ["b"] * 7 + ["c"] * 1)
        sampled = stratified_sample(corpus, 0.5, seed=0)
        from collections import Counter
        by_level = Counter(r.profile.gender for r in sampled)
        assert by_level == {"a": 10, "b": 4, "c": 1}  # round(3.5)=4, singleton kept

    def test_minimum_one_per_stratum(self):
        corpus = make_corpus(["a"] * 30 + ["b"])
        sampled = stratified_sample(corpus, 0.1, seed=0)
        assert any(r.profile.gender == "b" for r in sampled)

    def test_fraction_out_of_range(self, tiny_corpus):
        with pytest.raises(ValueError):
            stratified_sample(tiny_corpus, 0.0, seed=0)
        with pytest.raises(ValueError):
            stratified_sample(tiny_corpus, 1.5, seed=0)

    def test_output_preserves_corpus_order(self):
        corpus = synthetic_corpus(300, 30, seed=2)
        sampled = stratified_sample(corpus, 0.3, seed=7)
        ids = [r.utterance_id for r in sampled]
        assert ids == sorted(ids)  # synthetic ids are zero-padded and ordered

    def test_entropy_preserved_on_big_corpus(self):
        corpus = synthetic_corpus(8000, 250, seed=3)
        sampled = stratified_sample(corpus, 0.1, seed=1)
        for attribute in ("gender", "first_language", "socioeconomic_bkg", "ethnicity"):
            delta = abs(entropy(corpus, attribute) - entropy(sampled, attribute))
            assert delta <= 0.02, f"{attribute}: delta {delta}"


class TestCorpusStats:
    def test_all_unknown_entropy_zero(self):
        corpus = make_corpus(["", "", ""])
        stats = corpus_stats(corpus)
        assert stats.entropies["gender"] == 0.0

    def test_duration_totals(self):
        records = tuple(
            UtteranceRecord(
                utterance_id=f"u{i}", speaker_id="s", reference="a b",
                duration_s=7.42,
                profile=DemographicProfile.from_raw("f", "e", "m", "w"),
            )
            for i in range(26471)
        )
        stats = corpus_stats(Corpus(records=records))
        assert stats.total_duration_hrs == pytest.approx(54.56, abs=0.01)

    def test_stratum_count(self, tiny_corpus):
        assert stratum_count(tiny_corpus) == 2
