"""Synthetic dataset generator: determinism, separability, validation."""

from __future__ import annotations

import time

import pytest

from aulamine.corpus import POLARITIES, filter_quality, load_comments
from aulamine.synth import (
    NEGATIVE_WORDS,
    NEUTRAL_WORDS,
    POSITIVE_WORDS,
    generate,
    polarity_distributions,
    write_dataset,
)


class TestDistributions:
    def test_zero_overlap_disjoint_support(self):
        dists = polarity_distributions(0.0)
        supports = [set(words) for words, _ in dists.values()]
        assert supports[0].isdisjoint(supports[1])
        assert supports[0].isdisjoint(supports[2])
        assert supports[1].isdisjoint(supports[2])

    def test_probabilities_normalized(self):
        for overlap in (0.0, 0.15, 0.5):
            for words, probs in polarity_distributions(overlap).values():
                assert len(words) == len(probs)
                assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_overlap_adds_shared_mass(self):
        dists = polarity_distributions(0.3)
        words, probs = dists["positive"]
        own = len(POSITIVE_WORDS)
        assert probs[own:].sum() == pytest.approx(0.3, abs=1e-12)

    def test_overlap_range_enforced(self):
        with pytest.raises(ValueError):
            polarity_distributions(-0.1)
        with pytest.raises(ValueError):
            polarity_distributions(1.0)

    def test_lexicons_disjoint(self):
        assert set(POSITIVE_WORDS).isdisjoint(NEUTRAL_WORDS)
        assert set(POSITIVE_WORDS).isdisjoint(NEGATIVE_WORDS)
        assert set(NEUTRAL_WORDS).isdisjoint(NEGATIVE_WORDS)


class TestGenerate:
    def test_shapes(self):
        data = generate(n_comments=60, n_courses=4, seed=0)
        assert len(data.comments) == 60
        assert len(data.courses) == 4
        assert set(data.labels) == {c.id for c in data.comments}
        assert set(data.labels.values()) <= set(POLARITIES)

    def test_every_comment_has_a_course(self):
        data = generate(n_comments=60, n_courses=4, seed=0)
        keys = {c.key for c in data.courses}
        for comment in data.comments:
            assert (comment.subject_code, comment.period) in keys

    def test_scores_two_decimals_in_range(self):
        data = generate(n_comments=100, n_courses=8, seed=1)
        for course in data.courses:
            for score in (course.score_pedagogy, course.score_evaluation,
                          course.score_interpersonal):
                assert 1.0 <= score <= 5.0
                assert score == round(score, 2)

    def test_some_comments_dropped_by_filter(self):
        data = generate(n_comments=200, n_courses=6, seed=2,
                        short_fraction=0.1)
        kept, dropped = filter_quality(data.comments)
        assert dropped
        assert len(kept) + len(dropped) == 200

    def test_all_three_labels_present(self):
        data = generate(n_comments=100, n_courses=6, seed=3)
        assert set(data.labels.values()) == set(POLARITIES)

    def test_validation(self):
        with pytest.raises(ValueError, match="n_comments"):
            generate(n_comments=29, n_courses=2, seed=0)
        with pytest.raises(ValueError, match="n_courses"):
            generate(n_comments=50, n_courses=0, seed=0)
        with pytest.raises(ValueError, match="correlation"):
            generate(n_comments=50, n_courses=2, seed=0, correlation=1.5)
        with pytest.raises(ValueError, match="n_topics"):
            generate(n_comments=50, n_courses=2, seed=0, n_topics=0)


class TestDeterminism:
    def test_same_seed_bitwise_identical_files(self, tmp_path):
        for name in ("a", "b"):
            data = generate(n_comments=80, n_courses=5, seed=7)
            write_dataset(tmp_path / name, data)
        for fname in ("comments.csv", "courses.csv", "labels.csv"):
            assert ((tmp_path / "a" / fname).read_bytes()
                    == (tmp_path / "b" / fname).read_bytes())

    def test_different_seed_differs(self):
        a = generate(n_comments=60, n_courses=4, seed=0)
        b = generate(n_comments=60, n_courses=4, seed=1)
        assert [c.text for c in a.comments] != [c.text for c in b.comments]

    def test_round_trip_through_csv(self, tmp_path):
        data = generate(n_comments=60, n_courses=4, seed=5)
        paths = write_dataset(tmp_path, data)
        loaded = load_comments(paths["comments"])
        assert [c.id for c in loaded] == [c.id for c in data.comments]
        assert [c.text for c in loaded] == [c.text for c in data.comments]


class TestScale:
    def test_five_thousand_comments_fast(self, tmp_path):
        start = time.monotonic()
        data = generate(n_comments=5000, n_courses=40, seed=42)
        write_dataset(tmp_path, data)
        elapsed = time.monotonic() - start
        assert len(data.comments) == 5000
        assert elapsed < 10.0, f"generation took {elapsed:.1f}s"
