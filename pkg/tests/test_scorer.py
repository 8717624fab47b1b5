"""Bucket thresholds, boosted-tree training, course feature assembly."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aulamine.bundles import BundleError
from aulamine.corpus import Comment, CourseRecord
from aulamine.metrics import confusion, macro_accuracy
from aulamine.polarity import PolarityClassifier
from aulamine.scorer import (
    BUCKETS,
    CourseFeatures,
    GradientBoostedScorer,
    bucketize,
    build_features,
)
from aulamine.textprep import TokenizedDoc
from aulamine.topics import LatentTopicModel

from conftest import make_comments


class TestBucketize:
    def test_interior_points(self):
        assert bucketize(4.7) == "very_high"
        assert bucketize(4.2) == "high"
        assert bucketize(3.5) == "moderate"

    def test_boundaries(self):
        assert bucketize(4.5) == "very_high"
        assert bucketize(5.0) == "very_high"
        assert bucketize(4.0) == "high"
        assert bucketize(4.499) == "high"
        assert bucketize(3.999) == "moderate"
        assert bucketize(1.0) == "moderate"

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            bucketize(0.99)
        with pytest.raises(ValueError):
            bucketize(5.01)

    @given(st.floats(min_value=1.0, max_value=5.0, allow_nan=False))
    def test_partition(self, score):
        bucket = bucketize(score)
        assert bucket in BUCKETS
        if score >= 4.5:
            assert bucket == "very_high"
        elif score >= 4.0:
            assert bucket == "high"
        else:
            assert bucket == "moderate"


def clustered_courses(n_per_bucket=12, seed=0):
    """Features clustered per bucket with margins exceeding the noise."""
    rng = np.random.default_rng(seed)
    centers = {"very_high": (4.0, 0.0), "high": (0.0, 4.0),
               "moderate": (-4.0, -4.0)}
    xs, ys = [], []
    for bucket in BUCKETS:
        cx, cy = centers[bucket]
        for _ in range(n_per_bucket):
            xs.append([cx + rng.normal(0, 0.3), cy + rng.normal(0, 0.3)])
            ys.append(bucket)
    return np.asarray(xs, dtype=np.float64), ys


class TestBoosting:
    def test_separable_training_accuracy(self):
        x, y = clustered_courses()
        model = GradientBoostedScorer(n_rounds=20, max_depth=3).fit(x, y)
        predicted = model.predict(x)
        cm = confusion(y, predicted, classes=BUCKETS)
        assert macro_accuracy(cm, classes=BUCKETS) == pytest.approx(1.0)

    def test_zero_rounds_uniform(self):
        x, y = clustered_courses(n_per_bucket=3)
        model = GradientBoostedScorer(n_rounds=0).fit(x, y)
        probs = model.predict_proba(x[:5])
        np.testing.assert_array_equal(probs, np.full((5, 3), 1.0 / 3.0))

    def test_duplicate_rows_identical_predictions(self):
        x, y = clustered_courses(n_per_bucket=5)
        model = GradientBoostedScorer(n_rounds=10).fit(x, y)
        row = x[4:5]
        stacked = np.vstack([row, row, row])
        probs = model.predict_proba(stacked)
        np.testing.assert_array_equal(probs[0], probs[1])
        np.testing.assert_array_equal(probs[0], probs[2])

    def test_log_loss_non_increasing(self):
        x, y = clustered_courses()
        model = GradientBoostedScorer(n_rounds=40).fit(x, y)
        losses = model.training_log_loss_
        assert len(losses) == 41
        assert losses[0] == pytest.approx(np.log(3.0), abs=1e-12)
        for earlier, later in zip(losses, losses[1:]):
            assert later <= earlier + 1e-9

    def test_single_bucket_rejected(self):
        x = np.zeros((4, 2))
        with pytest.raises(ValueError, match="single bucket"):
            GradientBoostedScorer().fit(x, ["high"] * 4)

    def test_unknown_bucket_rejected(self):
        x = np.zeros((2, 2))
        with pytest.raises(ValueError, match="unknown bucket"):
            GradientBoostedScorer().fit(x, ["high", "low"])

    def test_dimension_mismatch_at_predict(self):
        x, y = clustered_courses(n_per_bucket=3)
        model = GradientBoostedScorer(n_rounds=2).fit(x, y)
        with pytest.raises(ValueError):
            model.predict(np.zeros((2, 5)))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GradientBoostedScorer().fit(np.zeros((3, 2)), ["high", "moderate"])

    def test_invalid_hyperparams(self):
        x, y = clustered_courses(n_per_bucket=3)
        with pytest.raises(ValueError):
            GradientBoostedScorer(n_rounds=-1).fit(x, y)
        with pytest.raises(ValueError):
            GradientBoostedScorer(max_depth=0).fit(x, y)
        with pytest.raises(ValueError):
            GradientBoostedScorer(learning_rate=0.0).fit(x, y)

    def test_deterministic_refit(self):
        x, y = clustered_courses()
        a = GradientBoostedScorer(n_rounds=15).fit(x, y)
        b = GradientBoostedScorer(n_rounds=15).fit(x, y)
        np.testing.assert_array_equal(a.predict_proba(x), b.predict_proba(x))
        assert a.training_log_loss_ == b.training_log_loss_

    def test_get_params_round_trip(self):
        model = GradientBoostedScorer(n_rounds=7, max_depth=2,
                                      learning_rate=0.2, seed=3)
        params = model.get_params()
        rebuilt = GradientBoostedScorer(**params)
        assert rebuilt.get_params() == params


class TestBundle:
    def test_round_trip_bitwise(self, tmp_path):
        x, y = clustered_courses()
        model = GradientBoostedScorer(n_rounds=12).fit(x, y)
        model.save(tmp_path / "scorer")
        loaded = GradientBoostedScorer.load(tmp_path / "scorer")
        np.testing.assert_array_equal(
            loaded.decision_scores(x), model.decision_scores(x))
        assert loaded.predict(x) == model.predict(x)
        assert loaded.get_params() == model.get_params()

    def test_truncated_nodes_rejected(self, tmp_path):
        x, y = clustered_courses(n_per_bucket=4)
        model = GradientBoostedScorer(n_rounds=3).fit(x, y)
        model.save(tmp_path / "scorer")
        target = tmp_path / "scorer" / "node_feature.bin"
        data = target.read_bytes()
        target.write_bytes(data[: len(data) // 2])
        with pytest.raises(BundleError):
            GradientBoostedScorer.load(tmp_path / "scorer")


def tiny_models():
    texts_labels = [
        ("la clase fue excelente y muy clara", "positive"),
        ("explica excelente siempre claro", "positive"),
        ("el curso fue normal sin mas", "neutral"),
        ("normal el ritmo sin cambios", "neutral"),
        ("pesimo curso muy confuso", "negative"),
        ("confuso y pesimo el material", "negative"),
    ]
    comments = make_comments(texts_labels)
    clf = PolarityClassifier(dim=6, epochs=3, seed=0).fit(
        [t for t, _ in texts_labels], [l for _, l in texts_labels])
    docs = [TokenizedDoc(c.id, preprocess_tokens(clf, c.text)) for c in comments]
    topics = LatentTopicModel(n_topics=2, iterations=20, seed=0).fit(docs)
    return clf, topics, comments


def preprocess_tokens(clf, text):
    from aulamine.textprep import preprocess

    return preprocess(text, clf._config()).tokens


def course(subject, period="2024-1", score=4.2):
    return CourseRecord(
        subject_code=subject, period=period, num_students=30,
        score_pedagogy=score, score_evaluation=score,
        score_interpersonal=score, education_level="undergraduate",
    )


class TestBuildFeatures:
    def test_single_comment_equals_embed_doc(self):
        clf, topics, comments = tiny_models()
        c = comments[0]
        courses = [course(c.subject_code, c.period)]
        feats, skipped = build_features(courses, [c], clf, topics)
        assert skipped == []
        assert len(feats) == 1
        doc = TokenizedDoc(c.id, preprocess_tokens(clf, c.text))
        np.testing.assert_array_equal(feats[0].embedding, clf.embed_doc(doc))
        assert feats[0].n_comments == 1

    def test_two_comments_mean(self):
        clf, topics, comments = tiny_models()
        a, b = comments[0], comments[1]
        pair = [
            Comment(id=a.id, subject_code="S1", period="2024-1", text=a.text,
                    label=a.label),
            Comment(id=b.id, subject_code="S1", period="2024-1", text=b.text,
                    label=b.label),
        ]
        feats, _ = build_features([course("S1")], pair, clf, topics)
        docs = [TokenizedDoc(c.id, preprocess_tokens(clf, c.text)) for c in pair]
        expected = (clf.embed_doc(docs[0]) + clf.embed_doc(docs[1])) / 2.0
        np.testing.assert_allclose(feats[0].embedding, expected, atol=1e-12)

    def test_course_without_comments_skipped(self):
        clf, topics, comments = tiny_models()
        c = comments[0]
        courses = [course(c.subject_code, c.period), course("GHOST")]
        feats, skipped = build_features(courses, [c], clf, topics)
        assert len(feats) == 1
        assert skipped == [("GHOST", "2024-1")]

    def test_comment_order_irrelevant(self):
        clf, topics, comments = tiny_models()
        pair = [
            Comment(id="x1", subject_code="S1", period="2024-1",
                    text=comments[0].text, label=None),
            Comment(id="x2", subject_code="S1", period="2024-1",
                    text=comments[2].text, label=None),
        ]
        feats_ab, _ = build_features([course("S1")], pair, clf, topics)
        feats_ba, _ = build_features([course("S1")], pair[::-1], clf, topics)
        np.testing.assert_allclose(
            feats_ab[0].embedding, feats_ba[0].embedding, atol=1e-12)
        np.testing.assert_allclose(
            feats_ab[0].topic_probs, feats_ba[0].topic_probs, atol=1e-12)

    def test_topic_probs_normalized(self):
        clf, topics, comments = tiny_models()
        courses = [course(c.subject_code, c.period) for c in comments]
        feats, _ = build_features(courses, comments, clf, topics)
        for f in feats:
            assert f.topic_probs.sum() == pytest.approx(1.0, abs=1e-6)

    def test_vector_concatenates(self):
        f = CourseFeatures(
            course_key=("S", "P"), embedding=np.array([1.0, 2.0]),
            topic_probs=np.array([0.25, 0.75]), n_comments=2,
        )
        np.testing.assert_array_equal(f.vector(), [1.0, 2.0, 0.25, 0.75])

    def test_output_order_follows_courses(self):
        clf, topics, comments = tiny_models()
        courses = [course(c.subject_code, c.period) for c in comments[:3]]
        feats, _ = build_features(courses[::-1], comments, clf, topics)
        assert [f.course_key for f in feats] == [c.key for c in courses[::-1]]
