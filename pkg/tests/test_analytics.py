"""Response rates, quartile groupings, report directory round-trip."""

from __future__ import annotations

import numpy as np
import pytest

from aulamine.analytics import (
    AnalyticsError,
    GroupStats,
    assign_comments,
    build_report,
    group_by_topic_polarity,
    hash_bundles,
    load_report,
    load_topic_names,
    response_rate,
    response_rates,
)
from aulamine.corpus import Comment, CourseRecord
from aulamine.metrics import threshold_curve
from aulamine.polarity import PolarityClassifier
from aulamine.textprep import TokenizedDoc, preprocess
from aulamine.topics import LatentTopicModel

from conftest import make_comments


def course(subject, period="2024-1", students=10, score=4.2):
    return CourseRecord(
        subject_code=subject, period=period, num_students=students,
        score_pedagogy=score, score_evaluation=score,
        score_interpersonal=score, education_level="undergraduate",
    )


def comment_for(subject, i, text="muy buen curso", period="2024-1"):
    return Comment(id=f"r{i:04d}", subject_code=subject, period=period,
                   text=text, label=None)


class TestResponseRate:
    def test_hand_ratio(self):
        r = response_rate(course("S1", students=10), kept_comments=4)
        assert r.rr == pytest.approx(0.4, abs=1e-12)
        assert not r.exceeds_one

    def test_zero_comments(self):
        r = response_rate(course("S1", students=10), kept_comments=0)
        assert r.rr == 0.0

    def test_full_response(self):
        r = response_rate(course("S1", students=5), kept_comments=5)
        assert r.rr == pytest.approx(1.0, abs=1e-12)
        assert not r.exceeds_one

    def test_above_one_flagged(self):
        r = response_rate(course("S1", students=4), kept_comments=6)
        assert r.rr == pytest.approx(1.5, abs=1e-12)
        assert r.exceeds_one

    def test_zero_enrollment_raises(self):
        with pytest.raises(AnalyticsError, match="zero enrolled"):
            response_rate(course("S1", students=0), kept_comments=1)

    def test_batch_reports_undefined_without_failing(self):
        courses = [course("A", students=10), course("B", students=0)]
        comments = [comment_for("A", 0), comment_for("B", 1)]
        rates, undefined = response_rates(courses, comments)
        assert [r.course_key for r in rates] == [("A", "2024-1")]
        assert undefined == [("B", "2024-1")]


class TestQuartiles:
    def test_two_values_median_halfway(self):
        # {4.0, 5.0} summarized with linear interpolation
        stats = self._stats_for([4.0, 5.0])
        assert stats.median == pytest.approx(4.5, abs=1e-12)
        assert stats.minimum == 4.0
        assert stats.maximum == 5.0
        assert stats.q1 == pytest.approx(4.25, abs=1e-12)
        assert stats.q3 == pytest.approx(4.75, abs=1e-12)

    def test_single_value_all_equal(self):
        stats = self._stats_for([3.7])
        assert (stats.minimum == stats.q1 == stats.median == stats.q3
                == stats.maximum == pytest.approx(3.7))

    def test_quartiles_ordered(self):
        stats = self._stats_for([1.0, 2.0, 2.5, 3.0, 4.8])
        assert (stats.minimum <= stats.q1 <= stats.median
                <= stats.q3 <= stats.maximum)

    @staticmethod
    def _stats_for(values):
        from aulamine.analytics import _five_numbers

        lo, q1, med, q3, hi = _five_numbers(values)
        return GroupStats(topic_id=0, polarity="positive", count=len(values),
                          minimum=lo, q1=q1, median=med, q3=q3, maximum=hi,
                          mean=float(np.mean(values)))


def fitted_models():
    texts_labels = [
        ("el profesor explica excelente", "positive"),
        ("excelente clase muy clara", "positive"),
        ("curso normal sin novedades", "neutral"),
        ("ritmo normal nada especial", "neutral"),
        ("pesimo curso muy confuso", "negative"),
        ("material confuso y pesimo", "negative"),
    ]
    texts = [t for t, _ in texts_labels]
    labels = [l for _, l in texts_labels]
    clf = PolarityClassifier(dim=6, epochs=10, seed=0).fit(texts, labels)
    docs = [
        TokenizedDoc(f"c{i:04d}", preprocess(t, clf._config()).tokens)
        for i, t in enumerate(texts)
    ]
    topics = LatentTopicModel(n_topics=2, iterations=30, seed=0).fit(docs)
    comments = make_comments(texts_labels)
    return clf, topics, comments


class TestGrouping:
    def test_counts_partition_comments(self):
        clf, topics, comments = fitted_models()
        courses = [course(c.subject_code, c.period) for c in comments]
        score_stats, rr_stats = group_by_topic_polarity(
            comments, clf, topics, courses)
        assert sum(s.count for s in score_stats) == len(comments)
        assert sum(s.count for s in rr_stats) == len(comments)

    def test_group_keys_unique_and_sorted(self):
        clf, topics, comments = fitted_models()
        courses = [course(c.subject_code, c.period) for c in comments]
        score_stats, _ = group_by_topic_polarity(comments, clf, topics, courses)
        keys = [(s.topic_id, s.polarity) for s in score_stats]
        assert len(keys) == len(set(keys))
        assert keys == sorted(
            keys, key=lambda k: (k[0], ["positive", "neutral",
                                        "negative"].index(k[1])))

    def test_unknown_course_dropped(self):
        clf, topics, comments = fitted_models()
        rehomed = [
            Comment(id=c.id, subject_code="KNOWN" if i < 2 else "UNKNOWN",
                    period=c.period, text=c.text, label=c.label)
            for i, c in enumerate(comments)
        ]
        courses = [course("KNOWN")]
        score_stats, _ = group_by_topic_polarity(rehomed, clf, topics, courses)
        assert sum(s.count for s in score_stats) == 2

    def test_undefined_rr_excluded_from_rr_summary_only(self):
        clf, topics, comments = fitted_models()
        rehomed = [
            Comment(id=c.id, subject_code=f"S{i}", period=c.period,
                    text=c.text, label=c.label)
            for i, c in enumerate(comments)
        ]
        courses = [
            course(f"S{i}", students=0 if i == 0 else 10)
            for i in range(len(rehomed))
        ]
        score_stats, rr_stats = group_by_topic_polarity(
            rehomed, clf, topics, courses)
        assert sum(s.count for s in score_stats) == len(rehomed)
        assert sum(s.count for s in rr_stats) == len(rehomed) - 1

    def test_assignments_are_argmax(self):
        clf, topics, comments = fitted_models()
        for comment, topic_id, polarity in assign_comments(
                comments, clf, topics):
            doc = TokenizedDoc(comment.id,
                               preprocess(comment.text, clf._config()).tokens)
            assert topic_id == int(np.argmax(topics.doc_topics(doc)))
            assert polarity == clf.predict([doc])[0]


class TestTopicNames:
    def test_overlay_parsed(self, tmp_path):
        path = tmp_path / "names.csv"
        path.write_text("topic_id,label\n0,metodologia\n1,evaluacion\n",
                        encoding="utf-8")
        assert load_topic_names(path) == {0: "metodologia", 1: "evaluacion"}

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "names.csv"
        path.write_text("id,name\n0,x\n", encoding="utf-8")
        with pytest.raises(AnalyticsError, match="topic_id,label"):
            load_topic_names(path)


def small_report_inputs():
    clf, topics, comments = fitted_models()
    courses = [course(c.subject_code, c.period) for c in comments]
    score_stats, rr_stats = group_by_topic_polarity(
        comments, clf, topics, courses)
    rates, undefined = response_rates(courses, comments)
    docs = [
        TokenizedDoc(c.id, preprocess(c.text, clf._config()).tokens)
        for c in comments
    ]
    curve = threshold_curve(
        clf.predict_docs(docs), [c.label for c in comments],
        [0.0, 0.5, 1.0],
    )
    cm = np.array([[2, 0, 0], [0, 2, 0], [0, 0, 2]])
    return dict(
        confusion_train=cm, confusion_test=cm,
        macro_train=1.0, macro_test=1.0,
        curve=curve, topic_summaries=topics.summarize(top_n_words=4),
        group_scores=score_stats, group_rr=rr_stats,
        rates=rates, undefined_rr=undefined,
    )


class TestReport:
    def test_round_trip(self, tmp_path):
        inputs = small_report_inputs()
        build_report(tmp_path / "report", **inputs,
                     topic_names={0: "contenido"})
        report = load_report(tmp_path / "report")
        assert report["macro_train"] == 1.0
        assert report["macro_test"] == 1.0
        assert report["confusion_train"] == [[2, 0, 0], [0, 2, 0], [0, 0, 2]]
        assert len(report["threshold_curve"]) == 3
        assert report["threshold_curve"][0]["coverage"] == 1.0
        names = {t["topic_id"]: t["name"] for t in report["topics"]}
        assert names[0] == "contenido"
        assert names[1] == "topic-1"
        assert sum(g["count"] for g in report["group_scores"]) == 6

    def test_missing_manifest_named(self, tmp_path):
        with pytest.raises(AnalyticsError, match="report.json"):
            load_report(tmp_path / "nonexistent")

    def test_missing_sidecar_named(self, tmp_path):
        inputs = small_report_inputs()
        build_report(tmp_path / "report", **inputs)
        (tmp_path / "report" / "group_rr.csv").unlink()
        with pytest.raises(AnalyticsError, match="group_rr.csv"):
            load_report(tmp_path / "report")

    def test_wrong_manifest_kind(self, tmp_path):
        inputs = small_report_inputs()
        build_report(tmp_path / "report", **inputs)
        (tmp_path / "report" / "report.json").write_text(
            '{"kind": "other"}', encoding="utf-8")
        with pytest.raises(AnalyticsError, match="manifest"):
            load_report(tmp_path / "report")

    def test_deterministic_bytes(self, tmp_path):
        inputs = small_report_inputs()
        build_report(tmp_path / "a", **inputs)
        build_report(tmp_path / "b", **inputs)
        for name in ("report.json", "threshold_curve.csv", "group_scores.csv",
                     "group_rr.csv", "response_rates.csv", "topics.csv"):
            assert ((tmp_path / "a" / name).read_bytes()
                    == (tmp_path / "b" / name).read_bytes())

    def test_bundle_hashes_recorded(self, tmp_path):
        clf, topics, _ = fitted_models()
        clf.save(tmp_path / "polarity")
        topics.save(tmp_path / "topics")
        hashes = hash_bundles({
            "polarity": tmp_path / "polarity",
            "topics": tmp_path / "topics",
        })
        assert set(hashes) == {"polarity", "topics"}
        assert all(len(h) == 64 for h in hashes.values())

        inputs = small_report_inputs()
        build_report(tmp_path / "report", **inputs, bundle_hashes=hashes)
        report = load_report(tmp_path / "report")
        assert report["bundle_hashes"] == hashes
