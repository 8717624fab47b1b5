"""Command-line pipeline: synthesize or ingest data, tune, train, evaluate,
report, and serve.

Every stage reads and writes only under the workdir, prints one JSON line
describing what it did (including its seed and config hash), and exits
nonzero with a single machine-parsable JSON error line on failure.
Artifacts are byte-identical across reruns with the same inputs and
seeds.
"""

from __future__ import annotations

import functools
import hashlib
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import analytics, corpus, metrics, synth, tuner
from .bundles import BundleError, bundle_sha256
from .polarity import PolarityClassifier
from .scorer import BUCKETS, GradientBoostedScorer, bucketize, build_features
from .seeds import derive_seed
from .service import DEFAULT_THRESHOLD, TriageState, create_app
from .textprep.preprocess import PreprocessConfig, TokenizedDoc, preprocess
from .topics import LatentTopicModel

DEFAULT_CONFIG = {
    "comments": None,
    "courses": None,
    "labels": None,
    "seed": 0,
    "preprocess": {"stem": True, "strip_accents": False},
    "tuner": {
        "budget": 30,
        "gamma": 0.25,
        "n_candidates": 24,
        "n_startup": None,
        "epsilon": 0.2,
    },
    "polarity": {
        "dim": 20,
        "learning_rate": 0.1,
        "epochs": 25,
        "min_count": 1,
        "char_ngram_min": 3,
        "char_ngram_max": 6,
        "word_ngrams": 1,
        "class_weighting": False,
    },
    "topics": {
        "n_topics": 5,
        "alpha": None,
        "beta": 0.01,
        "iterations": 500,
        "fold_in_sweeps": 20,
    },
    "scorer": {
        "n_rounds": 100,
        "max_depth": 3,
        "learning_rate": 0.1,
        "score_field": "score_evaluation",
        "tune_budget": 0,
        "balance_pivot": 4.4,
    },
    "eval": {"thresholds": [round(i * 0.05, 2) for i in range(20)]},
    "service": {"threshold": DEFAULT_THRESHOLD},
    "topic_names": None,
}


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class PipelineConfig:
    """Effective settings: built-in defaults, then the config file, then
    command-line overrides."""

    def __init__(self, workdir: Path, values: dict):
        self.workdir = Path(workdir)
        self.values = values

    @classmethod
    def load(cls, config_path: str | None, workdir: str,
             seed: int | None) -> "PipelineConfig":
        values = dict(DEFAULT_CONFIG)
        if config_path is not None:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
            values = _deep_merge(values, loaded)
        if seed is not None:
            values["seed"] = seed
        return cls(Path(workdir), values)

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    def section(self, name: str) -> dict:
        return self.values[name]

    def hash(self) -> str:
        canonical = json.dumps(self.values, sort_keys=True).encode("utf-8")
        return hashlib.sha256(canonical).hexdigest()[:16]

    def preprocess_config(self) -> PreprocessConfig:
        section = self.section("preprocess")
        return PreprocessConfig(stem=bool(section["stem"]),
                                strip_accents=bool(section["strip_accents"]))

    # workdir layout ---------------------------------------------------
    def data_path(self, name: str) -> Path:
        configured = self.values.get(name)
        if configured:
            return Path(configured)
        return self.workdir / "data" / f"{name}.csv"

    @property
    def ingest_dir(self) -> Path:
        return self.workdir / "ingest"

    @property
    def tune_path(self) -> Path:
        return self.workdir / "tune" / "search.json"

    @property
    def polarity_dir(self) -> Path:
        return self.workdir / "models" / "polarity"

    @property
    def topics_dir(self) -> Path:
        return self.workdir / "models" / "topics"

    @property
    def scorer_dir(self) -> Path:
        return self.workdir / "models" / "scorer"

    @property
    def eval_dir(self) -> Path:
        return self.workdir / "eval"

    @property
    def report_dir(self) -> Path:
        return self.workdir / "report"

    @property
    def label_log_path(self) -> Path:
        return self.workdir / "service" / "labels.jsonl"


class StageError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _emit(event: dict) -> None:
    click.echo(json.dumps(event, sort_keys=True))


def _require(path: Path, producer: str) -> None:
    if not path.exists():
        raise StageError(
            "missing_artifact",
            f"missing artifact {path}; run '{producer}' first",
        )


def stage(name: str):
    """Wrap a command body: print one ok line on success, one error line
    and exit code 1 on failure."""

    def decorator(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            config: PipelineConfig = click.get_current_context().obj
            try:
                extra = fn(*args, **kwargs)
            except StageError as exc:
                click.echo(json.dumps({
                    "stage": name, "status": "error",
                    "code": exc.code, "message": exc.message,
                }, sort_keys=True), err=True)
                sys.exit(1)
            except (corpus.CorpusError, BundleError, analytics.AnalyticsError,
                    ValueError, FileNotFoundError) as exc:
                click.echo(json.dumps({
                    "stage": name, "status": "error",
                    "code": type(exc).__name__.lower(),
                    "message": str(exc),
                }, sort_keys=True), err=True)
                sys.exit(1)
            event = {
                "stage": name,
                "status": "ok",
                "seed": config.seed,
                "config_hash": config.hash(),
            }
            if extra:
                event.update(extra)
            _emit(event)

        return wrapper

    return decorator


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON config file.")
@click.option("--seed", type=int, default=None,
              help="Master seed; overrides the config file.")
@click.option("--workdir", type=click.Path(), default="workdir",
              help="Directory all artifacts live under.")
@click.pass_context
def main(ctx, config_path, seed, workdir):
    """Opinion mining pipeline for student course evaluations."""
    ctx.obj = PipelineConfig.load(config_path, workdir, seed)


# ---------------------------------------------------------------------------
# data stages


@main.command("synth")
@click.option("--n-comments", type=int, default=5000, show_default=True)
@click.option("--n-courses", type=int, default=50, show_default=True)
@click.option("--overlap", type=float, default=0.15, show_default=True)
@click.option("--correlation", type=float, default=0.9, show_default=True)
@click.pass_obj
@stage("synth")
def cmd_synth(config: PipelineConfig, n_comments, n_courses, overlap,
              correlation):
    """Generate a synthetic dataset under workdir/data."""
    section = config.section("topics")
    dataset = synth.generate(
        n_comments=n_comments,
        n_courses=n_courses,
        seed=config.seed,
        overlap=overlap,
        correlation=correlation,
        n_topics=int(section["n_topics"]),
    )
    paths = synth.write_dataset(config.workdir / "data", dataset)
    return {
        "n_comments": n_comments,
        "n_courses": n_courses,
        "files": {k: str(v) for k, v in paths.items()},
    }


def _load_kept_comments(config: PipelineConfig):
    kept_path = config.ingest_dir / "kept_comments.csv"
    _require(kept_path, "aulamine ingest")
    kept = corpus.load_comments(kept_path)
    labels = corpus.load_labels(config.ingest_dir / "kept_labels.csv")
    return corpus.attach_labels(kept, labels)


def _load_split(config: PipelineConfig) -> corpus.DatasetSplit:
    split_path = config.ingest_dir / "split.json"
    _require(split_path, "aulamine ingest")
    data = json.loads(split_path.read_text(encoding="utf-8"))
    return corpus.DatasetSplit(
        train=data["train"], validation=data["validation"],
        test=data["test"], seed=data["seed"],
    )


@main.command("ingest")
@click.pass_obj
@stage("ingest")
def cmd_ingest(config: PipelineConfig):
    """Load, label, quality-filter and split the corpus."""
    comments_path = config.data_path("comments")
    labels_path = config.data_path("labels")
    _require(comments_path, "aulamine synth (or point --config at your data)")
    _require(labels_path, "aulamine synth (or point --config at your data)")
    comments = corpus.load_comments(comments_path)
    labels = corpus.load_labels(labels_path)
    labeled = corpus.attach_labels(comments, labels)
    kept, dropped = corpus.filter_quality(labeled)
    labeled_kept = [c for c in kept if c.label is not None]
    split = corpus.split(labeled_kept, derive_seed(config.seed, "split"))

    config.ingest_dir.mkdir(parents=True, exist_ok=True)
    corpus.write_comments_csv(config.ingest_dir / "kept_comments.csv", kept)
    corpus.write_labels_csv(
        config.ingest_dir / "kept_labels.csv",
        {c.id: c.label for c in kept if c.label is not None},
    )
    (config.ingest_dir / "split.json").write_text(
        json.dumps({
            "train": split.train, "validation": split.validation,
            "test": split.test, "seed": split.seed,
        }, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return {
        "total": len(comments),
        "kept": len(kept),
        "dropped": len(dropped),
        "train": len(split.train),
        "validation": len(split.validation),
        "test": len(split.test),
    }


# ---------------------------------------------------------------------------
# model stages


def _tokenize(comments, config: PipelineConfig):
    pconfig = config.preprocess_config()
    return [
        TokenizedDoc(comment_id=c.id, tokens=preprocess(c.text, pconfig).tokens)
        for c in comments
    ]


@main.command("tune")
@click.option("--budget", type=int, default=None,
              help="Trial count; defaults to the config value.")
@click.pass_obj
@stage("tune")
def cmd_tune(config: PipelineConfig, budget):
    """Search polarity hyperparameters on the train/validation split."""
    comments = _load_kept_comments(config)
    split = _load_split(config)
    by_id = {c.id: c for c in comments}
    docs = {c.id: d for c, d in zip(comments, _tokenize(comments, config))}
    train_docs = [docs[i] for i in split.train]
    train_labels = [by_id[i].label for i in split.train]
    val_docs = [docs[i] for i in split.validation]
    val_labels = [by_id[i].label for i in split.validation]

    section = config.section("tuner")
    budget = int(section["budget"]) if budget is None else budget
    evaluate = tuner.make_polarity_evaluator(
        train_docs, train_labels, val_docs, val_labels,
        dim=int(config.section("polarity")["dim"]),
        preprocess_config=config.preprocess_config(),
    )
    result = tuner.run_search(
        tuner.default_polarity_space(), budget, evaluate,
        master_seed=derive_seed(config.seed, "tune"),
        gamma=float(section["gamma"]),
        n_candidates=int(section["n_candidates"]),
        n_startup=section["n_startup"],
        epsilon=float(section["epsilon"]),
    )
    config.tune_path.parent.mkdir(parents=True, exist_ok=True)
    # wall-clock durations are zeroed so reruns are byte-identical
    tuner.save_report(config.tune_path, result, zero_durations=True)
    return {
        "budget": budget,
        "best_objective": result.best.objective,
        "best_params": tuner.Trial.to_dict(result.best)["params"],
    }


def _polarity_params(config: PipelineConfig) -> dict:
    """Model settings for the final fit: tuned values when a search report
    exists, config defaults otherwise."""
    section = dict(config.section("polarity"))
    source = "config"
    if config.tune_path.exists():
        result = tuner.load_report(config.tune_path)
        best = result.best.params
        char_min, char_max = best["char_ngrams"]
        section.update({
            "learning_rate": best["learning_rate"],
            "epochs": best["epochs"],
            "min_count": best["min_count"],
            "char_ngram_min": char_min,
            "char_ngram_max": char_max,
            "word_ngrams": best["word_ngrams"],
        })
        source = "tuned"
    section["_source"] = source
    return section


@main.command("train-polarity")
@click.pass_obj
@stage("train-polarity")
def cmd_train_polarity(config: PipelineConfig):
    """Fit the polarity classifier on the train split and save its bundle."""
    comments = _load_kept_comments(config)
    split = _load_split(config)
    by_id = {c.id: c for c in comments}
    docs = {c.id: d for c, d in zip(comments, _tokenize(comments, config))}
    params = _polarity_params(config)
    source = params.pop("_source")
    clf = PolarityClassifier(
        dim=int(params["dim"]),
        learning_rate=float(params["learning_rate"]),
        epochs=int(params["epochs"]),
        min_count=int(params["min_count"]),
        char_ngram_min=int(params["char_ngram_min"]),
        char_ngram_max=int(params["char_ngram_max"]),
        word_ngrams=int(params["word_ngrams"]),
        class_weighting=bool(params["class_weighting"]),
        seed=derive_seed(config.seed, "polarity"),
        preprocess_config=config.preprocess_config(),
    )
    clf.fit(
        [docs[i] for i in split.train],
        [by_id[i].label for i in split.train],
    )
    config.polarity_dir.mkdir(parents=True, exist_ok=True)
    clf.save(config.polarity_dir)
    return {
        "params_source": source,
        "n_units": clf.n_units_,
        "final_training_loss": clf.training_loss_[-1] if clf.training_loss_
        else None,
        "bundle": str(config.polarity_dir),
    }


@main.command("train-topics")
@click.pass_obj
@stage("train-topics")
def cmd_train_topics(config: PipelineConfig):
    """Fit the latent topic model over all kept comments."""
    comments = _load_kept_comments(config)
    docs = _tokenize(comments, config)
    section = config.section("topics")
    model = LatentTopicModel(
        n_topics=int(section["n_topics"]),
        alpha=section["alpha"],
        beta=float(section["beta"]),
        iterations=int(section["iterations"]),
        fold_in_sweeps=int(section["fold_in_sweeps"]),
        seed=derive_seed(config.seed, "topics"),
    )
    model.fit(docs)
    config.topics_dir.mkdir(parents=True, exist_ok=True)
    model.save(config.topics_dir)
    return {
        "n_topics": model.n_topics,
        "n_docs": len(model.doc_ids_),
        "final_log_likelihood": model.log_likelihoods_[-1],
        "bundle": str(config.topics_dir),
    }


@main.command("train-scorer")
@click.pass_obj
@stage("train-scorer")
def cmd_train_scorer(config: PipelineConfig):
    """Fit the course score-bucket model from aggregated features."""
    courses_path = config.data_path("courses")
    _require(courses_path, "aulamine synth (or point --config at your data)")
    _require(config.polarity_dir / "manifest.json", "aulamine train-polarity")
    _require(config.topics_dir / "manifest.json", "aulamine train-topics")
    courses = corpus.load_courses(courses_path)
    comments = _load_kept_comments(config)
    polarity_model = PolarityClassifier.load(config.polarity_dir)
    topic_model = LatentTopicModel.load(config.topics_dir)

    features, skipped = build_features(courses, comments, polarity_model,
                                       topic_model)
    section = config.section("scorer")
    score_field = section["score_field"]
    course_by_key = {c.key: c for c in courses}
    keys = [f.course_key for f in features]
    buckets = [
        bucketize(getattr(course_by_key[k], score_field)) for k in keys
    ]
    key_strings = ["\x1f".join(k) for k in keys]
    split = corpus.stratified_split_ids(
        key_strings, buckets, BUCKETS,
        derive_seed(config.seed, "scorer:split"),
    )
    row_of = {ks: i for i, ks in enumerate(key_strings)}
    x_all = np.stack([f.vector() for f in features])
    y_all = buckets

    def subset(ids):
        rows = [row_of[i] for i in ids]
        return x_all[rows], [y_all[r] for r in rows]

    x_train, y_train = subset(split.train)
    x_val, y_val = subset(split.validation)
    x_test, y_test = subset(split.test)

    params = {
        "n_rounds": int(section["n_rounds"]),
        "max_depth": int(section["max_depth"]),
        "learning_rate": float(section["learning_rate"]),
    }
    tune_budget = int(section["tune_budget"])
    if tune_budget > 0:
        # hyperparameters are chosen on data balanced around the pivot;
        # the final model below trains on the unbalanced courses
        pivot = float(section["balance_pivot"])
        pairs = list(zip(split.train, [
            getattr(course_by_key[keys[row_of[i]]], score_field)
            for i in split.train
        ]))
        balanced = corpus.balance_courses(
            pairs, pivot=pivot,
            seed=derive_seed(config.seed, "scorer:balance"),
        )
        balanced_ids = [i for i, _ in balanced]
        x_bal, y_bal = subset(balanced_ids)

        def evaluate(trial_params, seed):
            model = GradientBoostedScorer(
                n_rounds=trial_params["n_rounds"],
                max_depth=trial_params["max_depth"],
                learning_rate=trial_params["learning_rate"],
                seed=seed,
            )
            model.fit(x_bal, y_bal)
            s_train = metrics.macro_accuracy(
                metrics.confusion(y_bal, model.predict(x_bal), BUCKETS), BUCKETS
            )
            s_val = metrics.macro_accuracy(
                metrics.confusion(y_val, model.predict(x_val), BUCKETS), BUCKETS
            )
            return s_train, s_val

        space = tuner.SearchSpace({
            "n_rounds": tuner.IntRange(20, 200),
            "max_depth": tuner.IntRange(1, 5),
            "learning_rate": tuner.LogUniform(0.01, 0.5),
        })
        result = tuner.run_search(
            space, tune_budget, evaluate,
            master_seed=derive_seed(config.seed, "scorer:tune"),
        )
        config.scorer_dir.mkdir(parents=True, exist_ok=True)
        tuner.save_report(config.scorer_dir / "search.json", result,
                          zero_durations=True)
        params = dict(result.best.params)

    model = GradientBoostedScorer(
        n_rounds=int(params["n_rounds"]),
        max_depth=int(params["max_depth"]),
        learning_rate=float(params["learning_rate"]),
        seed=derive_seed(config.seed, "scorer"),
    )
    x_fit = np.concatenate([x_train, x_val])
    y_fit = y_train + y_val
    model.fit(x_fit, y_fit)
    config.scorer_dir.mkdir(parents=True, exist_ok=True)
    model.save(config.scorer_dir)

    def macro(x, y):
        return metrics.macro_accuracy(
            metrics.confusion(y, model.predict(x), BUCKETS), BUCKETS
        )

    summary = {
        "macro_train": macro(x_fit, y_fit),
        "macro_test": macro(x_test, y_test),
        "n_courses": len(features),
        "skipped_courses": [list(k) for k in skipped],
        "score_field": score_field,
        "params": params,
    }
    (config.scorer_dir / "scorer_eval.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return {
        "macro_train": summary["macro_train"],
        "macro_test": summary["macro_test"],
        "bundle": str(config.scorer_dir),
    }


# ---------------------------------------------------------------------------
# evaluation and reporting


@main.command("eval")
@click.pass_obj
@stage("eval")
def cmd_eval(config: PipelineConfig):
    """Macro accuracies, confusion matrices, and the threshold curve."""
    _require(config.polarity_dir / "manifest.json", "aulamine train-polarity")
    comments = _load_kept_comments(config)
    split = _load_split(config)
    by_id = {c.id: c for c in comments}
    docs = {c.id: d for c, d in zip(comments, _tokenize(comments, config))}
    model = PolarityClassifier.load(config.polarity_dir)

    config.eval_dir.mkdir(parents=True, exist_ok=True)
    results = {}
    for part, ids in (("train", split.train), ("test", split.test)):
        part_docs = [docs[i] for i in ids]
        labels = [by_id[i].label for i in ids]
        predictions = model.predict_docs(part_docs)
        cm = metrics.confusion(labels, [p.predicted_class for p in predictions])
        metrics.write_confusion_csv(
            config.eval_dir / f"confusion_{part}.csv", cm
        )
        results[part] = {
            "macro": metrics.macro_accuracy(cm),
            "predictions": predictions,
            "labels": labels,
        }
    thresholds = [float(t) for t in config.section("eval")["thresholds"]]
    curve = metrics.threshold_curve(
        results["test"]["predictions"], results["test"]["labels"], thresholds
    )
    metrics.write_curve_csv(config.eval_dir / "threshold_curve.csv", curve)
    payload = {
        "macro_train": results["train"]["macro"],
        "macro_test": results["test"]["macro"],
        "gap": abs(results["train"]["macro"] - results["test"]["macro"]),
        "n_train": len(split.train),
        "n_test": len(split.test),
    }
    (config.eval_dir / "eval.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return payload


@main.command("report")
@click.pass_obj
@stage("report")
def cmd_report(config: PipelineConfig):
    """Assemble the analytics report directory."""
    _require(config.eval_dir / "eval.json", "aulamine eval")
    _require(config.topics_dir / "manifest.json", "aulamine train-topics")
    _require(config.polarity_dir / "manifest.json", "aulamine train-polarity")
    courses_path = config.data_path("courses")
    _require(courses_path, "aulamine synth (or point --config at your data)")

    comments = _load_kept_comments(config)
    courses = corpus.load_courses(courses_path)
    polarity_model = PolarityClassifier.load(config.polarity_dir)
    topic_model = LatentTopicModel.load(config.topics_dir)
    eval_payload = json.loads(
        (config.eval_dir / "eval.json").read_text(encoding="utf-8")
    )
    curve = metrics.read_curve_csv(config.eval_dir / "threshold_curve.csv")
    cm_train = metrics.read_confusion_csv(config.eval_dir / "confusion_train.csv")
    cm_test = metrics.read_confusion_csv(config.eval_dir / "confusion_test.csv")

    group_scores, group_rr = analytics.group_by_topic_polarity(
        comments, polarity_model, topic_model, courses,
        score_field=config.section("scorer")["score_field"],
    )
    rates, undefined = analytics.response_rates(courses, comments)
    summaries = topic_model.summarize(top_n_words=10, top_n_docs=3)

    topic_names = None
    overlay_path = config.values.get("topic_names")
    if overlay_path:
        topic_names = analytics.load_topic_names(overlay_path)

    bundle_hashes = {"polarity": bundle_sha256(config.polarity_dir),
                     "topics": bundle_sha256(config.topics_dir)}
    scorer_summary = None
    scorer_eval = config.scorer_dir / "scorer_eval.json"
    if scorer_eval.exists():
        scorer_summary = json.loads(scorer_eval.read_text(encoding="utf-8"))
        bundle_hashes["scorer"] = bundle_sha256(config.scorer_dir)

    analytics.build_report(
        config.report_dir,
        confusion_train=cm_train,
        confusion_test=cm_test,
        macro_train=eval_payload["macro_train"],
        macro_test=eval_payload["macro_test"],
        curve=curve,
        topic_summaries=summaries,
        group_scores=group_scores,
        group_rr=group_rr,
        rates=rates,
        undefined_rr=undefined,
        topic_names=topic_names,
        bundle_hashes=bundle_hashes,
        scorer_summary=scorer_summary,
    )
    return {"report": str(config.report_dir)}


@main.command("serve")
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.pass_obj
def cmd_serve(config: PipelineConfig, port, host):
    """Run the triage HTTP API until interrupted."""
    try:
        _require(config.polarity_dir / "manifest.json", "aulamine train-polarity")
        _require(config.topics_dir / "manifest.json", "aulamine train-topics")
        comments = _load_kept_comments(config)
        polarity_model = PolarityClassifier.load(config.polarity_dir)
        topic_model = LatentTopicModel.load(config.topics_dir)
        config.label_log_path.parent.mkdir(parents=True, exist_ok=True)
        state = TriageState.build(
            comments, polarity_model, topic_model, config.label_log_path
        )
    except StageError as exc:
        click.echo(json.dumps({
            "stage": "serve", "status": "error",
            "code": exc.code, "message": exc.message,
        }, sort_keys=True), err=True)
        sys.exit(1)
    app = create_app(state, report_dir=config.report_dir)
    _emit({
        "stage": "serve", "status": "ok", "seed": config.seed,
        "config_hash": config.hash(), "port": port,
        "comments": len(state.items),
    })
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
