"""Hyperparameter search: random startup plus a Parzen-estimator refinement.

The search minimizes an objective that rewards validation accuracy while
penalizing the train/validation gap, scaled so the penalty grows as
training accuracy approaches 1:

    objective = -S_validation + |S_train - S_validation| / (1 - S_train + epsilon)

After a random startup phase, completed trials are split at the gamma
quantile of the objective into good and bad sets. Each proposal samples
candidates from a Parzen density fit to the good set and keeps the
candidate with the highest good-to-bad density ratio.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .metrics import confusion, macro_accuracy
from .seeds import derive_seed

__all__ = [
    "objective_fn",
    "Uniform",
    "LogUniform",
    "IntRange",
    "Categorical",
    "SearchSpace",
    "Trial",
    "SearchResult",
    "run_search",
    "save_report",
    "load_report",
    "default_polarity_space",
    "make_polarity_evaluator",
]

REPORT_KIND = "search-report"
REPORT_VERSION = 1

DEFAULT_GAMMA = 0.25
DEFAULT_CANDIDATES = 24


def objective_fn(s_train: float, s_validation: float, epsilon: float = 0.2) -> float:
    """Search objective: negative validation score plus a scaled gap term.

    The denominator is at least ``epsilon``, so the value is always finite
    for valid inputs.
    """
    if not 0.0 <= s_train <= 1.0:
        raise ValueError("s_train must be in [0, 1]")
    if not 0.0 <= s_validation <= 1.0:
        raise ValueError("s_validation must be in [0, 1]")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    gap = abs(s_train - s_validation)
    return -s_validation + gap / (1.0 - s_train + epsilon)


# ---------------------------------------------------------------------------
# Search space


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError("uniform dimension requires low < high")


@dataclass(frozen=True)
class LogUniform:
    low: float
    high: float

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise ValueError("log-uniform dimension requires 0 < low < high")


@dataclass(frozen=True)
class IntRange:
    low: int
    high: int

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError("integer dimension requires low < high")


@dataclass(frozen=True)
class Categorical:
    choices: tuple

    def __post_init__(self):
        if len(self.choices) == 0:
            raise ValueError("categorical dimension requires at least one choice")


Dimension = Uniform | LogUniform | IntRange | Categorical

_DIM_TAGS = {Uniform: "uniform", LogUniform: "loguniform", IntRange: "int",
             Categorical: "categorical"}


@dataclass(frozen=True)
class SearchSpace:
    """Named, independent dimensions sampled jointly."""

    dimensions: tuple[tuple[str, Dimension], ...]

    def __init__(self, dims: Mapping[str, Dimension]):
        object.__setattr__(self, "dimensions", tuple(dims.items()))

    def names(self) -> list[str]:
        return [name for name, _ in self.dimensions]

    def sample(self, rng: np.random.Generator) -> dict:
        params = {}
        for name, dim in self.dimensions:
            if isinstance(dim, Uniform):
                params[name] = float(rng.uniform(dim.low, dim.high))
            elif isinstance(dim, LogUniform):
                params[name] = float(math.exp(
                    rng.uniform(math.log(dim.low), math.log(dim.high))
                ))
            elif isinstance(dim, IntRange):
                params[name] = int(rng.integers(dim.low, dim.high + 1))
            else:
                params[name] = dim.choices[int(rng.integers(len(dim.choices)))]
        return params

    def to_dict(self) -> dict:
        out = {}
        for name, dim in self.dimensions:
            entry: dict = {"type": _DIM_TAGS[type(dim)]}
            if isinstance(dim, Categorical):
                entry["choices"] = [
                    list(c) if isinstance(c, tuple) else c for c in dim.choices
                ]
            else:
                entry["low"] = dim.low
                entry["high"] = dim.high
            out[name] = entry
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "SearchSpace":
        dims: dict[str, Dimension] = {}
        for name, entry in data.items():
            kind = entry["type"]
            if kind == "uniform":
                dims[name] = Uniform(float(entry["low"]), float(entry["high"]))
            elif kind == "loguniform":
                dims[name] = LogUniform(float(entry["low"]), float(entry["high"]))
            elif kind == "int":
                dims[name] = IntRange(int(entry["low"]), int(entry["high"]))
            elif kind == "categorical":
                dims[name] = Categorical(tuple(
                    tuple(c) if isinstance(c, list) else c
                    for c in entry["choices"]
                ))
            else:
                raise ValueError(f"unknown dimension type: {kind!r}")
        return cls(dims)


# ---------------------------------------------------------------------------
# Trials


@dataclass(frozen=True)
class Trial:
    index: int
    params: dict
    seed: int
    s_train: float | None
    s_validation: float | None
    objective: float
    duration: float
    status: str = "ok"
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "params": {
                k: list(v) if isinstance(v, tuple) else v
                for k, v in self.params.items()
            },
            "seed": self.seed,
            "s_train": self.s_train,
            "s_validation": self.s_validation,
            "objective": None if math.isinf(self.objective) else self.objective,
            "duration": self.duration,
            "status": self.status,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Trial":
        objective = data["objective"]
        return cls(
            index=int(data["index"]),
            params={
                k: tuple(v) if isinstance(v, list) else v
                for k, v in data["params"].items()
            },
            seed=int(data["seed"]),
            s_train=data["s_train"],
            s_validation=data["s_validation"],
            objective=math.inf if objective is None else float(objective),
            duration=float(data["duration"]),
            status=data["status"],
            error=data.get("error"),
        )


@dataclass(frozen=True)
class SearchResult:
    space: SearchSpace
    trials: tuple[Trial, ...]
    best: Trial
    master_seed: int
    gamma: float = DEFAULT_GAMMA
    n_candidates: int = DEFAULT_CANDIDATES
    n_startup: int = 0
    epsilon: float = 0.2
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Parzen densities


def _to_internal(dim: Dimension, value):
    if isinstance(dim, LogUniform):
        return math.log(value)
    if isinstance(dim, IntRange):
        return float(value)
    return float(value)


def _from_internal(dim: Dimension, value: float):
    if isinstance(dim, LogUniform):
        value = math.exp(value)
        return float(min(max(value, dim.low), dim.high))
    if isinstance(dim, IntRange):
        return int(min(max(round(value), dim.low), dim.high))
    return float(min(max(value, dim.low), dim.high))


def _bounds(dim: Dimension) -> tuple[float, float]:
    if isinstance(dim, LogUniform):
        return math.log(dim.low), math.log(dim.high)
    return float(dim.low), float(dim.high)


class _NumericParzen:
    """Mixture of one uniform prior component and a Gaussian per point,
    with bandwidth equal to the distance to the point's nearest neighbor
    (floored to a fraction of the range)."""

    def __init__(self, dim: Dimension, values: Sequence[float]):
        low, high = _bounds(dim)
        self.low = low
        self.high = high
        self.points = np.asarray([_to_internal(dim, v) for v in values],
                                 dtype=np.float64)
        span = high - low
        # floor keeps the windows from collapsing when observations
        # cluster, which would freeze proposals onto the incumbent
        floor = span / min(100.0, len(self.points) + 1.0)
        if len(self.points) >= 2:
            diffs = np.abs(self.points[:, None] - self.points[None, :])
            np.fill_diagonal(diffs, np.inf)
            self.bandwidths = np.maximum(diffs.min(axis=1), floor)
        else:
            self.bandwidths = np.full(len(self.points), span / 2.0)

    def sample(self, rng: np.random.Generator) -> float:
        n = len(self.points)
        component = int(rng.integers(n + 1))
        if component == n:  # prior component
            return float(rng.uniform(self.low, self.high))
        return float(rng.normal(self.points[component],
                                self.bandwidths[component]))

    def log_density(self, x: float) -> float:
        n = len(self.points)
        total = 1.0 / (self.high - self.low)
        if n:
            z = (x - self.points) / self.bandwidths
            total += float(np.sum(
                np.exp(-0.5 * z * z) / (self.bandwidths * math.sqrt(2 * math.pi))
            ))
        return math.log(total / (n + 1))


class _CategoricalParzen:
    """Laplace-smoothed empirical distribution over the choices."""

    def __init__(self, dim: Categorical, values: Sequence):
        self.choices = dim.choices
        counts = np.ones(len(dim.choices), dtype=np.float64)
        index = {c: i for i, c in enumerate(dim.choices)}
        for v in values:
            counts[index[v]] += 1.0
        self.probs = counts / counts.sum()
        self.index = index

    def sample(self, rng: np.random.Generator):
        i = int(rng.choice(len(self.choices), p=self.probs))
        return self.choices[i]

    def log_density(self, value) -> float:
        return math.log(self.probs[self.index[value]])


def _propose(space: SearchSpace, good: Sequence[dict], bad: Sequence[dict],
             rng: np.random.Generator, n_candidates: int) -> dict:
    estimators = []
    for name, dim in space.dimensions:
        good_vals = [p[name] for p in good]
        bad_vals = [p[name] for p in bad]
        if isinstance(dim, Categorical):
            estimators.append(
                (name, _CategoricalParzen(dim, good_vals),
                 _CategoricalParzen(dim, bad_vals))
            )
        else:
            estimators.append(
                (name, _NumericParzen(dim, good_vals),
                 _NumericParzen(dim, bad_vals))
            )
    best_params = None
    best_score = -math.inf
    dim_by_name = dict(space.dimensions)
    for _ in range(n_candidates):
        params = {}
        score = 0.0
        for name, good_est, bad_est in estimators:
            dim = dim_by_name[name]
            if isinstance(dim, Categorical):
                value = good_est.sample(rng)
                score += good_est.log_density(value) - bad_est.log_density(value)
            else:
                value = _from_internal(dim, good_est.sample(rng))
                internal = _to_internal(dim, value)
                score += (good_est.log_density(internal)
                          - bad_est.log_density(internal))
            params[name] = value
        if score > best_score:
            best_score = score
            best_params = params
    assert best_params is not None
    return best_params


# ---------------------------------------------------------------------------
# Search driver


def run_search(
    space: SearchSpace,
    budget: int,
    evaluate: Callable[[dict, int], tuple[float, float]],
    master_seed: int = 0,
    *,
    gamma: float = DEFAULT_GAMMA,
    n_candidates: int = DEFAULT_CANDIDATES,
    n_startup: int | None = None,
    epsilon: float = 0.2,
    warm_start: Sequence[Trial] = (),
) -> SearchResult:
    """Evaluate ``budget`` parameter assignments and return all trials.

    ``evaluate(params, seed)`` returns (S_train, S_validation). The first
    ``n_startup`` trials (default max(10, budget // 4)) are sampled
    uniformly; later proposals maximize the good/bad Parzen density ratio
    over ``n_candidates`` sampled candidates. A trial whose evaluator
    raises is recorded as failed with objective +inf and the search
    continues. Deterministic for a fixed master seed; trials are executed
    and recorded sequentially.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    if n_startup is None:
        n_startup = max(10, budget // 4)
    rng = np.random.default_rng(derive_seed(master_seed, "tuner:sampler"))
    history: list[Trial] = list(warm_start)
    trials: list[Trial] = []
    for i in range(budget):
        observed = [t for t in history if t.status == "ok"]
        if len(trials) < n_startup or len(observed) < 2:
            params = space.sample(rng)
        else:
            ordered = sorted(observed, key=lambda t: (t.objective, t.index))
            n_good = max(1, math.ceil(gamma * len(ordered)))
            good_indices = {t.index for t in ordered[:n_good]}
            good = [t.params for t in ordered[:n_good]]
            bad = [t.params for t in history if t.index not in good_indices]
            if not bad:
                bad = good
            params = _propose(space, good, bad, rng, n_candidates)
        seed = derive_seed(master_seed, f"tuner:trial:{i}")
        started = time.perf_counter()
        try:
            s_train, s_validation = evaluate(params, seed)
            trial = Trial(
                index=len(history),
                params=params,
                seed=seed,
                s_train=float(s_train),
                s_validation=float(s_validation),
                objective=objective_fn(float(s_train), float(s_validation),
                                       epsilon),
                duration=time.perf_counter() - started,
            )
        except Exception as exc:
            trial = Trial(
                index=len(history),
                params=params,
                seed=seed,
                s_train=None,
                s_validation=None,
                objective=math.inf,
                duration=time.perf_counter() - started,
                status="failed",
                error=f"{type(exc).__name__}: {exc}",
            )
        history.append(trial)
        trials.append(trial)
    best = min(trials, key=lambda t: (t.objective, t.index))
    return SearchResult(
        space=space,
        trials=tuple(trials),
        best=best,
        master_seed=master_seed,
        gamma=gamma,
        n_candidates=n_candidates,
        n_startup=n_startup,
        epsilon=epsilon,
    )


def save_report(path, result: SearchResult, *, zero_durations: bool = False) -> None:
    """Write a search result as JSON. ``zero_durations`` drops wall-clock
    times so reruns with the same seed produce identical bytes."""
    trials = result.trials
    if zero_durations:
        trials = tuple(replace(t, duration=0.0) for t in trials)
    payload = {
        "kind": REPORT_KIND,
        "format_version": REPORT_VERSION,
        "space": result.space.to_dict(),
        "master_seed": result.master_seed,
        "gamma": result.gamma,
        "n_candidates": result.n_candidates,
        "n_startup": result.n_startup,
        "epsilon": result.epsilon,
        "best_index": result.best.index,
        "trials": [t.to_dict() for t in trials],
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_report(path) -> SearchResult:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("kind") != REPORT_KIND:
        raise ValueError(f"not a search report: kind={data.get('kind')!r}")
    if data.get("format_version") != REPORT_VERSION:
        raise ValueError(
            f"unsupported search report version: {data.get('format_version')!r}"
        )
    space = SearchSpace.from_dict(data["space"])
    trials = tuple(Trial.from_dict(t) for t in data["trials"])
    best = next(t for t in trials if t.index == data["best_index"])
    return SearchResult(
        space=space,
        trials=trials,
        best=best,
        master_seed=data["master_seed"],
        gamma=data["gamma"],
        n_candidates=data["n_candidates"],
        n_startup=data["n_startup"],
        epsilon=data["epsilon"],
    )


# ---------------------------------------------------------------------------
# Polarity-classifier search wiring


def default_polarity_space() -> SearchSpace:
    """Searched dimensions for the polarity classifier. The embedding
    width is not searched; it stays fixed at 20."""
    return SearchSpace({
        "learning_rate": LogUniform(0.01, 1.0),
        "epochs": IntRange(5, 100),
        "word_ngrams": Categorical((1, 2)),
        "char_ngrams": Categorical(((3, 6), (0, 0))),
        "min_count": IntRange(1, 5),
    })


def make_polarity_evaluator(
    train_docs: Sequence,
    train_labels: Sequence[str],
    val_docs: Sequence,
    val_labels: Sequence[str],
    dim: int = 20,
    preprocess_config=None,
) -> Callable[[dict, int], tuple[float, float]]:
    """Build the evaluate callable used by run_search for the polarity
    model: fit on the train docs, return macro accuracy on train and
    validation."""
    from .polarity import PolarityClassifier

    def evaluate(params: dict, seed: int) -> tuple[float, float]:
        char_min, char_max = params["char_ngrams"]
        clf = PolarityClassifier(
            dim=dim,
            learning_rate=params["learning_rate"],
            epochs=params["epochs"],
            min_count=params["min_count"],
            char_ngram_min=char_min,
            char_ngram_max=char_max,
            word_ngrams=params["word_ngrams"],
            seed=seed,
            preprocess_config=preprocess_config,
        )
        clf.fit(train_docs, train_labels)
        s_train = macro_accuracy(confusion(train_labels, clf.predict(train_docs)))
        s_val = macro_accuracy(confusion(val_labels, clf.predict(val_docs)))
        return s_train, s_val

    return evaluate
