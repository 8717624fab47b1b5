"""Opinion mining for student course evaluations.

Trains a polarity classifier over short Spanish comments, discovers
latent topics, aggregates both into course-level features for a score
bucket model, and serves a review queue for low-confidence predictions.
"""

from .corpus import Comment, CourseRecord, DatasetSplit
from .metrics import POLARITIES, confusion, macro_accuracy, threshold_curve
from .polarity import PolarityClassifier, PolarityPrediction
from .scorer import BUCKETS, GradientBoostedScorer, bucketize
from .seeds import derive_seed
from .textprep.preprocess import PreprocessConfig, TokenizedDoc, preprocess
from .topics import LatentTopicModel
from .tuner import SearchSpace, Trial, objective_fn, run_search

__version__ = "0.1.0"

__all__ = [
    "BUCKETS",
    "Comment",
    "CourseRecord",
    "DatasetSplit",
    "GradientBoostedScorer",
    "LatentTopicModel",
    "POLARITIES",
    "PolarityClassifier",
    "PolarityPrediction",
    "PreprocessConfig",
    "SearchSpace",
    "TokenizedDoc",
    "Trial",
    "bucketize",
    "confusion",
    "derive_seed",
    "macro_accuracy",
    "objective_fn",
    "preprocess",
    "run_search",
    "threshold_curve",
    "__version__",
]
