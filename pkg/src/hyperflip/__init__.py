"""Property transfer by shifting sentence embeddings across a linear decision hyperplane."""

from hyperflip.geometry import Hyperplane, TransferConfig, project, signed_margin, transfer
from hyperflip.classifier import (
    LinearClassifier,
    TrainConfig,
    cross_validate,
    hyperplane_of,
    predict_label,
    predict_proba,
    property_reward,
    sigmoid,
    train_logistic,
)
from hyperflip.reward import BleuConfig, bleu, harmonic_reward, tokenize, total_reward
from hyperflip.bandit import (
    BanditState,
    new_bandit,
    select_arm,
    select_lambda_greedy,
    train_bandit,
    ucb_scores,
    update,
)
from hyperflip.pipeline import EvalReport, PipelineConfig, evaluate, run_experiment, run_transfer

__version__ = "0.1.0"

__all__ = [
    "BanditState",
    "BleuConfig",
    "EvalReport",
    "Hyperplane",
    "LinearClassifier",
    "PipelineConfig",
    "TrainConfig",
    "TransferConfig",
    "bleu",
    "cross_validate",
    "evaluate",
    "harmonic_reward",
    "hyperplane_of",
    "new_bandit",
    "predict_label",
    "predict_proba",
    "project",
    "property_reward",
    "run_experiment",
    "run_transfer",
    "select_arm",
    "select_lambda_greedy",
    "sigmoid",
    "signed_margin",
    "tokenize",
    "total_reward",
    "train_bandit",
    "train_logistic",
    "transfer",
    "ucb_scores",
    "update",
]
