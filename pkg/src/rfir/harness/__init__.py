from .splits import SplitSpec, filter_corpus, split_corpus
from .synthetic import SyntheticCorpusSpec, generate_synthetic_corpus
from .tasks import TaskKind, TaskTrial, enumerate_trials, simulate_feedback
from .runner import EvalReport, TaskRunConfig, run_task, run_trial

__all__ = [
    "SplitSpec",
    "filter_corpus",
    "split_corpus",
    "SyntheticCorpusSpec",
    "generate_synthetic_corpus",
    "TaskKind",
    "TaskTrial",
    "enumerate_trials",
    "simulate_feedback",
    "EvalReport",
    "TaskRunConfig",
    "run_task",
    "run_trial",
]
