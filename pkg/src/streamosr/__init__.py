"""Streaming open-set recognition: entropy-gated softmax classification over incremental k-means."""

from .classifier import SoftmaxClassifier
from .clustering import ClusterState, davies_bouldin, warmup_init
from .core import UNKNOWN, Dataset, ExperimentConfig, Instance, label_space_partition
from .detector import entropy, is_unknown, pseudo_probabilities
from .framework import BufferThreshold, RunRecord, run_stream, warm_up
from .metrics import MetricsReport, evaluate, open_macro_f1, roc_auc_youden, wilcoxon_signed_rank

__version__ = "0.1.0"
