"""Desk-scale objectives with analytic and finite-difference gradients."""

from __future__ import annotations

from .base import (
    Objective,
    ObjectiveKind,
    Params,
    analytic_gradient,
    as_params,
    eval_loss,
    layer_gradient,
    layer_loss,
)
from .dataset import (
    EVAL_BATCH,
    Dataset,
    SplitData,
    load_dataset,
    split_dataset,
    synthetic_dataset,
)
from .logistic import LogisticTask
from .mlp import TinyMlp
from .oracles import finite_diff_gradient
from .quadratic import MatrixQuadratic

__all__ = [
    "EVAL_BATCH",
    "Dataset",
    "LogisticTask",
    "MatrixQuadratic",
    "Objective",
    "ObjectiveKind",
    "Params",
    "SplitData",
    "TinyMlp",
    "analytic_gradient",
    "as_params",
    "eval_loss",
    "finite_diff_gradient",
    "layer_gradient",
    "layer_loss",
    "load_dataset",
    "split_dataset",
    "synthetic_dataset",
]
