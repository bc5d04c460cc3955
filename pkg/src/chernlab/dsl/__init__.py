"""Metric-entry expression language with exact Wirtinger differentiation."""

from .expr import (
    Binary,
    Const,
    Expression,
    Func,
    Neg,
    Pow,
    Var,
    differentiate,
    evaluate,
    evaluate_zw,
    to_source,
    variables,
)
from .metric import MetricJet, MetricSpec, finite_difference, finite_difference_jet, metric_jet, multi_indices
from .parser import parse_expression

__all__ = [
    "Binary",
    "Const",
    "Expression",
    "Func",
    "MetricJet",
    "MetricSpec",
    "Neg",
    "Pow",
    "Var",
    "differentiate",
    "evaluate",
    "evaluate_zw",
    "finite_difference",
    "finite_difference_jet",
    "metric_jet",
    "multi_indices",
    "parse_expression",
    "to_source",
    "variables",
]
