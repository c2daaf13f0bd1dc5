"""VH-Connect object proposals, budgeted multi-source combination and proposal evaluation."""

from .boxes import (
    BoundingBox,
    GroundTruthAnnotation,
    Proposal,
    iou,
    parse_ground_truth,
    parse_proposals,
    write_proposals,
)
from .combiner import BudgetCombiner, BudgetSplit, combine, combine_all, split_budget
from .evaluation import (
    EvaluationReport,
    RecallCurve,
    abo,
    average_recall,
    evaluate,
    evaluate_at_budgets,
    gt_stats,
    mabo,
    recall_at,
    recall_curve,
)
from .exceptions import ConfigurationError, InvalidBoxError, InvalidInputError, ParseError, VHConnectError
from .generator import VHConfig, VHConnect, connected_components, filter_structures, generate, prescale

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "GroundTruthAnnotation", "Proposal", "iou", "parse_ground_truth", "parse_proposals",
    "write_proposals", "BudgetCombiner", "BudgetSplit", "combine", "combine_all", "split_budget",
    "EvaluationReport", "RecallCurve", "abo", "average_recall", "evaluate", "evaluate_at_budgets", "gt_stats",
    "mabo", "recall_at", "recall_curve", "ConfigurationError", "InvalidBoxError", "InvalidInputError",
    "ParseError", "VHConnectError", "VHConfig", "VHConnect", "connected_components", "filter_structures",
    "generate", "prescale",
]
