"""Model variant systems compiled to square residual representations."""

from .decentralized import FlexibleCE, StickyCE, retail_block_ss
from .first_best import FirstBest
from .planner_flex import PlannerFlex, PlannerOLL
from .planner_sticky import PlannerSticky, PlannerOLLMP

__all__ = [
    "FlexibleCE",
    "StickyCE",
    "FirstBest",
    "PlannerFlex",
    "PlannerOLL",
    "PlannerSticky",
    "PlannerOLLMP",
    "retail_block_ss",
]
