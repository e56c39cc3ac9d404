"""Rigid Okubo systems of types II*, III*, IV, IV*: canonical forms, Katz
operations, connection coefficients and monodromy, with a numerical oracle."""
from .canonical import ExponentChart, build, random_chart
from .connection import ConnectionTable, calibrated_branch, chain_table, closed_form
from .core import OkuboSystem, validate
from .katz import KatzStep, katz_apply
from .monodromy import MonodromyTuple, assemble, product_relation, rigidity_index
from .numerics import BranchConvention, cgamma, e_of

__all__ = [
    "BranchConvention", "ConnectionTable", "ExponentChart", "KatzStep", "MonodromyTuple",
    "OkuboSystem", "assemble", "build", "calibrated_branch", "cgamma", "chain_table",
    "closed_form", "e_of", "katz_apply", "product_relation", "random_chart",
    "rigidity_index", "validate",
]
