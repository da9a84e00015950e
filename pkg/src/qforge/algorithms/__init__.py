"""Algorithms built on the variable, arithmetic and environment layers."""

from qforge.algorithms.database import db_oracle, fnv1a_64, hash_label
from qforge.algorithms.grover import (
    diffuser,
    grover_iterations,
    grovers_alg,
    success_probability,
    tag_state,
)
from qforge.algorithms.loops import q_range, qRange
from qforge.algorithms.qpe import qpe
from qforge.algorithms.shor import (
    extract_order,
    find_order,
    order_finding_register,
    shor_details,
    shor_factor,
)

QPE = qpe

__all__ = [
    "QPE",
    "db_oracle",
    "diffuser",
    "extract_order",
    "find_order",
    "fnv1a_64",
    "grover_iterations",
    "grovers_alg",
    "hash_label",
    "q_range",
    "qRange",
    "order_finding_register",
    "qpe",
    "shor_details",
    "shor_factor",
    "success_probability",
    "tag_state",
]
