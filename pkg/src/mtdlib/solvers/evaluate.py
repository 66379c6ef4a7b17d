"""
Direct evaluation of constraints on a complete assignment, independent of the search
propagators. Every solution the search returns is re-checked here.
"""

from typing import List, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .constraints import (
    Clause,
    Connected,
    EqConst,
    EqVar,
    ExactlyOne,
    Implies,
    LinearLe,
    Member,
    Neq,
    ReifiedEq,
)
from .model import Model

__all__ = ["check_solution", "violated_constraints", "constraint_holds"]


def _connected(constraint: Connected, values: Sequence[int]) -> bool:

    n = len(constraint.nodes)
    if n <= 1:
        return True

    held = [values[v] for v in constraint.nodes]
    adjacency = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if constraint.neighbor(i, held[i], j, held[j]):
                adjacency[i, j] = adjacency[j, i] = True

    n_components, _ = connected_components(csr_matrix(adjacency), directed=False)

    return n_components == 1


def constraint_holds(constraint, values: Sequence[int]) -> bool:
    """True when ``constraint`` is satisfied by the total assignment ``values``."""

    if isinstance(constraint, EqConst):
        return values[constraint.x] == constraint.value

    if isinstance(constraint, EqVar):
        return values[constraint.x] == values[constraint.y]

    if isinstance(constraint, Neq):
        return values[constraint.x] != values[constraint.y]

    if isinstance(constraint, Member):
        return values[constraint.x] in constraint.values

    if isinstance(constraint, LinearLe):
        return sum(w * values[v] for w, v in constraint.terms) <= constraint.bound

    if isinstance(constraint, ExactlyOne):
        return sum(values[b] for b in constraint.bools) == 1

    if isinstance(constraint, ReifiedEq):
        return (values[constraint.b] == 1) == (values[constraint.x] == constraint.value)

    if isinstance(constraint, Implies):
        return values[constraint.b] == 0 or any(lit.holds(values[lit.var]) for lit in constraint.literals)

    if isinstance(constraint, Clause):
        return any(lit.holds(values[lit.var]) for lit in constraint.literals)

    if isinstance(constraint, Connected):
        return _connected(constraint, values)

    raise ValueError(f"unknown constraint type {type(constraint).__name__}")


def violated_constraints(model: Model, values: Sequence[int]) -> List[int]:
    """Indices of the constraints of ``model`` that ``values`` breaks, in model order."""

    if len(values) != len(model.domains):
        raise ValueError("expected one value per variable")

    return [idx for idx, c in enumerate(model.constraints) if not constraint_holds(c, values)]


def check_solution(model: Model, values: Sequence[int]) -> bool:

    if len(values) != len(model.domains):
        return False

    if any(x not in dom for x, dom in zip(values, model.domains)):
        return False

    return not violated_constraints(model, values)
