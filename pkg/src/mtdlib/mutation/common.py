"""
Outcomes and helpers shared by the range and topology planners.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from numpy import ndarray

from mtdlib.constants.defaults import ENERGY_SCALE

__all__ = ["Infeasible", "greedy_association", "scale_up", "scale_down"]


@dataclass(frozen=True)
class Infeasible:
    """No plan was produced. ``reason`` is ``"unsat"`` when the constraints provably have no
    solution and ``"budget"`` when the search gave up; ``constraint`` names the constraint
    family responsible when it could be diagnosed.
    """

    reason: str
    constraint: Optional[str] = None
    detail: str = ""
    nodes: int = 0

    def __str__(self) -> str:

        if self.reason == "budget":
            text = "search budget exceeded"
        elif self.constraint is not None:
            text = f"unsatisfiable: {self.constraint}"
        else:
            text = "unsatisfiable"

        if self.detail:
            text += f" ({self.detail})"

        return text


def scale_up(x: float) -> int:
    """Real quantity to integer units, rounded up."""
    return int(np.ceil(np.round(x * ENERGY_SCALE, 6)))


def scale_down(x: float) -> int:
    """Real quantity to integer units, rounded down."""
    return int(np.floor(np.round(x * ENERGY_SCALE, 6)))


def greedy_association(
    covered: ndarray,
    capacity: Sequence[int],
    distances: Optional[ndarray] = None,
) -> List[Optional[int]]:
    """Associates users, in index order, with the nearest covering AP that has spare
    capacity. Ties go to the lowest AP index; users left without an AP get None.

    :param covered: Coverage matrix - shape (N, z), True where AP i covers user k.
    :type covered: numpy array
    :param capacity: Per-AP capacity - length N.
    :type capacity: sequence of integers
    :param distances: User-to-AP distances - shape (z, N). All ties when omitted.
    :type distances: numpy array

    :return: Serving AP index per user.
    :rtype: list
    """

    covered = np.asarray(covered, dtype=bool)
    n_aps, n_users = covered.shape

    if distances is None:
        distances = np.zeros((n_users, n_aps))

    load = np.zeros(n_aps, dtype=int)
    association: List[Optional[int]] = []

    for k in range(n_users):
        chosen = None
        for i in np.argsort(distances[k], kind="stable"):
            if covered[i, k] and load[i] < capacity[i]:
                chosen = int(i)
                break
        if chosen is not None:
            load[chosen] += 1
        association.append(chosen)

    return association
