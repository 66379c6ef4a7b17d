from typing import Iterable, List, Optional, Tuple

from .constraints import CONSTRAINT_TYPES, Constraint

__all__ = ["Model", "ModelError"]


class ModelError(ValueError):
    """A model that refers to unknown variables, or misuses a boolean slot."""


class Model:
    """A finite-domain constraint model: integer variables with finite domains and a list
    of constraints over them.

    Variables are identified by consecutive integers starting at 0, in declaration order.
    """

    def __init__(self, rng_seed: int = 0):
        self.domains: List[Tuple[int, ...]] = []
        self.names: List[Optional[str]] = []
        self.constraints: List[Constraint] = []
        self.rng_seed = rng_seed

    def __len__(self) -> int:
        return len(self.domains)

    def add_variable(self, domain: Iterable[int], name: Optional[str] = None) -> int:
        """Declares a variable and returns its id.

        :param domain: Candidate integer values. Duplicates are dropped; the stored domain is sorted.
        :type domain: iterable of integers
        :param name: Optional label, used in log messages only.
        :type name: string

        :return: The new variable id.
        :rtype: integer
        """

        values = tuple(sorted(set(int(v) for v in domain)))

        if not values:
            raise ModelError("empty domain")

        self.domains.append(values)
        self.names.append(name)

        return len(self.domains) - 1

    def add_bool(self, name: Optional[str] = None) -> int:
        return self.add_variable((0, 1), name)

    def add_constraint(self, constraint: Constraint) -> None:
        """Appends a constraint after checking that it only names declared variables and
        that variables in boolean positions have 0/1 domains.
        """

        if not isinstance(constraint, CONSTRAINT_TYPES):
            raise ModelError(f"unknown constraint type {type(constraint).__name__}")

        n = len(self.domains)
        for var in constraint.variables:
            if not 0 <= var < n:
                raise ModelError(f"unknown variable {var}")

        for var in constraint.boolean_slots:
            if not set(self.domains[var]) <= {0, 1}:
                raise ModelError(f"variable {var} is not boolean")

        self.constraints.append(constraint)
