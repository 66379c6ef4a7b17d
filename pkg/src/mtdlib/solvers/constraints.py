"""
Constraint vocabulary of the finite-domain solver.

Every constraint is a frozen value naming the variables it touches. Variables are the
integer ids returned by :meth:`mtdlib.solvers.Model.add_variable`.
"""

from dataclasses import dataclass
from typing import Callable, ClassVar, FrozenSet, Tuple, Union

__all__ = [
    "Literal",
    "EqConst",
    "EqVar",
    "Neq",
    "Member",
    "LinearLe",
    "ExactlyOne",
    "ReifiedEq",
    "Implies",
    "Clause",
    "Connected",
    "Constraint",
    "CONSTRAINT_TYPES",
]


@dataclass(frozen=True)
class Literal:
    """``var == value`` when ``equal`` is True, else ``var != value``."""

    var: int
    value: int
    equal: bool = True

    def holds(self, x: int) -> bool:
        return (x == self.value) == self.equal


@dataclass(frozen=True)
class EqConst:
    x: int
    value: int

    @property
    def variables(self) -> Tuple[int, ...]:
        return (self.x,)

    boolean_slots: ClassVar[Tuple[int, ...]] = ()


@dataclass(frozen=True)
class EqVar:
    x: int
    y: int

    @property
    def variables(self) -> Tuple[int, ...]:
        return (self.x, self.y)

    boolean_slots: ClassVar[Tuple[int, ...]] = ()


@dataclass(frozen=True)
class Neq:
    x: int
    y: int

    @property
    def variables(self) -> Tuple[int, ...]:
        return (self.x, self.y)

    boolean_slots: ClassVar[Tuple[int, ...]] = ()


@dataclass(frozen=True)
class Member:
    x: int
    values: FrozenSet[int]

    @property
    def variables(self) -> Tuple[int, ...]:
        return (self.x,)

    boolean_slots: ClassVar[Tuple[int, ...]] = ()


@dataclass(frozen=True)
class LinearLe:
    """:math:`\\sum_i w_i x_i \\leq` ``bound``, with ``terms`` a tuple of (weight, var)."""

    terms: Tuple[Tuple[int, int], ...]
    bound: int

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(var for _, var in self.terms)

    boolean_slots: ClassVar[Tuple[int, ...]] = ()


@dataclass(frozen=True)
class ExactlyOne:
    bools: Tuple[int, ...]

    @property
    def variables(self) -> Tuple[int, ...]:
        return self.bools

    @property
    def boolean_slots(self) -> Tuple[int, ...]:
        return self.bools


@dataclass(frozen=True)
class ReifiedEq:
    """``b == 1`` exactly when ``x == value``."""

    b: int
    x: int
    value: int

    @property
    def variables(self) -> Tuple[int, ...]:
        return (self.b, self.x)

    @property
    def boolean_slots(self) -> Tuple[int, ...]:
        return (self.b,)


@dataclass(frozen=True)
class Implies:
    """``b == 1`` implies at least one of the equality literals."""

    b: int
    literals: Tuple[Literal, ...]

    def __post_init__(self):
        if not all(lit.equal for lit in self.literals):
            raise ValueError("implication accepts equality literals only")

    @property
    def variables(self) -> Tuple[int, ...]:
        return (self.b,) + tuple(lit.var for lit in self.literals)

    @property
    def boolean_slots(self) -> Tuple[int, ...]:
        return (self.b,)


@dataclass(frozen=True)
class Clause:
    """Disjunction of equality and disequality literals. The empty clause is false."""

    literals: Tuple[Literal, ...]

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(lit.var for lit in self.literals)

    boolean_slots: ClassVar[Tuple[int, ...]] = ()


@dataclass(frozen=True)
class Connected:
    """The graph over ``nodes`` is connected, where nodes ``i`` and ``j`` holding values
    ``a`` and ``b`` are adjacent when ``neighbor(i, a, j, b)`` is True. ``neighbor``
    must be symmetric.
    """

    nodes: Tuple[int, ...]
    neighbor: Callable[[int, int, int, int], bool]

    @property
    def variables(self) -> Tuple[int, ...]:
        return self.nodes

    boolean_slots: ClassVar[Tuple[int, ...]] = ()


CONSTRAINT_TYPES = (EqConst, EqVar, Neq, Member, LinearLe, ExactlyOne, ReifiedEq, Implies, Clause, Connected)

Constraint = Union[EqConst, EqVar, Neq, Member, LinearLe, ExactlyOne, ReifiedEq, Implies, Clause, Connected]
