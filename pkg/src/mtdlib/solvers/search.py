"""
Depth-first backtracking search with constraint propagation.

Variables are chosen smallest-domain-first with ties broken by a seeded random rank;
values are tried in seeded random order. The same (model, seed) pair always explores the
same tree. Running out of search nodes raises :class:`SearchBudgetExceeded`, which is
never reported as unsatisfiability.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from mtdlib.constants.defaults import NODE_BUDGET

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
from .evaluate import check_solution
from .model import Model

__all__ = [
    "Solution",
    "Unsat",
    "SearchBudgetExceeded",
    "SolutionLimitExceeded",
    "solve",
    "solve_all",
    "solve_portfolio",
    "portfolio_seeds",
]

LOG = logging.getLogger(__name__)

ZERO = frozenset((0,))
ONE = frozenset((1,))


@dataclass(frozen=True)
class Solution:
    """A total assignment; ``values[v]`` is the value of variable ``v``."""

    values: Tuple[int, ...]

    def __getitem__(self, var: int) -> int:
        return self.values[var]

    @property
    def assignment(self) -> Dict[int, int]:
        return dict(enumerate(self.values))


@dataclass(frozen=True)
class Unsat:
    nodes: int = 0


class SearchBudgetExceeded(Exception):
    def __init__(self, nodes: int):
        self.nodes = nodes
        super().__init__(f"search node budget exceeded after {nodes} nodes")


class SolutionLimitExceeded(Exception):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"more than {limit} solutions")


class _EqConst:
    __slots__ = ("x", "allowed")

    def __init__(self, c: EqConst):
        self.x = c.x
        self.allowed = frozenset((c.value,))

    def propagate(self, s: "_Search") -> bool:
        return s.restrict(self.x, self.allowed)


class _EqVar:
    __slots__ = ("x", "y")

    def __init__(self, c: EqVar):
        self.x = c.x
        self.y = c.y

    def propagate(self, s: "_Search") -> bool:
        common = s.doms[self.x] & s.doms[self.y]
        return s.restrict(self.x, common) and s.restrict(self.y, common)


class _Neq:
    __slots__ = ("x", "y")

    def __init__(self, c: Neq):
        self.x = c.x
        self.y = c.y

    def propagate(self, s: "_Search") -> bool:

        if self.x == self.y:
            return False

        dx = s.doms[self.x]
        if len(dx) == 1 and not s.remove(self.y, next(iter(dx))):
            return False

        dy = s.doms[self.y]
        if len(dy) == 1 and not s.remove(self.x, next(iter(dy))):
            return False

        return True


class _Member:
    __slots__ = ("x", "allowed")

    def __init__(self, c: Member):
        self.x = c.x
        self.allowed = frozenset(c.values)

    def propagate(self, s: "_Search") -> bool:
        return s.restrict(self.x, self.allowed)


class _LinearLe:
    """Bounds reasoning: each term may use at most the slack the other terms leave at their minimum."""

    __slots__ = ("terms", "bound")

    def __init__(self, c: LinearLe):
        self.terms = tuple((int(w), v) for w, v in c.terms if w != 0)
        self.bound = int(c.bound)

    def propagate(self, s: "_Search") -> bool:

        doms = s.doms
        lows = []
        total = 0
        for w, v in self.terms:
            d = doms[v]
            low = w * min(d) if w > 0 else w * max(d)
            lows.append(low)
            total += low

        if total > self.bound:
            return False

        for (w, v), low in zip(self.terms, lows):
            slack = self.bound - total + low
            d = doms[v]
            high = w * max(d) if w > 0 else w * min(d)
            if high <= slack:
                continue
            if not s.restrict(v, frozenset(x for x in d if w * x <= slack)):
                return False

        return True


class _ExactlyOne:
    __slots__ = ("bools",)

    def __init__(self, c: ExactlyOne):
        self.bools = c.bools

    def propagate(self, s: "_Search") -> bool:

        doms = s.doms
        ones = 0
        open_count = 0
        last_open = -1

        for b in self.bools:
            d = doms[b]
            if 1 in d:
                if len(d) == 1:
                    ones += 1
                    if ones > 1:
                        return False
                else:
                    open_count += 1
                    last_open = b

        if ones == 1:
            if open_count:
                for b in self.bools:
                    if len(doms[b]) == 2 and not s.restrict(b, ZERO):
                        return False
            return True

        if open_count == 0:
            return False

        if open_count == 1:
            return s.restrict(last_open, ONE)

        return True


class _ReifiedEq:
    __slots__ = ("b", "x", "value")

    def __init__(self, c: ReifiedEq):
        self.b = c.b
        self.x = c.x
        self.value = c.value

    def propagate(self, s: "_Search") -> bool:

        dx = s.doms[self.x]

        if self.value not in dx:
            return s.restrict(self.b, ZERO)

        if len(dx) == 1:
            return s.restrict(self.b, ONE)

        db = s.doms[self.b]
        if len(db) == 1:
            if 1 in db:
                return s.restrict(self.x, frozenset((self.value,)))
            return s.remove(self.x, self.value)

        return True


def _propagate_clause(s: "_Search", literals) -> bool:
    """Unit propagation for a disjunction of (dis)equality literals: fails when every
    literal is false, and narrows the variable when all undecided literals share it.
    """

    doms = s.doms
    open_var = -1
    open_lits = []

    for lit in literals:
        d = doms[lit.var]
        if lit.equal:
            if lit.value not in d:
                continue
            if len(d) == 1:
                return True
        else:
            if lit.value not in d:
                return True
            if len(d) == 1:
                continue

        if open_var < 0:
            open_var = lit.var
        elif open_var != lit.var:
            return True
        open_lits.append(lit)

    if open_var < 0:
        return False

    d = doms[open_var]
    allowed = set()
    for lit in open_lits:
        if lit.equal:
            allowed.add(lit.value)
        else:
            allowed.update(d - {lit.value})

    return s.restrict(open_var, frozenset(allowed))


class _Clause:
    __slots__ = ("literals",)

    def __init__(self, c: Clause):
        self.literals = c.literals

    def propagate(self, s: "_Search") -> bool:
        return _propagate_clause(s, self.literals)


class _Implies:
    __slots__ = ("b", "literals")

    def __init__(self, c: Implies):
        self.b = c.b
        self.literals = c.literals

    def propagate(self, s: "_Search") -> bool:

        db = s.doms[self.b]

        if 1 not in db:
            return True

        if len(db) == 2:
            doms = s.doms
            if all(lit.value not in doms[lit.var] for lit in self.literals):
                return s.restrict(self.b, ZERO)
            return True

        return _propagate_clause(s, self.literals)


class _Connected:
    """Fails as soon as the graph of possible links over the current domains is disconnected.
    Once every node is bound this is the exact connectivity test.
    """

    __slots__ = ("nodes", "support")

    def __init__(self, c: Connected, domains: Sequence[Tuple[int, ...]]):
        self.nodes = c.nodes
        n = len(c.nodes)
        self.support = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                dom_j = domains[c.nodes[j]]
                self.support[i][j] = {
                    a: frozenset(b for b in dom_j if c.neighbor(i, a, j, b))
                    for a in domains[c.nodes[i]]
                }

    def propagate(self, s: "_Search") -> bool:

        n = len(self.nodes)
        if n <= 1:
            return True

        doms = [s.doms[v] for v in self.nodes]
        reached = [False] * n
        reached[0] = True
        stack = [0]
        count = 1

        while stack:
            i = stack.pop()
            row = self.support[i]
            for j in range(n):
                if reached[j]:
                    continue
                sup = row[j]
                dj = doms[j]
                if any(not sup[a].isdisjoint(dj) for a in doms[i]):
                    reached[j] = True
                    count += 1
                    stack.append(j)

        return count == n


def _compile(constraint, domains):

    if isinstance(constraint, Connected):
        return _Connected(constraint, domains)

    kind = {
        EqConst: _EqConst,
        EqVar: _EqVar,
        Neq: _Neq,
        Member: _Member,
        LinearLe: _LinearLe,
        ExactlyOne: _ExactlyOne,
        ReifiedEq: _ReifiedEq,
        Implies: _Implies,
        Clause: _Clause,
    }[type(constraint)]

    return kind(constraint)


class _Frame:
    __slots__ = ("var", "values", "next", "mark", "start")

    def __init__(self, var, values, mark, start):
        self.var = var
        self.values = values
        self.next = 0
        self.mark = mark
        self.start = start


class _Search:
    def __init__(self, model: Model, node_budget: int, rng: Optional[np.random.Generator]):

        self.doms: List[frozenset] = [frozenset(d) for d in model.domains]
        self.trail: List[Tuple[int, frozenset]] = []
        self.props = [_compile(c, model.domains) for c in model.constraints]

        self.watchers: List[List[int]] = [[] for _ in self.doms]
        for p, c in enumerate(model.constraints):
            for v in set(c.variables):
                self.watchers[v].append(p)

        self.queue: deque = deque()
        self.queued = [False] * len(self.props)

        self.rng = rng
        self.nodes = 0
        self.node_budget = node_budget

        n = len(self.doms)
        if rng is None:
            self.order = list(range(n))
        else:
            self.order = [int(v) for v in np.argsort(rng.permutation(n), kind="stable")]
        self.start = 0

    def restrict(self, v: int, allowed: frozenset) -> bool:

        old = self.doms[v]
        new = old & allowed

        if len(new) == len(old):
            return True

        if not new:
            return False

        self._change(v, old, new)
        return True

    def remove(self, v: int, value: int) -> bool:

        old = self.doms[v]

        if value not in old:
            return True

        if len(old) == 1:
            return False

        self._change(v, old, old - {value})
        return True

    def _change(self, v, old, new):
        self.trail.append((v, old))
        self.doms[v] = new
        queued = self.queued
        for p in self.watchers[v]:
            if not queued[p]:
                queued[p] = True
                self.queue.append(p)

    def propagate(self) -> bool:

        queue = self.queue
        queued = self.queued
        props = self.props

        while queue:
            p = queue.popleft()
            queued[p] = False
            if not props[p].propagate(self):
                for q in queue:
                    queued[q] = False
                queue.clear()
                return False

        return True

    def undo(self, mark: int) -> None:
        trail = self.trail
        doms = self.doms
        while len(trail) > mark:
            v, old = trail.pop()
            doms[v] = old

    def select(self) -> Optional[int]:

        doms = self.doms
        order = self.order
        n = len(order)

        i = self.start
        while i < n and len(doms[order[i]]) == 1:
            i += 1
        self.start = i

        best = None
        best_size = 0
        for idx in range(i, n):
            v = order[idx]
            size = len(doms[v])
            if size == 1:
                continue
            if best is None or size < best_size:
                best = v
                best_size = size
                if size == 2:
                    break

        return best

    def _frame(self, var: int) -> _Frame:

        values = sorted(self.doms[var])
        if self.rng is not None:
            values = [values[i] for i in self.rng.permutation(len(values))]

        return _Frame(var, values, len(self.trail), self.start)

    def run(self) -> Iterator[Tuple[int, ...]]:

        for p in range(len(self.props)):
            self.queued[p] = True
            self.queue.append(p)

        if not self.propagate():
            return

        var = self.select()
        if var is None:
            yield tuple(next(iter(d)) for d in self.doms)
            return

        stack = [self._frame(var)]

        while stack:
            frame = stack[-1]
            self.undo(frame.mark)
            self.start = frame.start

            if frame.next >= len(frame.values):
                stack.pop()
                continue

            value = frame.values[frame.next]
            frame.next += 1

            self.nodes += 1
            if self.nodes > self.node_budget:
                raise SearchBudgetExceeded(self.nodes)

            self.restrict(frame.var, frozenset((value,)))

            if not self.propagate():
                continue

            var = self.select()
            if var is None:
                yield tuple(next(iter(d)) for d in self.doms)
                continue

            stack.append(self._frame(var))


def _checked(model: Model, values: Tuple[int, ...]) -> Solution:

    if not check_solution(model, values):
        raise RuntimeError("search returned an assignment that violates the model")

    return Solution(values)


def solve(model: Model, seed: Optional[int] = None, node_budget: int = NODE_BUDGET) -> Union[Solution, Unsat]:
    """Finds one satisfying assignment of ``model``.

    :param model: The constraint model.
    :type model: Model
    :param seed: Seed of the variable tie-break and value order. Defaults to ``model.rng_seed``.
    :type seed: integer
    :param node_budget: Maximum number of search nodes (value assignments tried).
    :type node_budget: integer

    :return: A Solution, or Unsat when the model has no solution.
    :rtype: Solution or Unsat
    """

    if seed is None:
        seed = model.rng_seed

    search = _Search(model, node_budget, np.random.default_rng(seed))

    for values in search.run():
        LOG.debug("solved %d variables after %d nodes (seed %d)", len(values), search.nodes, seed)
        return _checked(model, values)

    LOG.debug("unsatisfiable after %d nodes (seed %d)", search.nodes, seed)

    return Unsat(search.nodes)


def solve_all(model: Model, limit: int, node_budget: int = NODE_BUDGET) -> List[Solution]:
    """Enumerates every satisfying assignment, in a deterministic order and without
    duplicates. Meant for small models.

    Raises :class:`SolutionLimitExceeded` when the model has more than ``limit`` solutions.
    """

    if limit < 1:
        raise ValueError("limit must be positive")

    search = _Search(model, node_budget, None)
    solutions: List[Solution] = []

    for values in search.run():
        if len(solutions) == limit:
            raise SolutionLimitExceeded(limit)
        solutions.append(_checked(model, values))

    return solutions


def portfolio_seeds(seed: int, restarts: int) -> List[int]:
    """``seed`` followed by ``restarts - 1`` seeds spawned from it."""

    if restarts < 1:
        raise ValueError("restarts must be positive")

    if restarts == 1:
        return [seed]

    spawned = np.random.SeedSequence(seed).generate_state(restarts - 1, dtype=np.uint64)

    return [seed] + [int(s) for s in spawned]


def solve_portfolio(
    model: Model, seeds: Sequence[int], node_budget: int = NODE_BUDGET
) -> Tuple[Union[Solution, Unsat], int]:
    """Runs :func:`solve` seed by seed and returns the first definite outcome together with
    the seed that produced it. Raises :class:`SearchBudgetExceeded` if every seed runs out
    of budget.
    """

    if len(seeds) == 0:
        raise ValueError("expected at least one seed")

    exhausted: Optional[SearchBudgetExceeded] = None

    for seed in seeds:
        try:
            return solve(model, seed, node_budget), seed
        except SearchBudgetExceeded as error:
            LOG.info("seed %d ran out of budget, restarting", seed)
            exhausted = error

    assert exhausted is not None
    raise exhausted
