"""Aggregate evaluation and solution sets.

A solution of a ground aggregate atom is a pair <S.p, S.n> of disjoint
base subsets such that every interpretation containing S.p and avoiding
S.n satisfies the atom.  Solution sets come in three flavours: the full
set, any complete set, and the minimal complete set, which coincides
with the maximal solution cubes of the atom's truth table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ast import (
    AggregateAtom,
    Atom,
    apply_function,
    compare_with_guard,
    match_pattern,
)
from .config import DEFAULT_LIMITS
from .errors import EvalTypeError, InternalError, ResourceCapError
from .kernels import (
    cube_fold,
    full_table,
    monotone_table,
    prime_implicants,
    truth_table,
)

FULL = "full"
COMPLETE = "complete"
MINIMAL_COMPLETE = "minimal-complete"
M_SOLUTIONS = "m-solutions"


@dataclass(frozen=True)
class Solution:
    """One aggregate solution <S.p, S.n>."""

    pos: frozenset
    neg: frozenset

    def __post_init__(self):
        if self.pos & self.neg:
            raise InternalError("solution components must be disjoint")

    def sort_key(self):
        return (
            tuple(a.sort_key() for a in sorted(self.pos, key=Atom.sort_key)),
            tuple(a.sort_key() for a in sorted(self.neg, key=Atom.sort_key)),
        )

    def __str__(self):
        def side(atoms):
            return "{" + ", ".join(str(a) for a in sorted(atoms, key=Atom.sort_key)) + "}"

        return f"<{side(self.pos)}, {side(self.neg)}>"


@dataclass(frozen=True)
class SolutionSet:
    atom: AggregateAtom
    base: tuple
    solutions: tuple
    kind: str

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)


def covers(s: Solution, t: Solution) -> bool:
    """s covers t: any interpretation making t true makes s true."""
    return s.pos <= t.pos and s.neg <= t.neg


# ---------------------------------------------------------------------------
# Base values and truth tables
# ---------------------------------------------------------------------------


def base_values(agg: AggregateAtom, base) -> list:
    """Collected value (a constant) per base atom, in base order."""
    locs = agg.spec.local_names()
    coll = agg.spec.collected.name
    vals = []
    for atom in base:
        binding = match_pattern(agg.spec.pattern, atom, locs)
        if binding is None:
            raise InternalError(f"base atom {atom} does not match pattern of {agg}")
        vals.append(binding[coll])
    if not agg.spec.multiset and len(set(vals)) != len(vals):
        raise InternalError(f"set comprehension base for {agg} repeats a value")
    return vals


def eval_aggregate(interpretation, agg: AggregateAtom, base) -> bool:
    """Truth of the ground atom with witnesses drawn from I ∩ base."""
    vals = base_values(agg, base)
    present = [v for a, v in zip(base, vals) if a in interpretation]
    av = apply_function(agg.func, present)
    if not av.defined:
        return False
    return compare_with_guard(av.value, agg.rel, agg.guard)


_TABLE_CACHE: dict = {}


def clear_caches():
    _TABLE_CACHE.clear()


def _constant_truth(agg: AggregateAtom, nonempty: bool) -> bool:
    """Atom truth when the guard is a named symbol (numbers sort first)."""
    if agg.func in ("MIN", "MAX", "AVG") and not nonempty:
        return False
    return compare_with_guard(0, agg.rel, agg.guard)


def table_for(agg: AggregateAtom, base) -> int:
    """Cached truth bitmask of ``agg`` over all subsets of ``base``."""
    key = (agg, tuple(base))
    cached = _TABLE_CACHE.get(key)
    if cached is not None:
        return cached
    n = len(base)
    if not agg.guard.is_int:
        table = 0
        for mask in range(1 << n):
            if _constant_truth(agg, nonempty=mask != 0):
                table |= 1 << mask
    elif agg.func == "COUNT":
        table = truth_table([0] * n, "COUNT", agg.rel, agg.guard.value)
    else:
        values = []
        for v in base_values(agg, base):
            if not v.is_int:
                raise EvalTypeError(
                    f"{agg.func} over non-integer collected value {v} (atom {agg})"
                )
            values.append(v.value)
        table = truth_table(values, agg.func, agg.rel, agg.guard.value)
    _TABLE_CACHE[key] = table
    return table


def _index(base) -> dict:
    return {a: i for i, a in enumerate(base)}


def _masks(sol_pos, sol_neg, idx):
    ones = 0
    zeros = 0
    for a in sol_pos:
        ones |= 1 << idx[a]
    for a in sol_neg:
        zeros |= 1 << idx[a]
    return ones, zeros


def _solution_from_masks(base, ones, zeros) -> Solution:
    pos = frozenset(a for i, a in enumerate(base) if ones >> i & 1)
    neg = frozenset(a for i, a in enumerate(base) if zeros >> i & 1)
    return Solution(pos, neg)


# ---------------------------------------------------------------------------
# Solution predicates and enumerations
# ---------------------------------------------------------------------------


def is_solution(agg: AggregateAtom, base, cand: Solution,
                limits=DEFAULT_LIMITS) -> bool:
    """Brute-force check over every completion of the undecided atoms."""
    base = tuple(base)
    base_set = set(base)
    if not (cand.pos <= base_set and cand.neg <= base_set):
        raise InternalError("solution components must be subsets of the base")
    free = [a for a in base if a not in cand.pos and a not in cand.neg]
    if len(free) > limits.max_free_atoms:
        raise ResourceCapError("solution check free atoms", len(free),
                               limits.max_free_atoms)
    if not agg.guard.is_int:
        # truth depends only on definedness; the all-false completion
        # leaves the collection empty whenever S.p is empty
        return _constant_truth(agg, nonempty=bool(cand.pos))
    if agg.func == "COUNT":
        seed_vals = [0] * len(cand.pos)
        free_vals = [0] * len(free)
    else:
        vals = dict(zip(base, base_values(agg, base)))
        seed_vals = []
        for a in cand.pos:
            v = vals[a]
            if not v.is_int:
                raise EvalTypeError(f"{agg.func} over non-integer value {v}")
            seed_vals.append(v.value)
        free_vals = []
        for a in free:
            v = vals[a]
            if not v.is_int:
                raise EvalTypeError(f"{agg.func} over non-integer value {v}")
            free_vals.append(v.value)
    seed = (
        len(seed_vals),
        sum(seed_vals),
        min(seed_vals) if seed_vals else None,
        max(seed_vals) if seed_vals else None,
    )
    table = truth_table(free_vals, agg.func, agg.rel, agg.guard.value, seed=seed)
    return table == full_table(len(free))


def _enumerate_solutions(agg, base, choices, limits) -> list:
    """All solution pairs where atom i may take the roles in choices[i].

    choices[i] is a subset of "pfn" (positive / free / negative).  Cubes
    that are already identically true are expanded combinatorially;
    identically false cubes are pruned (solutions are closed under
    extension, Observation (ii)).
    """
    base = tuple(base)
    n = len(base)
    table = table_for(agg, base)
    out = []

    def expand_all(i, ones, zeros):
        if i == n:
            out.append((ones, zeros))
            return
        for role in choices[i]:
            if role == "p":
                expand_all(i + 1, ones | (1 << i), zeros)
            elif role == "n":
                expand_all(i + 1, ones, zeros | (1 << i))
            else:
                expand_all(i + 1, ones, zeros)

    def rec(i, ones, zeros):
        if cube_fold(table, n, ones, zeros):
            expand_all(i, ones, zeros)
            return
        if i == n:
            return
        if not cube_fold(table, n, ones, zeros, any_true=True):
            return
        for role in choices[i]:
            if role == "p":
                rec(i + 1, ones | (1 << i), zeros)
            elif role == "n":
                rec(i + 1, ones, zeros | (1 << i))
            else:
                rec(i + 1, ones, zeros)

    rec(0, 0, 0)
    # the same final pair can be reached once per choice path only, but
    # expand_all after an early all-true check may duplicate pairs that a
    # deeper recursion would also reach; dedupe defensively
    seen = set()
    sols = []
    for ones, zeros in out:
        if (ones, zeros) not in seen:
            seen.add((ones, zeros))
            sols.append(_solution_from_masks(base, ones, zeros))
    return sorted(sols, key=Solution.sort_key)


def all_solutions(agg: AggregateAtom, base, limits=DEFAULT_LIMITS) -> SolutionSet:
    """The full solution set SOLN(agg) over the base."""
    base = tuple(base)
    if len(base) > limits.max_full_base:
        raise ResourceCapError(
            "full solution base", len(base), limits.max_full_base,
            hint="use the minimal-complete mode",
        )
    sols = _enumerate_solutions(agg, base, ["pnf"] * len(base), limits)
    return SolutionSet(agg, base, tuple(sols), FULL)


def minimal_complete_solutions(agg: AggregateAtom, base,
                               limits=DEFAULT_LIMITS) -> SolutionSet:
    """The complete and irreducible solution set: maximal solution cubes."""
    base = tuple(base)
    if len(base) > limits.max_minimal_base:
        raise ResourceCapError(
            "minimal solution base", len(base), limits.max_minimal_base
        )
    table = table_for(agg, base)
    cubes = prime_implicants(table, len(base))
    sols = sorted(
        (_solution_from_masks(base, o, z) for o, z in cubes), key=Solution.sort_key
    )
    return SolutionSet(agg, base, tuple(sols), MINIMAL_COMPLETE)


def m_solutions(agg: AggregateAtom, base, model,
                limits=DEFAULT_LIMITS) -> SolutionSet:
    """Solutions true in the model: S.p ⊆ M and S.n ∩ M = ∅."""
    base = tuple(base)
    if len(base) > limits.max_free_atoms:
        raise ResourceCapError(
            "m-solution base", len(base), limits.max_free_atoms
        )
    choices = ["pf" if a in model else "nf" for a in base]
    sols = _enumerate_solutions(agg, base, choices, limits)
    return SolutionSet(agg, base, tuple(sols), M_SOLUTIONS)


def is_monotone_atom(agg: AggregateAtom, base, limits=DEFAULT_LIMITS):
    """True / False / "unknown": does truth persist under supersets?"""
    base = tuple(base)
    if len(base) > limits.max_minimal_base:
        return "unknown"
    try:
        table = table_for(agg, base)
    except EvalTypeError:
        return "unknown"
    return monotone_table(table, len(base))


# ---------------------------------------------------------------------------
# Reference algorithm (kept as an oracle for the production path)
# ---------------------------------------------------------------------------


def find_solution_reference(agg: AggregateAtom, base) -> SolutionSet:
    """Depth-first solution search with a visited-state memo, followed by a
    covering reduction; exponential, test-sized bases only."""
    base = tuple(base)
    n = len(base)
    found = []
    visited = set()

    def rec(ones, zeros):
        if (ones, zeros) in visited:
            return
        visited.add((ones, zeros))
        cand = _solution_from_masks(base, ones, zeros)
        if is_solution(agg, base, cand):
            found.append((ones, zeros))
            return
        if (ones | zeros) == (1 << n) - 1:
            return
        for i in range(n):
            bit = 1 << i
            if (ones | zeros) & bit:
                continue
            rec(ones | bit, zeros)
            rec(ones, zeros | bit)

    rec(0, 0)
    sols = [_solution_from_masks(base, o, z) for o, z in found]
    reduced = [
        s
        for s in sols
        if not any(t is not s and covers(t, s) for t in sols)
    ]
    # drop duplicates that covering cannot separate
    uniq = sorted(set(reduced), key=Solution.sort_key)
    return SolutionSet(agg, base, tuple(uniq), COMPLETE)
