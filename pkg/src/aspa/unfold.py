"""Program unfolding: aggregate atoms replaced by their solutions.

Static unfolding turns a ground program into a normal program (one rule
per choice of solution per aggregate atom); unfolding with respect to an
interpretation produces a definite program from the solutions true in it.
The aggregate-free head reduct rewrites aggregate-headed rules into
constraint or support rules so the second transformation applies.
"""

from __future__ import annotations

import itertools

from .ast import Atom, AggregateAtom, Falsum, Rule
from .aggregates import (
    FULL,
    MINIMAL_COMPLETE,
    SolutionSet,
    all_solutions,
    m_solutions,
    minimal_complete_solutions,
)
from .config import DEFAULT_LIMITS
from .errors import InternalError
from .grounder import GroundProgram
from .solver import DefiniteProgram, NormalProgram


def unfold_rule(rule: Rule, solution_sets) -> list:
    """All unfoldings of one ground rule.

    ``solution_sets`` maps each aggregate atom of the rule to a
    SolutionSet; one rule per element of their Cartesian product, with
    the solutions' components merged into pos/neg.
    """
    if isinstance(rule.head, AggregateAtom):
        raise InternalError("cannot unfold a rule with an aggregate head")
    if rule.builtins:
        raise InternalError("cannot unfold a rule with builtins")
    for c in rule.aggs:
        if c not in solution_sets:
            raise InternalError(f"missing solution set for {c}")
    choices = [solution_sets[c].solutions for c in rule.aggs]
    out = []
    for combo in itertools.product(*choices):
        pos = set(rule.pos)
        neg = set(rule.neg)
        for sol in combo:
            pos |= sol.pos
            neg |= sol.neg
        out.append(
            Rule(
                head=rule.head,
                pos=tuple(sorted(pos, key=Atom.sort_key)),
                neg=tuple(sorted(neg, key=Atom.sort_key)),
            )
        )
    return list(dict.fromkeys(out))


def solution_sets_for(ground: GroundProgram, mode: str,
                      limits=DEFAULT_LIMITS) -> dict:
    """SolutionSet per distinct body aggregate atom of the program."""
    out = {}
    for agg in ground.aggregate_table:
        base = ground.base_for(agg)
        if mode == FULL:
            out[agg] = all_solutions(agg, base, limits)
        elif mode == MINIMAL_COMPLETE or mode == "minimal":
            out[agg] = minimal_complete_solutions(agg, base, limits)
        else:
            raise InternalError(f"unknown unfold mode {mode!r}")
    return out


def unfold_program(ground: GroundProgram, mode: str = "minimal",
                   limits=DEFAULT_LIMITS) -> NormalProgram:
    """Normal program whose answer sets are the aggregate program's.

    ``mode`` picks the solution sets: "full" uses every solution, and
    "minimal" a minimal complete set, which preserves the answer sets.
    """
    if ground.has_head_aggregates():
        raise InternalError(
            "program has aggregate heads; apply the head reduct first"
        )
    sols = solution_sets_for(ground, mode, limits)
    rules = []
    for r in ground.rules:
        rules.extend(unfold_rule(r, sols))
    unique = sorted(dict.fromkeys(rules), key=Rule.sort_key)
    return NormalProgram(tuple(unique))


def unfold_program_wrt(ground: GroundProgram, model,
                       limits=DEFAULT_LIMITS) -> DefiniteProgram:
    """Definite program from the solutions true in ``model``.

    Rules blocked by the model (negation refuted, or an aggregate with no
    model-compatible solution) are dropped; the rest are expanded over
    the model-compatible solutions with negation stripped.
    """
    if ground.has_head_aggregates():
        raise InternalError(
            "program has aggregate heads; apply the head reduct first"
        )
    model = frozenset(model)
    msol_cache: dict = {}
    rules = []
    for r in ground.rules:
        if any(b in model for b in r.neg):
            continue
        choice_sets = []
        blocked = False
        for c in r.aggs:
            ms = msol_cache.get(c)
            if ms is None:
                ms = m_solutions(c, ground.base_for(c), model, limits)
                msol_cache[c] = ms
            if not ms.solutions:
                blocked = True
                break
            choice_sets.append(ms.solutions)
        if blocked:
            continue
        for combo in itertools.product(*choice_sets):
            pos = set(r.pos)
            for sol in combo:
                pos |= sol.pos
            rules.append(
                Rule(head=r.head, pos=tuple(sorted(pos, key=Atom.sort_key)))
            )
    unique = sorted(dict.fromkeys(rules), key=Rule.sort_key)
    return DefiniteProgram(tuple(unique))


def head_reduct(ground: GroundProgram, model,
                limits=DEFAULT_LIMITS) -> GroundProgram:
    """Aggregate-free head reduct: an aggregate-headed rule becomes a
    constraint when the model refutes its head, and otherwise one support
    rule per model atom of the head's base."""
    model = frozenset(model)
    rules = []
    for r in ground.rules:
        if not isinstance(r.head, AggregateAtom):
            rules.append(r)
            continue
        base = ground.base_for(r.head)
        ms = m_solutions(r.head, base, model, limits)
        if not ms.solutions:
            rules.append(
                Rule(head=Falsum(), aggs=r.aggs, pos=r.pos, neg=r.neg)
            )
        else:
            for atom in sorted(set(base) & model, key=Atom.sort_key):
                rules.append(
                    Rule(head=atom, aggs=r.aggs, pos=r.pos, neg=r.neg)
                )
    return ground.replace_rules(tuple(dict.fromkeys(rules)))
