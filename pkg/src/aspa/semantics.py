"""Top-level semantics and cross-checking.

Answer sets are computed two ways: statically (unfold, then enumerate the
normal program) and relative to a candidate interpretation (head reduct,
unfold w.r.t. the candidate, compare with the least model).  The second
route also covers aggregate heads.  Reference semantics - satisfied-body
reduct (FLP), stable sets, perfect models of stratified programs, and the
monotone fixpoint - are implemented for cross-checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .ast import (
    Atom,
    AggregateAtom,
    Falsum,
    Program,
    Rule,
    eval_aggregate_in,
    interpretation_key,
    is_model,
    satisfies_body,
)
from .config import DEFAULT_LIMITS
from .errors import (
    InconsistentProgramError,
    InternalError,
    NotMonotoneError,
    NotStratifiedError,
    ResourceCapError,
)
from .grounder import (
    HEAD_RESTRICTED,
    GroundProgram,
    classify,
    ground_program,
    stratification_levels,
)
from .solver import (
    DefiniteProgram,
    enumerate_answer_sets,
    is_answer_set,
    is_minimal_model,
    least_model,
)
from .unfold import head_reduct, unfold_program, unfold_program_wrt


def aspa_answer_sets(program: Program, limit=None, limits=DEFAULT_LIMITS,
                     base_mode=HEAD_RESTRICTED, solution_mode="minimal") -> list:
    """Answer sets via static unfolding (aggregate heads not allowed)."""
    ground = ground_program(program, limits, base_mode)
    normal = unfold_program(ground, solution_mode, limits)
    return enumerate_answer_sets(normal, limit, limits)


def is_aspa_answer_set_ground(ground: GroundProgram, model,
                              limits=DEFAULT_LIMITS) -> bool:
    """Candidate check: head reduct, unfold w.r.t. the candidate, and
    compare the least model (aggregate heads allowed)."""
    model = frozenset(model)
    reduct = head_reduct(ground, model, limits)
    definite = unfold_program_wrt(reduct, model, limits)
    lm = least_model(definite)
    return lm is not None and lm == model


def is_aspa_answer_set(program: Program, model, limits=DEFAULT_LIMITS,
                       base_mode=HEAD_RESTRICTED) -> bool:
    ground = ground_program(program, limits, base_mode)
    return is_aspa_answer_set_ground(ground, model, limits)


def candidate_base(ground: GroundProgram) -> list:
    """Rule-head atoms plus the bases of head aggregates: answer sets are
    supported, so they live inside this set."""
    atoms = set()
    for r in ground.rules:
        if isinstance(r.head, Atom):
            atoms.add(r.head)
        elif isinstance(r.head, AggregateAtom):
            atoms.update(ground.base_for(r.head))
    return sorted(atoms, key=Atom.sort_key)


def enumerate_aspa_general(program: Program, limit=None, limits=DEFAULT_LIMITS,
                           base_mode=HEAD_RESTRICTED) -> list:
    """Generate-and-test enumeration; the only route for aggregate heads."""
    ground = ground_program(program, limits, base_mode)
    cand = candidate_base(ground)
    if len(cand) > limits.max_candidate_atoms:
        raise ResourceCapError(
            "candidate atoms", len(cand), limits.max_candidate_atoms
        )
    found = []
    for size in range(len(cand) + 1):
        for combo in itertools.combinations(cand, size):
            model = frozenset(combo)
            if is_aspa_answer_set_ground(ground, model, limits):
                found.append(model)
    found.sort(key=interpretation_key)
    if limit is not None:
        found = found[:limit]
    return found


# ---------------------------------------------------------------------------
# FLP reduct and stable sets
# ---------------------------------------------------------------------------


def flp_reduct(ground: GroundProgram, interpretation) -> GroundProgram:
    """Keep exactly the rules whose body the interpretation satisfies;
    aggregates are retained."""
    if ground.has_head_aggregates():
        raise InternalError("satisfied-body reduct requires plain heads")
    interpretation = frozenset(interpretation)
    kept = tuple(
        r for r in ground.rules if satisfies_body(interpretation, r)
    )
    return ground.replace_rules(kept)


def is_flp_answer_set(program: Program, interpretation,
                      limits=DEFAULT_LIMITS, base_mode=HEAD_RESTRICTED) -> bool:
    ground = ground_program(program, limits, base_mode)
    return is_flp_answer_set_ground(ground, interpretation, limits)


def is_flp_answer_set_ground(ground: GroundProgram, interpretation,
                             limits=DEFAULT_LIMITS) -> bool:
    interpretation = frozenset(interpretation)
    reduct = flp_reduct(ground, interpretation)
    if not is_model(interpretation, reduct.rules):
        return False
    return is_minimal_model(reduct.rules, interpretation, limits)


def stable_reduct(ground: GroundProgram, model) -> DefiniteProgram:
    """Drop rules with a refuted aggregate or naf literal, strip the rest."""
    if ground.has_head_aggregates():
        raise InternalError("stable sets are defined for plain heads")
    model = frozenset(model)
    out = []
    for r in ground.rules:
        if any(b in model for b in r.neg):
            continue
        if any(not eval_aggregate_in(model, c) for c in r.aggs):
            continue
        out.append(Rule(head=r.head, pos=r.pos))
    return DefiniteProgram(tuple(dict.fromkeys(out)))


def is_stable_set(program: Program, model, limits=DEFAULT_LIMITS,
                  base_mode=HEAD_RESTRICTED) -> bool:
    ground = ground_program(program, limits, base_mode)
    return is_stable_set_ground(ground, model)


def is_stable_set_ground(ground: GroundProgram, model) -> bool:
    model = frozenset(model)
    lm = least_model(stable_reduct(ground, model))
    return lm is not None and lm == model


# ---------------------------------------------------------------------------
# Stratified and monotone evaluation
# ---------------------------------------------------------------------------


def perfect_model(program: Program, limits=DEFAULT_LIMITS,
                  base_mode=HEAD_RESTRICTED):
    """Stratum-by-stratum least fixpoint; negation and aggregates only see
    lower, already fixed strata."""
    if program.has_head_aggregates():
        raise NotStratifiedError("perfect models are defined for plain heads")
    levels = stratification_levels(program)
    if levels is None:
        raise NotStratifiedError("program is not aggregate-stratified")
    ground = ground_program(program, limits, base_mode)
    by_level: dict = {}
    constraints = []
    for r in ground.rules:
        if isinstance(r.head, Falsum):
            constraints.append(r)
        else:
            by_level.setdefault(levels[r.head.pred], []).append(r)
    acc: frozenset = frozenset()
    for level in sorted(by_level):
        rules = by_level[level]
        current = set(acc)
        changed = True
        while changed:
            changed = False
            for r in rules:
                if r.head not in current and satisfies_body(current, r):
                    current.add(r.head)
                    changed = True
        acc = frozenset(current)
    for r in constraints:
        if satisfies_body(acc, r):
            raise InconsistentProgramError(
                f"constraint violated by the perfect model: {r}"
            )
    return acc


def edb_split(program: Program):
    """(edb predicates, their fact atoms): predicates defined by facts only."""
    fact_only: dict = {}
    for r in program.rules:
        if isinstance(r.head, Falsum):
            continue
        if isinstance(r.head, AggregateAtom):
            fact_only[r.head.spec.pattern.pred] = False
            continue
        pred = r.head.pred
        fact_only[pred] = fact_only.get(pred, True) and r.is_fact
    edb = {p for p, ok in fact_only.items() if ok}
    edb |= set(program.predicates()) - set(fact_only)
    facts = frozenset(
        r.head for r in program.rules
        if isinstance(r.head, Atom) and r.is_fact and r.head.pred in edb
    )
    return edb, facts


def monotone_fixpoint(program: Program, limits=DEFAULT_LIMITS,
                      base_mode=HEAD_RESTRICTED):
    """Least fixpoint of the base-extended consequence operator; equals the
    unique answer set of a (verified) monotone program."""
    verdict = classify(program, limits, base_mode).is_monotone
    if verdict is not True:
        raise NotMonotoneError(
            "program is not verifiably monotone"
            + (" (monotonicity check exceeded its cap)" if verdict == "unknown" else "")
        )
    edb, base_facts = edb_split(program)
    ground = ground_program(program, limits, base_mode)
    idb_rules = [
        r for r in ground.rules
        if isinstance(r.head, Atom) and r.head.pred not in edb
    ]
    current = frozenset()
    while True:
        interp = current | base_facts
        step = frozenset(
            r.head for r in idb_rules if satisfies_body(interp, r)
        )
        if step <= current:
            return current | base_facts
        current = current | step


# ---------------------------------------------------------------------------
# Cross-checking
# ---------------------------------------------------------------------------


@dataclass
class SemanticsVerdict:
    interpretation: frozenset
    flags: dict          # aspa_static / aspa_wrt / flp / stable_set (None = n/a)
    model: bool
    minimal: object      # bool | "skipped"
    supported: bool
    notes: list = field(default_factory=list)
    violations: list = field(default_factory=list)


@dataclass
class CrossCheckReport:
    program_class: object
    verdicts: list
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(v.violations for v in self.verdicts)


def _is_supported(ground: GroundProgram, model) -> bool:
    for atom in model:
        supported = False
        for r in ground.rules:
            if isinstance(r.head, Atom) and r.head == atom:
                if satisfies_body(model, r):
                    supported = True
                    break
            elif isinstance(r.head, AggregateAtom):
                if atom in ground.base_for(r.head) and satisfies_body(model, r):
                    supported = True
                    break
        if not supported:
            return False
    return True


def cross_check(program: Program, model=None, limits=DEFAULT_LIMITS,
                base_mode=HEAD_RESTRICTED) -> CrossCheckReport:
    """Check the theorem obligations for the program's answer sets (or one
    supplied interpretation) and report acceptance under each semantics."""
    cls = classify(program, limits, base_mode)
    ground = ground_program(program, limits, base_mode)
    plain = not cls.has_head_aggregates

    if model is not None:
        candidates = [frozenset(model)]
    elif plain:
        candidates = aspa_answer_sets(program, None, limits, base_mode)
    else:
        candidates = enumerate_aspa_general(program, None, limits, base_mode)

    static_normal = None
    if plain:
        static_normal = unfold_program(ground, "minimal", limits)

    verdicts = []
    for m in candidates:
        flags = {
            "aspa_wrt": is_aspa_answer_set_ground(ground, m, limits),
            "aspa_static": (
                is_answer_set(static_normal, m) if plain else None
            ),
            "flp": is_flp_answer_set_ground(ground, m, limits) if plain else None,
            "stable_set": is_stable_set_ground(ground, m) if plain else None,
        }
        modelled = is_model(m, ground.rules)
        try:
            minimal = (
                is_minimal_model(ground.rules, m, limits) if modelled else False
            )
        except ResourceCapError:
            minimal = "skipped"
        supported = _is_supported(ground, m)
        v = SemanticsVerdict(
            interpretation=m, flags=flags, model=modelled,
            minimal=minimal, supported=supported,
        )
        accepted = flags["aspa_wrt"]
        if plain and flags["aspa_static"] != flags["aspa_wrt"]:
            v.violations.append("static and candidate-relative definitions disagree")
        if accepted:
            if not modelled:
                v.violations.append("answer set is not a model")
            if not supported:
                v.violations.append("answer set is not supported")
            if plain and v.minimal is False:
                v.violations.append("answer set is not a minimal model")
            if plain and flags["flp"] is False:
                v.violations.append("answer set rejected by the satisfied-body reduct")
            if plain and flags["stable_set"] is False:
                v.violations.append("answer set is not a stable set")
        if flags["flp"] and not accepted:
            v.notes.append("accepted by the satisfied-body reduct only")
        if flags["stable_set"] and not accepted:
            v.notes.append("stable set but not an answer set")
        verdicts.append(v)

    notes = []
    if cls.is_aggregate_stratified:
        notes.append("aggregate-stratified: unique answer set = perfect model")
    if cls.is_monotone is True:
        notes.append("monotone: unique answer set = least fixpoint")
    return CrossCheckReport(program_class=cls, verdicts=verdicts, notes=notes)
