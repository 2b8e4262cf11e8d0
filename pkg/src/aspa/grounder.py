"""Grounding, aggregate bases, dependency analysis, program classification.

ground(P) instantiates every rule over all substitutions of its global
variables, evaluating and eliminating arithmetic builtins (an instance is
dropped when a builtin fails or computes a constant outside F_P).

Each ground aggregate atom gets a base: the instantiations of its pattern
over the local variables.  In the default head-restricted mode the base is
intersected with the positively-derivable atoms (facts closed under rule
heads whose positive body is derivable, with aggregates and negation taken
as potentially true); atoms outside that closure are false in every answer
set, so the restriction cannot change them, and it keeps bases typed and
small.  Full-pattern mode keeps every instantiation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ast import (
    GLOBAL,
    AggregateAtom,
    Arith,
    Atom,
    Cmp,
    Const,
    Falsum,
    IntensionalSpec,
    Program,
    Rule,
    Var,
)
from .config import DEFAULT_LIMITS
from .errors import InternalError, ResourceCapError

HEAD_RESTRICTED = "head-restricted"
FULL_PATTERN = "full-pattern"


class GroundProgram:
    """Ground rules plus the atom/aggregate tables and per-atom bases."""

    def __init__(self, rules, constants, domains, base_mode=HEAD_RESTRICTED):
        self.rules = tuple(rules)
        self.constants = frozenset(constants)
        self.domains = tuple(domains)
        self.base_mode = base_mode
        for r in self.rules:
            if not r.ground:
                raise InternalError(f"non-ground rule in ground program: {r}")
        atoms = set()
        aggs = []
        seen = set()
        for r in self.rules:
            if isinstance(r.head, Atom):
                atoms.add(r.head)
            for a in itertools.chain(r.pos, r.neg):
                atoms.add(a)
            heads = [r.head] if isinstance(r.head, AggregateAtom) else []
            for c in itertools.chain(heads, r.aggs):
                if c not in seen:
                    seen.add(c)
                    aggs.append(c)
        self.atom_table = tuple(sorted(atoms, key=Atom.sort_key))
        self.aggregate_table = tuple(sorted(aggs, key=AggregateAtom.sort_key))
        self._derivable = None
        self._bases = {}

    def to_program(self) -> Program:
        return Program(self.rules, self.constants, self.domains)

    # -- derivability closure ------------------------------------------------

    def derivable_atoms(self) -> frozenset:
        """Least set closed under rule heads with derivable positive body;
        negation and aggregate conditions are taken as potentially true,
        and an aggregate head contributes its full pattern base."""
        if self._derivable is not None:
            return self._derivable
        derived = set()
        pending = list(self.rules)
        changed = True
        while changed:
            changed = False
            rest = []
            for r in pending:
                if all(a in derived for a in r.pos):
                    if isinstance(r.head, Atom):
                        if r.head not in derived:
                            derived.add(r.head)
                            changed = True
                    elif isinstance(r.head, AggregateAtom):
                        new = pattern_instances(r.head, self.constants) - derived
                        if new:
                            derived |= new
                            changed = True
                else:
                    rest.append(r)
            pending = rest
        self._derivable = frozenset(derived)
        return self._derivable

    def base_for(self, agg: AggregateAtom, mode=None) -> tuple:
        mode = mode or self.base_mode
        key = (agg, mode)
        cached = self._bases.get(key)
        if cached is None:
            cached = aggregate_base(agg, self, mode)
            self._bases[key] = cached
        return cached

    def has_head_aggregates(self) -> bool:
        return any(isinstance(r.head, AggregateAtom) for r in self.rules)

    def replace_rules(self, rules) -> "GroundProgram":
        """New ground program over the same signature, reusing the closure
        so aggregate bases stay stable across transformations."""
        g = GroundProgram(rules, self.constants, self.domains, self.base_mode)
        g._derivable = self._derivable
        g._bases = self._bases
        return g


def pattern_instances(agg: AggregateAtom, constants) -> set:
    """All instantiations of the pattern's local/collected variables."""
    pattern = agg.spec.pattern
    local_names = sorted({
        a.name for a in pattern.args if isinstance(a, Var)
    })
    consts = sorted(constants)
    out = set()
    for combo in itertools.product(consts, repeat=len(local_names)):
        binding = dict(zip(local_names, combo))
        args = tuple(
            a if isinstance(a, Const) else binding[a.name] for a in pattern.args
        )
        out.add(Atom(pattern.pred, args))
    return out


def aggregate_base(agg: AggregateAtom, ground: GroundProgram, mode=None) -> tuple:
    """The atom base H of a ground aggregate atom, sorted."""
    if not agg.ground:
        raise InternalError(f"base requested for non-ground aggregate {agg}")
    mode = mode or ground.base_mode
    atoms = pattern_instances(agg, ground.constants)
    if mode == HEAD_RESTRICTED:
        atoms &= ground.derivable_atoms()
    elif mode != FULL_PATTERN:
        raise InternalError(f"unknown base mode {mode!r}")
    return tuple(sorted(atoms, key=Atom.sort_key))


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------


def _term_value(t, binding):
    if isinstance(t, Const):
        return t
    return binding[t.name]


def _plan_arithmetic(rule: Rule):
    """Split the global variables into enumerated and derived ones and
    order the derivable arithmetic builtins; the rest become checks."""
    globs = rule.global_vars()
    ariths = [b for b in rule.builtins if isinstance(b, Arith)]
    target_candidates = set()
    for b in ariths:
        ins = {t.name for t in (b.left, b.right) if isinstance(t, Var)}
        if isinstance(b.target, Var) and b.target.name not in ins:
            target_candidates.add(b.target.name)
    derived = {}
    plan = []
    changed = True
    while changed:
        changed = False
        for b in ariths:
            if not isinstance(b.target, Var) or b.target.name in derived:
                continue
            ins = {t.name for t in (b.left, b.right) if isinstance(t, Var)}
            if b.target.name in ins:
                continue
            if all(i in derived or i not in target_candidates for i in ins):
                derived[b.target.name] = b
                plan.append(b)
                changed = True
    checks = [b for b in rule.builtins if not (isinstance(b, Arith) and b in plan)]
    enum_vars = sorted(globs - set(derived))
    return enum_vars, plan, checks


def _eval_plan(plan, checks, binding, constants) -> bool:
    for b in plan:
        left = _term_value(b.left, binding)
        right = _term_value(b.right, binding)
        if not (left.is_int and right.is_int):
            return False
        value = left.value + right.value if b.op == "+" else left.value - right.value
        result = Const(value)
        if result not in constants:
            return False
        binding[b.target.name] = result
    for b in checks:
        if isinstance(b, Arith):
            left = _term_value(b.left, binding)
            right = _term_value(b.right, binding)
            target = _term_value(b.target, binding)
            if not (left.is_int and right.is_int and target.is_int):
                return False
            value = left.value + right.value if b.op == "+" else left.value - right.value
            if target.value != value:
                return False
        else:
            left = _term_value(b.left, binding)
            right = _term_value(b.right, binding)
            lk, rk = left.sort_key(), right.sort_key()
            ok = {
                "=": lk == rk,
                "!=": lk != rk,
                "<": lk < rk,
                "<=": lk <= rk,
                ">": lk > rk,
                ">=": lk >= rk,
            }[b.rel]
            if not ok:
                return False
    return True


def _substitute_atom(atom: Atom, binding) -> Atom:
    return Atom(
        atom.pred,
        tuple(a if isinstance(a, Const) else binding[a.name] for a in atom.args),
    )


def _substitute_agg(agg: AggregateAtom, binding) -> AggregateAtom:
    locs = agg.spec.local_names()
    args = tuple(
        a if isinstance(a, Const) or a.name in locs else binding[a.name]
        for a in agg.spec.pattern.args
    )
    guard = agg.guard if isinstance(agg.guard, Const) else binding[agg.guard.name]
    spec = IntensionalSpec(
        agg.spec.collected, agg.spec.locals, Atom(agg.spec.pattern.pred, args),
        agg.spec.multiset,
    )
    return AggregateAtom(agg.func, spec, agg.rel, guard)


def _ground_rule(rule: Rule, constants, limits, counter) -> list:
    enum_vars, plan, checks = _plan_arithmetic(rule)
    consts = sorted(constants)
    out = []
    for combo in itertools.product(consts, repeat=len(enum_vars)):
        counter[1] += 1
        if counter[1] > limits.max_ground_rules * 64:
            raise ResourceCapError(
                "grounding substitutions", counter[1], limits.max_ground_rules * 64
            )
        binding = dict(zip(enum_vars, combo))
        if not _eval_plan(plan, checks, binding, constants):
            continue
        if isinstance(rule.head, Atom):
            head = _substitute_atom(rule.head, binding)
        elif isinstance(rule.head, AggregateAtom):
            head = _substitute_agg(rule.head, binding)
        else:
            head = rule.head
        ground = Rule(
            head=head,
            aggs=tuple(_substitute_agg(c, binding) for c in rule.aggs),
            pos=tuple(_substitute_atom(a, binding) for a in rule.pos),
            neg=tuple(_substitute_atom(a, binding) for a in rule.neg),
        )
        counter[0] += 1
        if counter[0] > limits.max_ground_rules:
            raise ResourceCapError(
                "ground rules", counter[0], limits.max_ground_rules,
                hint="raise --max-ground or shrink the instance",
            )
        out.append(ground)
    return out


def ground_program(program: Program, limits=DEFAULT_LIMITS,
                   base_mode=HEAD_RESTRICTED) -> GroundProgram:
    """All ground instances of all rules, in deterministic order."""
    counter = [0, 0]  # emitted rules, attempted substitutions
    rules = []
    for r in program.rules:
        rules.extend(_ground_rule(r, program.constants, limits, counter))
    unique = tuple(dict.fromkeys(rules))
    return GroundProgram(unique, program.constants, program.domains, base_mode)


# ---------------------------------------------------------------------------
# Dependency graph and classification
# ---------------------------------------------------------------------------

POS_EDGE = "positive"
NEG_EDGE = "negative"
AGG_EDGE = "aggregate"


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset
    edges: frozenset  # (head_pred, body_pred, kind)

    def successors(self, pred):
        return [(dst, kind) for src, dst, kind in self.edges if src == pred]


def dependency_graph(program: Program) -> DependencyGraph:
    """Predicate-level dependencies; an aggregate-headed rule counts as
    defining its pattern predicate."""
    nodes = set(program.predicates())
    edges = set()
    for r in program.rules:
        if isinstance(r.head, Atom):
            src = r.head.pred
        elif isinstance(r.head, AggregateAtom):
            src = r.head.spec.pattern.pred
        else:
            continue
        for a in r.pos:
            edges.add((src, a.pred, POS_EDGE))
        for a in r.neg:
            edges.add((src, a.pred, NEG_EDGE))
        for c in r.aggs:
            edges.add((src, c.spec.pattern.pred, AGG_EDGE))
    return DependencyGraph(frozenset(nodes), frozenset(edges))


def strongly_connected_components(nodes, successors):
    """Iterative Tarjan; components are emitted in reverse topological
    order (dependencies after dependents)."""
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    components = []
    counter = itertools.count()

    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, iter(sorted(successors(root))))]
        index[root] = lowlink[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = lowlink[succ] = next(counter)
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(successors(succ)))))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == node:
                        break
                components.append(frozenset(comp))
    return components


@dataclass(frozen=True)
class ProgramClass:
    has_head_aggregates: bool
    is_aggregate_stratified: bool
    is_monotone: object  # True | False | "unknown"
    is_normal: bool


def stratification_levels(program: Program):
    """pred -> level when a level assignment exists, else None."""
    graph = dependency_graph(program)
    succ_map = {}
    for src, dst, kind in graph.edges:
        succ_map.setdefault(src, set()).add(dst)
    comps = strongly_connected_components(
        graph.nodes, lambda n: succ_map.get(n, ())
    )
    comp_of = {}
    for i, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = i
    for src, dst, kind in graph.edges:
        if kind in (NEG_EDGE, AGG_EDGE) and comp_of[src] == comp_of[dst]:
            return None
    # components arrive dependencies-first; strict edges bump the level
    levels = {}
    comp_level = [0] * len(comps)
    for i, comp in enumerate(comps):
        lvl = 0
        for src, dst, kind in graph.edges:
            if comp_of[src] == i and comp_of[dst] != i:
                need = comp_level[comp_of[dst]] + (
                    1 if kind in (NEG_EDGE, AGG_EDGE) else 0
                )
                lvl = max(lvl, need)
        comp_level[i] = lvl
        for n in comp:
            levels[n] = lvl
    return levels


def classify(program: Program, limits=DEFAULT_LIMITS,
             base_mode=HEAD_RESTRICTED) -> ProgramClass:
    from .aggregates import is_monotone_atom

    stratified = stratification_levels(program) is not None
    has_heads = program.has_head_aggregates()
    is_normal = not program.has_aggregates()

    monotone = True
    if has_heads or any(r.neg or r.is_constraint for r in program.rules):
        monotone = False
    else:
        ground = ground_program(program, limits, base_mode)
        for agg in ground.aggregate_table:
            verdict = is_monotone_atom(agg, ground.base_for(agg), limits)
            if verdict == "unknown":
                monotone = "unknown"
            elif not verdict:
                monotone = False
                break
    return ProgramClass(
        has_head_aggregates=has_heads,
        is_aggregate_stratified=stratified,
        is_monotone=monotone,
        is_normal=is_normal,
    )
