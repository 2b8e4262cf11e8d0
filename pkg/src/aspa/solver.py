"""Answer-set machinery for aggregate-free ground programs.

The enumerator favours a correctness argument over search tricks: sound
three-valued propagation narrows the space, branching picks the least
undecided atom (true branch first), and every leaf passes through the
answer-set check, so the propagation only has to be sound, not complete.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ast import Atom, Falsum, Rule, interpretation_key, is_model
from .config import DEFAULT_LIMITS
from .errors import InternalError, ResourceCapError


@dataclass(frozen=True)
class NormalProgram:
    """Ground rules with atom or falsum heads and no aggregates."""

    rules: tuple

    def __post_init__(self):
        for r in self.rules:
            if r.aggs or r.builtins:
                raise InternalError(f"normal program rule has aggregates: {r}")
            if not (isinstance(r.head, (Atom, Falsum))):
                raise InternalError(f"normal program rule has bad head: {r}")
            if not r.ground:
                raise InternalError(f"normal program rule not ground: {r}")

    def atoms(self) -> tuple:
        out = set()
        for r in self.rules:
            if isinstance(r.head, Atom):
                out.add(r.head)
            out.update(r.pos)
            out.update(r.neg)
        return tuple(sorted(out, key=Atom.sort_key))


@dataclass(frozen=True)
class DefiniteProgram(NormalProgram):
    """Normal program without negation (falsum heads permitted)."""

    def __post_init__(self):
        super().__post_init__()
        for r in self.rules:
            if r.neg:
                raise InternalError(f"definite program rule has negation: {r}")


def tp_step(definite: DefiniteProgram, interpretation):
    """One application of the immediate consequence operator.

    Returns (derived heads, violated) where ``violated`` reports a falsum
    rule whose body is satisfied.
    """
    derived = set()
    violated = False
    for r in definite.rules:
        if all(a in interpretation for a in r.pos):
            if isinstance(r.head, Falsum):
                violated = True
            else:
                derived.add(r.head)
    return frozenset(derived), violated


def least_model(definite: DefiniteProgram):
    """Least fixpoint of tp_step, or None when a constraint fires."""
    current = frozenset()
    while True:
        step, violated = tp_step(definite, current)
        if violated:
            return None
        if step <= current:
            return current
        current = current | step


def gl_reduct(normal: NormalProgram, model) -> DefiniteProgram:
    """Drop rules blocked by the model, strip negation from the rest."""
    out = []
    for r in normal.rules:
        if any(b in model for b in r.neg):
            continue
        out.append(Rule(head=r.head, pos=r.pos))
    return DefiniteProgram(tuple(dict.fromkeys(out)))


def is_answer_set(normal: NormalProgram, model) -> bool:
    lm = least_model(gl_reduct(normal, model))
    return lm is not None and lm == frozenset(model)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

_TRUE, _FALSE = True, False


class _Search:
    def __init__(self, normal: NormalProgram, limits):
        self.normal = normal
        self.limits = limits
        self.atoms = normal.atoms()
        self.rules = normal.rules
        self.by_head = {}
        for r in self.rules:
            if isinstance(r.head, Atom):
                self.by_head.setdefault(r.head, []).append(r)
        self.nodes = 0
        self.found = []

    # body status: True (satisfied), False (refuted), None (open)
    def _body_status(self, r, state):
        sat = True
        for a in r.pos:
            v = state.get(a, None)
            if v is _FALSE:
                return False
            if v is not _TRUE:
                sat = False
        for b in r.neg:
            v = state.get(b, None)
            if v is _TRUE:
                return False
            if v is not _FALSE:
                sat = False
        return True if sat else None

    def _open_literals(self, r, state):
        lits = []
        for a in r.pos:
            if state.get(a, None) is None:
                lits.append((a, _TRUE))
        for b in r.neg:
            if state.get(b, None) is None:
                lits.append((b, _FALSE))
        return lits

    def _assign(self, state, atom, value):
        old = state.get(atom, None)
        if old is None:
            state[atom] = value
            return True
        return old == value  # False signals a conflict

    def _propagate(self, state):
        """Sound narrowing; returns False on conflict."""
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                status = self._body_status(r, state)
                if isinstance(r.head, Falsum):
                    if status is True:
                        return False
                    if status is None:
                        lits = self._open_literals(r, state)
                        if len(lits) == 1:
                            atom, needed = lits[0]
                            if not self._assign(state, atom, not needed):
                                return False
                            changed = True
                    continue
                head_val = state.get(r.head, None)
                if status is True:
                    if head_val is _FALSE:
                        return False
                    if head_val is None:
                        state[r.head] = _TRUE
                        changed = True
                elif status is None and head_val is _FALSE:
                    lits = self._open_literals(r, state)
                    if len(lits) == 1:
                        atom, needed = lits[0]
                        if not self._assign(state, atom, not needed):
                            return False
                        changed = True
            # unsupported atoms are false; true atoms with a single
            # remaining support force that rule's body
            for atom in self.atoms:
                val = state.get(atom, None)
                if val is _FALSE:
                    continue
                candidates = [
                    r for r in self.by_head.get(atom, [])
                    if self._body_status(r, state) is not False
                ]
                if not candidates:
                    if val is _TRUE:
                        return False
                    state[atom] = _FALSE
                    changed = True
                elif val is _TRUE and len(candidates) == 1:
                    for lit, needed in self._open_literals(candidates[0], state):
                        if not self._assign(state, lit, needed):
                            return False
                        changed = True
        return True

    def run(self):
        stack = [{}]
        while stack:
            state = stack.pop()
            self.nodes += 1
            if self.nodes > self.limits.max_search_nodes:
                raise ResourceCapError(
                    "search nodes", self.nodes, self.limits.max_search_nodes
                )
            if not self._propagate(state):
                continue
            undecided = [a for a in self.atoms if state.get(a, None) is None]
            if not undecided:
                model = frozenset(a for a in self.atoms if state[a] is _TRUE)
                if is_answer_set(self.normal, model):
                    self.found.append(model)
                continue
            pick = undecided[0]
            false_child = dict(state)
            false_child[pick] = _FALSE
            state[pick] = _TRUE
            stack.append(false_child)
            stack.append(state)  # true branch explored first


def enumerate_answer_sets(normal: NormalProgram, limit=None,
                          limits=DEFAULT_LIMITS) -> list:
    """All answer sets, ordered by size then atom order; ``limit`` keeps
    the first ones of that order."""
    search = _Search(normal, limits)
    search.run()
    result = sorted(set(search.found), key=interpretation_key)
    if limit is not None:
        result = result[:limit]
    return result


# ---------------------------------------------------------------------------
# Minimal models of ground programs (aggregates allowed)
# ---------------------------------------------------------------------------


def is_minimal_model(rules, model, limits=DEFAULT_LIMITS) -> bool:
    """No proper subset of ``model`` is a model; exhaustive, smallest first."""
    model = sorted(model, key=Atom.sort_key)
    if len(model) > limits.max_subset_atoms:
        raise ResourceCapError(
            "minimality subset atoms", len(model), limits.max_subset_atoms
        )
    for size in range(len(model)):
        for subset in itertools.combinations(model, size):
            if is_model(frozenset(subset), rules):
                return False
    return True
