"""Ground weight-constraint rules and their translation to aggregates.

A body element ``L <= { a=1, not b=2, ... } <= U`` (either bound optional)
is replaced by auxiliary weight-tabulating predicates plus SUM aggregate
atoms over them: each positive literal p_j with weight w_j yields
``aggp_i(j, w_j) :- p_j`` and each naf literal ``not r_j`` with weight v_j
yields ``aggn_i(j, v_j) :- r_j``; the bound check becomes
``L <= S+ + sum(v_j) - S- <= U``.  One-sided constraints compile to a
single aggregate atom per side; the general case introduces guard
variables for the two sums, grounded over a declared integer interval.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    FALSUM,
    GLOBAL,
    LOCAL,
    AggregateAtom,
    Arith,
    Atom,
    Cmp,
    Falsum,
    IntensionalSpec,
    Program,
    Rule,
    Var,
    Const,
    make_program,
)
from .errors import ParseError
from .parser import ParseDiagnostic, _tokenize


@dataclass(frozen=True)
class WeightConstraint:
    lower: object                 # int | None
    upper: object                 # int | None
    pos_lits: tuple               # ((Atom, weight), ...)
    neg_lits: tuple

    def weight_sum_neg(self) -> int:
        return sum(w for _, w in self.neg_lits)

    def weight_sum_pos(self) -> int:
        return sum(w for _, w in self.pos_lits)


@dataclass(frozen=True)
class WeightRule:
    head: object                  # Atom | Falsum
    pos: tuple
    neg: tuple
    constraints: tuple


@dataclass(frozen=True)
class WeightConstraintProgram:
    rules: tuple


class _WParser:
    """Ground smodels-style rules; reuses the main tokenizer."""

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def fail(self, message, tok=None):
        tok = tok or self.tok
        raise ParseError([ParseDiagnostic("error", tok.line, tok.column, message)])

    def expect(self, kind, what=None):
        if self.tok.kind != kind:
            self.fail(f"expected {what or kind}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def parse(self) -> WeightConstraintProgram:
        rules = []
        while self.tok.kind != "eof":
            rules.append(self.rule())
        return WeightConstraintProgram(tuple(rules))

    def rule(self) -> WeightRule:
        head = FALSUM
        if self.tok.kind != ":-":
            head = self.atom()
        pos, neg, constraints = [], [], []
        if self.tok.kind == ":-":
            self.advance()
            while self.tok.kind != ".":
                self.element(pos, neg, constraints)
                if self.tok.kind == ",":
                    self.advance()
                elif self.tok.kind != ".":
                    self.fail("expected ',' or '.'")
        self.expect(".", "'.'")
        return WeightRule(head, tuple(pos), tuple(neg), tuple(constraints))

    def element(self, pos, neg, constraints):
        if self.tok.kind == "not":
            self.advance()
            neg.append(self.atom())
        elif self.tok.kind in ("int", "-", "{"):
            constraints.append(self.weight_constraint())
        elif self.tok.kind == "ident":
            pos.append(self.atom())
        else:
            self.fail(f"unexpected {self.tok.text!r} in rule body")

    def weight_constraint(self) -> WeightConstraint:
        lower = None
        if self.tok.kind in ("int", "-"):
            lower = self.signed_int()
            rel = self.expect("rel", "'<='")
            if rel.text != "<=":
                self.fail("weight constraint bounds use '<='", rel)
        self.expect("{", "'{'")
        pos_lits, neg_lits = [], []
        while self.tok.kind != "}":
            negated = False
            if self.tok.kind == "not":
                self.advance()
                negated = True
            atom = self.atom()
            eq = self.expect("rel", "'='")
            if eq.text != "=":
                self.fail("literal weights are written literal=weight", eq)
            weight = self.signed_int()
            if weight < 0:
                self.fail(f"negative weight {weight} is not supported", eq)
            (neg_lits if negated else pos_lits).append((atom, weight))
            if self.tok.kind == ",":
                self.advance()
            elif self.tok.kind != "}":
                self.fail("expected ',' or '}'")
        self.advance()
        upper = None
        if self.tok.kind == "rel":
            rel = self.advance()
            if rel.text != "<=":
                self.fail("weight constraint bounds use '<='", rel)
            upper = self.signed_int()
        return WeightConstraint(lower, upper, tuple(pos_lits), tuple(neg_lits))

    def signed_int(self) -> int:
        negate = False
        if self.tok.kind == "-":
            self.advance()
            negate = True
        t = self.expect("int", "integer")
        return -int(t.text) if negate else int(t.text)

    def atom(self) -> Atom:
        name = self.expect("ident", "predicate name")
        args = []
        if self.tok.kind == "(":
            self.advance()
            args.append(self.ground_term())
            while self.tok.kind == ",":
                self.advance()
                args.append(self.ground_term())
            self.expect(")", "')'")
        return Atom(name.text, tuple(args))

    def ground_term(self) -> Const:
        if self.tok.kind == "-":
            self.advance()
            return Const(-int(self.expect("int", "integer").text))
        if self.tok.kind == "int":
            return Const(int(self.advance().text))
        if self.tok.kind == "ident":
            return Const(self.advance().text)
        self.fail("weight rules must be ground")


def parse_weight_program(text: str) -> WeightConstraintProgram:
    return _WParser(text).parse()


# ---------------------------------------------------------------------------
# Translation
# ---------------------------------------------------------------------------


def _sum_atom(pred: str, rel: str, guard) -> AggregateAtom:
    w = Var("W", LOCAL)
    j = Var("J", LOCAL)
    spec = IntensionalSpec(
        collected=w, locals=(j,), pattern=Atom(pred, (j, w)), multiset=True
    )
    return AggregateAtom("SUM", spec, rel, guard)


def _fresh_pred(base: str, used: set) -> str:
    name = base
    while name in used:
        name += "_"
    used.add(name)
    return name


def translate_weight_program(wprogram: WeightConstraintProgram) -> Program:
    """Aggregate program with the same answer sets modulo the auxiliary
    weight-tabulating atoms."""
    used = set()
    for r in wprogram.rules:
        if isinstance(r.head, Atom):
            used.add(r.head.pred)
        for a in r.pos:
            used.add(a.pred)
        for a in r.neg:
            used.add(a.pred)
        for c in r.constraints:
            for a, _ in c.pos_lits + c.neg_lits:
                used.add(a.pred)

    rules = []
    domains = []
    counter = 0
    for r in wprogram.rules:
        aggs = []
        builtins = []
        aux_rules = []
        dropped = False
        for c in r.constraints:
            counter += 1
            sumv = c.weight_sum_neg()
            sumw = c.weight_sum_pos()
            if not c.pos_lits and not c.neg_lits:
                holds = (c.lower is None or c.lower <= 0) and (
                    c.upper is None or 0 <= c.upper
                )
                if not holds:
                    dropped = True
                    break
                continue
            pos_pred = _fresh_pred(f"aggp_{counter}", used)
            neg_pred = _fresh_pred(f"aggn_{counter}", used)
            for j, (atom, weight) in enumerate(c.pos_lits, start=1):
                aux_rules.append(
                    Rule(head=Atom(pos_pred, (Const(j), Const(weight))), pos=(atom,))
                )
            for j, (atom, weight) in enumerate(c.neg_lits, start=1):
                aux_rules.append(
                    Rule(head=Atom(neg_pred, (Const(j), Const(weight))), pos=(atom,))
                )
            if not c.neg_lits:
                # S- = 0 and sumv = 0: bounds apply to S+ directly
                if c.lower is not None:
                    aggs.append(_sum_atom(pos_pred, ">=", Const(c.lower)))
                if c.upper is not None:
                    aggs.append(_sum_atom(pos_pred, "<=", Const(c.upper)))
            elif not c.pos_lits:
                # S+ = 0: L <= sumv - S- <= U
                if c.upper is not None:
                    aggs.append(_sum_atom(neg_pred, ">=", Const(sumv - c.upper)))
                if c.lower is not None:
                    aggs.append(_sum_atom(neg_pred, "<=", Const(sumv - c.lower)))
            else:
                sp = Var(f"Sp_{counter}", GLOBAL)
                sm = Var(f"Sm_{counter}", GLOBAL)
                diff = Var(f"Sd_{counter}", GLOBAL)
                aggs.append(_sum_atom(pos_pred, "=", sp))
                aggs.append(_sum_atom(neg_pred, "=", sm))
                builtins.append(Arith(diff, sp, "-", sm))
                if c.lower is not None:
                    builtins.append(Cmp(diff, ">=", Const(c.lower - sumv)))
                if c.upper is not None:
                    builtins.append(Cmp(diff, "<=", Const(c.upper - sumv)))
                domains.append((min(-sumv, 0), max(sumw, 0)))
        if dropped:
            continue
        rules.append(
            Rule(
                head=r.head,
                aggs=tuple(aggs),
                pos=r.pos,
                neg=r.neg,
                builtins=tuple(builtins),
            )
        )
        rules.extend(aux_rules)
    return make_program(rules, domains=sorted(set(domains)))
