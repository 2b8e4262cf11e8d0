"""Concrete ASCII syntax: parsing and round-trip stable pretty printing.

Grammar sketch (full EBNF in the README):

    program    : (directive | rule)*
    directive  : "#const_domain" INT ".." INT "."
    rule       : [head] [":-" [body]] "."
    head       : atom | aggregate
    body       : element ("," element)*
    element    : "not" atom | aggregate | builtin | atom
    aggregate  : FUNC braces REL term  |  term REL FUNC braces
    braces     : "{" VAR ":" atom "}"  |  "{{" VAR ":" atom "}}"
    builtin    : term "=" term ("+"|"-") term  |  term REL term
    atom       : IDENT ["(" term ("," term)* ")"]
    term       : ["-"] INT | IDENT | VAR

Variable kinds are inferred: the collected variable is always local; a
pattern variable occurring nowhere else in the rule is local (multisets
only); everything else is global.  Guard-side aggregates are flipped to
the canonical FUNC-first form with the relation mirrored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    AGG_FUNCS,
    FALSUM,
    GLOBAL,
    LOCAL,
    AggregateAtom,
    Arith,
    Atom,
    Cmp,
    Const,
    IntensionalSpec,
    Program,
    Rule,
    Var,
    make_program,
)
from .errors import ParseError

RELS = ("=", "!=", "<", "<=", ">", ">=")
_MIRROR = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<string>"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    line: int      # 1-based
    column: int    # 1-based
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>%[^\n]*)
    | (?P<directive>\#const_domain\b)
    | (?P<lbrace2>\{\{)
    | (?P<rbrace2>\}\})
    | (?P<arrow>:-)
    | (?P<dots>\.\.)
    | (?P<rel>!=|<=|>=|=|<|>)
    | (?P<int>\d+)
    | (?P<name>[a-z][A-Za-z0-9_]*)
    | (?P<upper>[A-Z][A-Za-z0-9_]*)
    | (?P<punct>[(){},.:+\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                [ParseDiagnostic("error", line, col, f"unexpected character {text[pos]!r}")]
            )
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            if kind == "name":
                kind = "not" if lexeme == "not" else "ident"
            elif kind == "upper":
                kind = "func" if lexeme in AGG_FUNCS else "var"
            elif kind in ("punct", "arrow", "dots"):
                kind = lexeme
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# Raw (pre kind-inference) pieces collected per rule -------------------------


@dataclass
class _RawAgg:
    func: str
    multiset: bool
    collected: str
    pattern_pred: str
    pattern_args: list  # Const | raw var name (str)
    rel: str
    guard: object       # Const | raw var name (str)
    line: int
    column: int


class _Parser:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
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

    # -- grammar ------------------------------------------------------------

    def parse(self):
        rules = []
        domains = []
        while self.tok.kind != "eof":
            if self.tok.kind == "directive":
                domains.append(self.directive())
            else:
                rules.append(self.rule())
        program = make_program(rules, domains=sorted(domains))
        if not program.constants:
            self.fail("empty constant universe: no constants and no #const_domain")
        return program

    def directive(self):
        start = self.expect("directive")
        lo = self.signed_int()
        self.expect("..", "'..'")
        hi = self.signed_int()
        self.expect(".", "'.'")
        if lo > hi:
            self.fail(f"empty interval {lo}..{hi}", start)
        return (lo, hi)

    def signed_int(self) -> int:
        neg = False
        if self.tok.kind == "-":
            self.advance()
            neg = True
        t = self.expect("int", "integer")
        return -int(t.text) if neg else int(t.text)

    def rule(self):
        start = self.tok
        head = FALSUM
        if self.tok.kind != ":-":
            head = self.head()
        aggs, pos, neg, builtins = [], [], [], []
        if self.tok.kind == ":-":
            self.advance()
            while self.tok.kind != ".":
                self.body_element(aggs, pos, neg, builtins)
                if self.tok.kind == ",":
                    self.advance()
                    if self.tok.kind == ".":
                        self.fail("trailing comma in body")
                elif self.tok.kind != ".":
                    self.fail("expected ',' or '.'")
        self.expect(".", "'.'")
        return _finish_rule(self, start, head, aggs, pos, neg, builtins)

    def head(self):
        if self.tok.kind == "func":
            return self.aggregate()
        if self.tok.kind in ("var", "int", "-"):
            # guard-first head aggregate: term REL FUNC{...}
            term = self.term()
            rel = self.expect("rel", "relation").text
            if self.tok.kind != "func":
                self.fail("head must be an atom or an aggregate atom")
            return self.aggregate_tail(term, rel)
        atom = self.atom()
        if self.tok.kind == "rel":
            rel = self.advance().text
            if self.tok.kind == "func" and not atom.args:
                return self.aggregate_tail(Const(atom.pred), rel)
            self.fail("head must be an atom or an aggregate atom")
        return atom

    def body_element(self, aggs, pos, neg, builtins):
        if self.tok.kind == "not":
            self.advance()
            neg.append(self.atom())
            return
        if self.tok.kind == "func":
            aggs.append(self.aggregate())
            return
        if self.tok.kind in ("var", "int", "-"):
            self.term_lead_element(self.term(), aggs, builtins)
            return
        if self.tok.kind == "ident":
            atom = self.atom()
            if self.tok.kind == "rel":
                if atom.args:
                    self.fail("comparison operands must be plain terms")
                self.term_lead_element(Const(atom.pred), aggs, builtins)
            else:
                pos.append(atom)
            return
        self.fail(f"unexpected {self.tok.text!r} in rule body")

    def term_lead_element(self, left, aggs, builtins):
        """Element starting with a term: builtin or guard-first aggregate."""
        rel = self.expect("rel", "relation").text
        if self.tok.kind == "func":
            aggs.append(self.aggregate_tail(left, rel))
            return
        right = self.term()
        if self.tok.kind in ("+", "-"):
            op = self.advance().text
            if rel != "=":
                self.fail("arithmetic requires the form X = Y + Z or X = Y - Z")
            third = self.term()
            builtins.append(Arith(left, right, op, third))
        else:
            builtins.append(Cmp(left, rel, right))

    def aggregate(self) -> _RawAgg:
        func = self.expect("func").text
        return self._braces(func, None, None)

    def aggregate_tail(self, guard_term, rel) -> _RawAgg:
        """Guard-first form, canonicalized by mirroring the relation."""
        func = self.expect("func").text
        return self._braces(func, guard_term, _MIRROR[rel])

    def _braces(self, func, guard, rel) -> _RawAgg:
        start = self.tok
        multiset = self.tok.kind == "lbrace2"
        if not multiset and self.tok.kind != "{":
            self.fail("expected '{' or '{{' after aggregate function")
        self.advance()
        coll = self.expect("var", "collected variable").text
        self.expect(":", "':'")
        pattern = self.atom()
        if multiset:
            self.expect("rbrace2", "'}}'")
        else:
            self.expect("}", "'}'")
        if rel is None:
            rel = self.expect("rel", "relation").text
            guard = self.term()
        args = [a if isinstance(a, Const) else a.name for a in pattern.args]
        guard = guard if isinstance(guard, Const) else guard.name
        return _RawAgg(
            func, multiset, coll, pattern.pred, args, rel, guard, start.line, start.column
        )

    def atom(self) -> Atom:
        name = self.expect("ident", "predicate name")
        args = []
        if self.tok.kind == "(":
            self.advance()
            args.append(self.term())
            while self.tok.kind == ",":
                self.advance()
                args.append(self.term())
            self.expect(")", "')'")
        return Atom(name.text, tuple(args))

    def term(self):
        t = self.tok
        if t.kind == "-":
            self.advance()
            n = self.expect("int", "integer")
            return Const(-int(n.text))
        if t.kind == "int":
            self.advance()
            return Const(int(t.text))
        if t.kind == "ident":
            self.advance()
            return Const(t.text)
        if t.kind == "var":
            self.advance()
            return Var(t.text, GLOBAL)  # kind corrected during inference
        self.fail(f"expected a term, found {t.text or 'end of input'!r}")


# ---------------------------------------------------------------------------
# Kind inference, renaming apart, safety
# ---------------------------------------------------------------------------


def _finish_rule(p: _Parser, start, head, raw_aggs, pos, neg, builtins) -> Rule:
    head_agg = head if isinstance(head, _RawAgg) else None
    body_aggs = list(raw_aggs)
    all_aggs = ([head_agg] if head_agg else []) + body_aggs

    def fail(message, tok=None):
        p.fail(message, tok or start)

    # variable names occurring outside any aggregate pattern
    outside = set()

    def note_term(t):
        if isinstance(t, Var):
            outside.add(t.name)
        elif isinstance(t, str):
            outside.add(t)

    if isinstance(head, Atom):
        for t in head.args:
            note_term(t)
    for a in list(pos) + list(neg):
        for t in a.args:
            note_term(t)
    for b in builtins:
        if isinstance(b, Arith):
            for t in (b.target, b.left, b.right):
                note_term(t)
        else:
            note_term(b.left)
            note_term(b.right)
    for agg in all_aggs:
        if isinstance(agg.guard, str):
            outside.add(agg.guard)

    # collected variables may not occur anywhere else in the rule
    for agg in all_aggs:
        if agg.collected in outside:
            fail(
                f"collected variable {agg.collected} also occurs outside its aggregate"
            )
        if agg.collected not in [a for a in agg.pattern_args if isinstance(a, str)]:
            fail(f"collected variable {agg.collected} does not occur in the pattern")

    # rename collected variables apart when aggregates reuse a name
    def pattern_vars(agg):
        return {a for a in agg.pattern_args if isinstance(a, str)}

    taken = set(outside)
    for agg in all_aggs:
        taken |= pattern_vars(agg)
    for idx, agg in enumerate(all_aggs):
        others = set()
        for j, other in enumerate(all_aggs):
            if j != idx:
                others |= pattern_vars(other)
        if agg.collected in others:
            k = 2
            while f"{agg.collected}_{k}" in taken:
                k += 1
            fresh = f"{agg.collected}_{k}"
            taken.add(fresh)
            agg.pattern_args = [
                fresh if a == agg.collected else a for a in agg.pattern_args
            ]
            agg.collected = fresh

    # decide local variable sets: a pattern variable occurring nowhere else
    # in the rule is local; one shared with another pattern stays global
    locals_per_agg = []
    for idx, agg in enumerate(all_aggs):
        elsewhere = set(outside)
        for j, other in enumerate(all_aggs):
            if j != idx:
                elsewhere |= pattern_vars(other)
        cands = {
            v for v in pattern_vars(agg) if v != agg.collected and v not in elsewhere
        }
        if cands and not agg.multiset:
            bad = ", ".join(sorted(cands))
            fail(
                f"variable(s) {bad} occur only inside a set comprehension; "
                "bind them elsewhere or use a multiset"
            )
        locals_per_agg.append(cands if agg.multiset else set())

    def build_agg(idx) -> AggregateAtom:
        agg = all_aggs[idx]
        local_names = {agg.collected} | locals_per_agg[idx]
        args = []
        for a in agg.pattern_args:
            if isinstance(a, Const):
                args.append(a)
            elif a in local_names:
                args.append(Var(a, LOCAL))
            else:
                args.append(Var(a, GLOBAL))
        guard = agg.guard if isinstance(agg.guard, Const) else Var(agg.guard, GLOBAL)
        spec = IntensionalSpec(
            collected=Var(agg.collected, LOCAL),
            locals=tuple(sorted((Var(v, LOCAL) for v in locals_per_agg[idx]),
                                key=lambda v: v.name)),
            pattern=Atom(agg.pattern_pred, tuple(args)),
            multiset=agg.multiset,
        )
        return AggregateAtom(agg.func, spec, agg.rel, guard)

    built = [build_agg(i) for i in range(len(all_aggs))]
    if head_agg is not None:
        head = built[0]
        body_built = built[1:]
    else:
        body_built = built

    rule = Rule(
        head=head,
        aggs=tuple(body_built),
        pos=tuple(pos),
        neg=tuple(neg),
        builtins=tuple(builtins),
    )
    _check_safety(p, start, rule)
    return rule


def _check_safety(p: _Parser, start, rule: Rule):
    """Every global variable must be bound: in a positive body atom, in a
    non-collected aggregate pattern position, as an aggregate guard, or
    computed by arithmetic from bound variables."""
    global_vars = rule.global_vars()
    safe = set()
    for a in rule.pos:
        safe |= {t.name for t in a.args if isinstance(t, Var)}
    aggs = list(rule.aggs)
    if isinstance(rule.head, AggregateAtom):
        aggs.append(rule.head)
    for c in aggs:
        for t in c.spec.pattern.args:
            if isinstance(t, Var) and t.kind == GLOBAL:
                safe.add(t.name)
        if isinstance(c.guard, Var):
            safe.add(c.guard.name)
    changed = True
    while changed:
        changed = False
        for b in rule.builtins:
            if isinstance(b, Arith) and isinstance(b.target, Var):
                ins = [t for t in (b.left, b.right) if isinstance(t, Var)]
                if b.target.name not in safe and all(t.name in safe for t in ins):
                    safe.add(b.target.name)
                    changed = True
    unsafe = sorted(global_vars - safe)
    if unsafe:
        p.fail(f"unsafe rule: variable(s) {', '.join(unsafe)} are not bound", start)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def parse_program(src) -> Program:
    """Parse a source program; raises ParseError carrying diagnostics."""
    if isinstance(src, SourceProgram):
        text, origin = src.text, src.origin
    else:
        text, origin = src, "<string>"
    return _Parser(text, origin).parse()


def format_program(program: Program) -> str:
    """Deterministic surface syntax; parse(format(parse(s))) == parse(s)."""
    lines = [f"#const_domain {lo}..{hi}." for lo, hi in sorted(program.domains)]
    lines.extend(str(r) for r in program.rules)
    return "\n".join(lines) + ("\n" if lines else "")
