"""Core data model: terms, atoms, aggregate atoms, rules, programs.

All values are immutable after construction and hashable, so they can be
used freely as set/dict members and shared between threads.  Constants
carry a total order (integers by value first, then named symbols
lexicographically); every sorted output in the package derives from it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .errors import EvalTypeError, InternalError

AGG_FUNCS = ("COUNT", "SUM", "MIN", "MAX", "AVG")
RELATIONS = ("=", "!=", "<", "<=", ">", ">=")

GLOBAL = "global"
LOCAL = "local"


@dataclass(frozen=True)
class Const:
    """Integer constant or named symbol (lowercase identifier)."""

    value: Union[int, str]

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, (int, str)):
            raise InternalError(f"bad constant payload: {self.value!r}")
        if isinstance(self.value, str) and not self.value:
            raise InternalError("named constant must be a nonempty identifier")

    @property
    def is_int(self) -> bool:
        return isinstance(self.value, int)

    def sort_key(self):
        # all integers precede all named symbols
        if isinstance(self.value, int):
            return (0, self.value, "")
        return (1, 0, self.value)

    def __lt__(self, other: "Const") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var:
    """Variable; ``kind`` is fixed at parse time and never changes."""

    name: str
    kind: str = GLOBAL

    def __post_init__(self):
        if self.kind not in (GLOBAL, LOCAL):
            raise InternalError(f"bad variable kind {self.kind!r}")

    def __str__(self):
        return self.name


Term = Union[Const, Var]


def is_ground_term(t: Term) -> bool:
    return isinstance(t, Const)


@dataclass(frozen=True)
class Atom:
    """Ordinary predicate atom p(t1,...,tn); arity may be zero."""

    pred: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)

    def sort_key(self):
        if not self.ground:
            raise InternalError(f"sort key requested for non-ground atom {self}")
        return (self.pred, len(self.args)) + tuple(a.sort_key() for a in self.args)

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Naf:
    """Negation-as-failure literal ``not atom``."""

    atom: Atom

    def __str__(self):
        return f"not {self.atom}"


@dataclass(frozen=True)
class IntensionalSpec:
    """Set or multiset comprehension: collected variable, locals, pattern."""

    collected: Var
    locals: tuple  # tuple[Var]; empty for sets
    pattern: Atom
    multiset: bool = False

    def __post_init__(self):
        pvars = {a.name for a in self.pattern.args if isinstance(a, Var)}
        if self.collected.kind != LOCAL:
            raise InternalError("collected variable must be local-kind")
        if self.collected.name not in pvars:
            raise InternalError("collected variable must occur in the pattern")
        for lv in self.locals:
            if lv.kind != LOCAL or lv.name not in pvars:
                raise InternalError(f"bad local variable {lv}")
            if lv.name == self.collected.name:
                raise InternalError("collected variable listed among locals")
        if not self.multiset and self.locals:
            raise InternalError("set comprehension cannot have local variables")

    def local_names(self) -> frozenset:
        return frozenset({self.collected.name} | {v.name for v in self.locals})

    def __str__(self):
        lb, rb = ("{{", "}}") if self.multiset else ("{", "}")
        return f"{lb} {self.collected} : {self.pattern} {rb}"


@dataclass(frozen=True)
class AggregateAtom:
    """FUNC{ X : p(...) } REL guard (set) or FUNC{{ ... }} REL guard."""

    func: str
    spec: IntensionalSpec
    rel: str
    guard: Term

    def __post_init__(self):
        if self.func not in AGG_FUNCS:
            raise InternalError(f"unknown aggregate function {self.func!r}")
        if self.rel not in RELATIONS:
            raise InternalError(f"unknown relation {self.rel!r}")
        if isinstance(self.guard, Var) and self.guard.kind != GLOBAL:
            raise InternalError("aggregate guard variable must be global-kind")

    @property
    def ground(self) -> bool:
        """Ground up to locals: guard and non-local pattern args are constants."""
        if not isinstance(self.guard, Const):
            return False
        locs = self.spec.local_names()
        return all(
            isinstance(a, Const) or a.name in locs for a in self.spec.pattern.args
        )

    def sort_key(self):
        if not self.ground:
            raise InternalError(f"sort key requested for non-ground aggregate {self}")
        patkey = (self.spec.pattern.pred, len(self.spec.pattern.args)) + tuple(
            a.sort_key() if isinstance(a, Const) else (2, 0, a.name)
            for a in self.spec.pattern.args
        )
        return (self.func, self.rel, self.guard.sort_key(), self.spec.multiset) + patkey

    def __str__(self):
        return f"{self.func}{self.spec} {self.rel} {self.guard}"


class Falsum:
    """Distinguished constraint head; a singleton, printed as nothing."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Falsum()"


FALSUM = Falsum()

Head = Union[Atom, AggregateAtom, Falsum]


@dataclass(frozen=True)
class Arith:
    """Builtin ``target = left op right`` with op in {+, -}."""

    target: Term
    left: Term
    op: str
    right: Term

    def __str__(self):
        return f"{self.target} = {self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Cmp:
    """Builtin comparison between two terms."""

    left: Term
    rel: str
    right: Term

    def __str__(self):
        return f"{self.left} {self.rel} {self.right}"


Builtin = Union[Arith, Cmp]


@dataclass(frozen=True)
class Rule:
    """head <- aggs, pos, builtins, not neg.  Falsum head encodes a constraint."""

    head: Head
    aggs: tuple = ()
    pos: tuple = ()
    neg: tuple = ()
    builtins: tuple = ()

    @property
    def is_constraint(self) -> bool:
        return isinstance(self.head, Falsum)

    @property
    def is_fact(self) -> bool:
        return not (self.aggs or self.pos or self.neg or self.builtins)

    def body_items(self) -> Iterator:
        yield from self.aggs
        yield from self.pos
        yield from self.builtins
        for b in self.neg:
            yield Naf(b)

    @property
    def ground(self) -> bool:
        heads = [self.head] if isinstance(self.head, (Atom, AggregateAtom)) else []
        for a in itertools.chain(heads, self.pos, self.neg):
            if isinstance(a, Atom) and not a.ground:
                return False
            if isinstance(a, AggregateAtom) and not a.ground:
                return False
        if any(not c.ground for c in self.aggs):
            return False
        return not self.builtins

    def global_vars(self) -> set:
        """Names of global-kind variables occurring anywhere in the rule."""
        out = set()

        def scan_term(t):
            if isinstance(t, Var) and t.kind == GLOBAL:
                out.add(t.name)

        def scan_atom(a):
            for t in a.args:
                scan_term(t)

        if isinstance(self.head, Atom):
            scan_atom(self.head)
        elif isinstance(self.head, AggregateAtom):
            scan_atom(self.head.spec.pattern)
            scan_term(self.head.guard)
        for a in itertools.chain(self.pos, self.neg):
            scan_atom(a)
        for c in self.aggs:
            scan_atom(c.spec.pattern)
            scan_term(c.guard)
        for b in self.builtins:
            if isinstance(b, Arith):
                for t in (b.target, b.left, b.right):
                    scan_term(t)
            else:
                scan_term(b.left)
                scan_term(b.right)
        return out

    def canonical(self) -> "Rule":
        """Copy with sorted, duplicate-free body parts (for set-like identity)."""
        return Rule(
            head=self.head,
            aggs=tuple(sorted(set(self.aggs), key=AggregateAtom.sort_key)),
            pos=tuple(sorted(set(self.pos), key=Atom.sort_key)),
            neg=tuple(sorted(set(self.neg), key=Atom.sort_key)),
            builtins=self.builtins,
        )

    def sort_key(self):
        headkey = (
            (0,) if isinstance(self.head, Falsum)
            else (1,) + self.head.sort_key() if isinstance(self.head, Atom)
            else (2,) + self.head.sort_key()
        )
        return (
            headkey,
            tuple(a.sort_key() for a in self.pos),
            tuple(a.sort_key() for a in self.neg),
            tuple(c.sort_key() for c in self.aggs),
        )

    def __str__(self):
        body = ", ".join(str(x) for x in self.body_items())
        if isinstance(self.head, Falsum):
            return f":- {body}." if body else ":- ."
        if not body:
            return f"{self.head}."
        return f"{self.head} :- {body}."


@dataclass(frozen=True)
class Program:
    """A collection of rules plus the finite constant universe F_P.

    ``constants`` holds every constant available for grounding: those
    textually present in the rules plus any declared integer intervals
    (kept in ``domains`` so formatting can reproduce the directives).
    """

    rules: tuple = ()
    constants: frozenset = frozenset()
    domains: tuple = ()  # tuple[(lo, hi)] declared integer intervals

    def __post_init__(self):
        textual = constants_in_rules(self.rules)
        if not textual <= self.constants:
            missing = ", ".join(str(c) for c in sorted(textual - self.constants))
            raise InternalError(f"constants outside F_P: {missing}")

    def sorted_constants(self) -> list:
        return sorted(self.constants)

    def predicates(self) -> dict:
        """pred name -> arity for every predicate occurring in the program."""
        preds = {}

        def see(atom: Atom):
            old = preds.setdefault(atom.pred, atom.arity)
            if old != atom.arity:
                raise InternalError(
                    f"predicate {atom.pred} used with arities {old} and {atom.arity}"
                )

        for r in self.rules:
            if isinstance(r.head, Atom):
                see(r.head)
            elif isinstance(r.head, AggregateAtom):
                see(r.head.spec.pattern)
            for a in itertools.chain(r.pos, r.neg):
                see(a)
            for c in r.aggs:
                see(c.spec.pattern)
        return preds

    def has_aggregates(self) -> bool:
        return any(r.aggs or isinstance(r.head, AggregateAtom) for r in self.rules)

    def has_head_aggregates(self) -> bool:
        return any(isinstance(r.head, AggregateAtom) for r in self.rules)


def constants_in_rules(rules) -> frozenset:
    out = set()

    def scan_term(t):
        if isinstance(t, Const):
            out.add(t)

    for r in rules:
        if isinstance(r.head, Atom):
            for t in r.head.args:
                scan_term(t)
        elif isinstance(r.head, AggregateAtom):
            for t in r.head.spec.pattern.args:
                scan_term(t)
            scan_term(r.head.guard)
        for a in itertools.chain(r.pos, r.neg):
            for t in a.args:
                scan_term(t)
        for c in r.aggs:
            for t in c.spec.pattern.args:
                scan_term(t)
            scan_term(c.guard)
        for b in r.builtins:
            if isinstance(b, Arith):
                for t in (b.target, b.left, b.right):
                    scan_term(t)
            else:
                scan_term(b.left)
                scan_term(b.right)
    return frozenset(out)


def make_program(rules, extra_constants=(), domains=()) -> Program:
    """Program with F_P = textual constants + declared intervals + extras."""
    consts = set(constants_in_rules(rules)) | set(extra_constants)
    for lo, hi in domains:
        consts.update(Const(i) for i in range(lo, hi + 1))
    return Program(tuple(rules), frozenset(consts), tuple(domains))


# ---------------------------------------------------------------------------
# Herbrand base, satisfaction, models
# ---------------------------------------------------------------------------


def herbrand_base(program: Program) -> frozenset:
    """All ground atoms formable from the program's predicates and F_P."""
    consts = program.sorted_constants()
    atoms = set()
    for pred, arity in program.predicates().items():
        for combo in itertools.product(consts, repeat=arity):
            atoms.add(Atom(pred, combo))
    return frozenset(atoms)


def match_pattern(pattern: Atom, atom: Atom, local_names) -> Optional[dict]:
    """Bind the pattern's local variables against a ground atom, or None.

    Non-local pattern positions must already be constants (ground
    aggregate atom); a consistent binding is required when a local
    variable occurs more than once.
    """
    if atom.pred != pattern.pred or atom.arity != pattern.arity:
        return None
    binding = {}
    for p, a in zip(pattern.args, atom.args):
        if isinstance(p, Const):
            if p != a:
                return None
        else:
            if p.name not in local_names:
                raise InternalError(f"non-ground pattern position {p} in {pattern}")
            bound = binding.get(p.name)
            if bound is None:
                binding[p.name] = a
            elif bound != a:
                return None
    return binding


def collected_values(interpretation, agg: AggregateAtom) -> list:
    """Values of the collected variable witnessed by ``interpretation``.

    One value per matching atom.  This is exact for both collections:
    multiset witnesses are the full local bindings, and two distinct
    ground instances of a set pattern always carry distinct collected
    values (the collected variable is its only varying position).
    """
    locs = agg.spec.local_names()
    coll = agg.spec.collected.name
    vals = []
    for atom in interpretation:
        binding = match_pattern(agg.spec.pattern, atom, locs)
        if binding is not None:
            vals.append(binding[coll])
    if not agg.spec.multiset:
        vals = list(set(vals))
    return vals


@dataclass(frozen=True)
class AggregateValue:
    """Result of applying an aggregate function; MIN/MAX/AVG are undefined
    exactly on the empty collection, SUM of the empty collection is 0."""

    defined: bool
    value: object = None  # int, or Fraction for AVG


def apply_function(func: str, values) -> AggregateValue:
    if func == "COUNT":
        return AggregateValue(True, len(values))
    ints = []
    for v in values:
        if not v.is_int:
            raise EvalTypeError(
                f"{func} over non-integer collected value {v}"
            )
        ints.append(v.value)
    if func == "SUM":
        return AggregateValue(True, sum(ints))
    if not ints:
        return AggregateValue(False)
    if func == "MIN":
        return AggregateValue(True, min(ints))
    if func == "MAX":
        return AggregateValue(True, max(ints))
    if func == "AVG":
        return AggregateValue(True, Fraction(sum(ints), len(ints)))
    raise InternalError(f"unknown aggregate function {func}")


def compare_with_guard(value, rel: str, guard: Const) -> bool:
    """Relate an aggregate value to the guard constant.

    Integer (or exact rational) values compare numerically with integer
    guards; a named-symbol guard is related through the total constant
    order, under which every number precedes every name.
    """
    if guard.is_int:
        a, b = value, guard.value
    else:
        a, b = 0, 1  # any number sorts strictly before any named symbol
    if rel == "=":
        return a == b
    if rel == "!=":
        return a != b
    if rel == "<":
        return a < b
    if rel == "<=":
        return a <= b
    if rel == ">":
        return a > b
    if rel == ">=":
        return a >= b
    raise InternalError(f"unknown relation {rel}")


def eval_aggregate_in(interpretation, agg: AggregateAtom) -> bool:
    """Truth of a ground aggregate atom in an interpretation.

    An undefined function value (MIN/MAX/AVG over the empty collection)
    makes the atom false.
    """
    if not agg.ground:
        raise InternalError(f"aggregate atom not ground: {agg}")
    if not isinstance(agg.guard, Const):
        raise InternalError(f"aggregate guard not ground: {agg}")
    av = apply_function(agg.func, collected_values(interpretation, agg))
    if not av.defined:
        return False
    return compare_with_guard(av.value, agg.rel, agg.guard)


def satisfies(interpretation, item) -> bool:
    """Truth of an atom, naf-literal, or ground aggregate atom."""
    if isinstance(item, Atom):
        if not item.ground:
            raise InternalError(f"satisfaction of non-ground atom {item}")
        return item in interpretation
    if isinstance(item, Naf):
        if not item.atom.ground:
            raise InternalError(f"satisfaction of non-ground literal {item}")
        return item.atom not in interpretation
    if isinstance(item, AggregateAtom):
        return eval_aggregate_in(interpretation, item)
    raise InternalError(f"cannot evaluate {item!r}")


def satisfies_body(interpretation, rule: Rule) -> bool:
    if rule.builtins:
        raise InternalError("body satisfaction on a rule with builtins")
    return (
        all(a in interpretation for a in rule.pos)
        and all(b not in interpretation for b in rule.neg)
        and all(eval_aggregate_in(interpretation, c) for c in rule.aggs)
    )


def satisfies_rule(interpretation, rule: Rule) -> bool:
    if not satisfies_body(interpretation, rule):
        return True
    if isinstance(rule.head, Falsum):
        return False
    return satisfies(interpretation, rule.head)


def is_model(interpretation, rules) -> bool:
    """True iff the interpretation satisfies every (ground) rule."""
    for r in rules:
        if not r.ground:
            raise InternalError(f"is_model on non-ground rule: {r}")
        if not satisfies_rule(interpretation, r):
            return False
    return True


def sort_atoms(atoms) -> list:
    return sorted(atoms, key=Atom.sort_key)


def format_interpretation(atoms) -> str:
    return "{" + ", ".join(str(a) for a in sort_atoms(atoms)) + "}"


def interpretation_key(atoms):
    """Deterministic order for sets of ground atoms: size, then atom keys."""
    keys = tuple(a.sort_key() for a in sort_atoms(atoms))
    return (len(keys), keys)
