"""Benchmark corpus: generated instances plus independent oracles.

Each benchmark builds its encoding at a requested size, runs the full
pipeline (ground, solutions+unfold, solve), and validates the answer sets
against an oracle computed by an independent direct algorithm (fixpoint
closures, Floyd-Warshall, exhaustive assignment enumeration).  Timings are
informational only; they are not comparable across machines.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .ast import Atom, Const, format_interpretation, interpretation_key
from .config import DEFAULT_LIMITS
from .errors import AspaError
from .grounder import HEAD_RESTRICTED, ground_program
from .parser import parse_program
from .solver import enumerate_answer_sets
from .unfold import unfold_program


def _atom(pred, *args):
    return Atom(pred, tuple(Const(a) for a in args))


@dataclass
class BenchResult:
    name: str
    params: dict
    answer_count: int
    first: list          # sorted atom strings of the first answer set
    timings: dict        # stage -> seconds (>= 0)
    oracle: str          # "ok" | "failed: ..." | "skipped"
    source: str = field(repr=False, default="")


# ---------------------------------------------------------------------------
# Generators: (source text, oracle over the enumerated answer sets)
# ---------------------------------------------------------------------------


def _company_control(n=4):
    owns = [(f"c{i}", f"c{i+1}", 60 + i) for i in range(1, n)]
    owns.append((f"c1", f"c{n}", 10))
    lines = [
        "control_shares(X,Y,N) :- owns(X,Y,N).",
        "control_shares(X,Y,N) :- control(X,Z), owns(Z,Y,N).",
        "control(X,Y) :- SUM{{ M : control_shares(X,Y,M) }} > 50.",
    ]
    lines += [f"owns({x},{y},{s})." for x, y, s in owns]

    def oracle(answers):
        control = set()
        shares = {}
        while True:
            shares = {}
            for x, y, s in owns:
                shares.setdefault((x, y), set()).add(s)
            for x, z in control:
                for z2, y, s in owns:
                    if z2 == z:
                        shares.setdefault((x, y), set()).add(s)
            new = {xy for xy, vals in shares.items() if sum(vals) > 50}
            if new == control:
                break
            control = new
        expected = {_atom("owns", x, y, s) for x, y, s in owns}
        expected |= {
            _atom("control_shares", x, y, s)
            for (x, y), vals in shares.items()
            for s in vals
        }
        expected |= {_atom("control", x, y) for x, y in control}
        return _expect_exact(answers, [expected])

    return "\n".join(lines), oracle


def _shortest_path(n=4):
    nodes = [f"n{i}" for i in range(1, n + 1)]
    arcs = []
    for i in range(n - 1):
        arcs.append((nodes[i], nodes[i + 1], 1 + (i % 2)))
    arcs.append((nodes[0], nodes[-1], 3))
    if n >= 3:
        arcs.append((nodes[1], nodes[0], 2))

    inf = float("inf")
    dist = {(x, y): inf for x in nodes for y in nodes}
    for x, y, w in arcs:
        dist[x, y] = min(dist[x, y], w)
    for k in nodes:
        for x in nodes:
            for y in nodes:
                if dist[x, k] + dist[k, y] < dist[x, y]:
                    dist[x, y] = dist[x, k] + dist[k, y]
    maxw = max(w for _, _, w in arcs)
    reach = [d for d in dist.values() if d < inf]
    hi = int(max(reach) + maxw) if reach else maxw

    lines = [
        f"#const_domain 1..{hi}.",
        "path(X,Y,C) :- arc(X,Y,C).",
        "path(X,Y,C) :- spath(X,Z,C1), arc(Z,Y,C2), C = C1 + C2.",
        "spath(X,Y,C) :- MIN{{ D : path(X,Y,D) }} = C.",
    ]
    lines += [f"arc({x},{y},{w})." for x, y, w in arcs]

    def oracle(answers):
        expected = {_atom("arc", x, y, w) for x, y, w in arcs}
        expected |= {_atom("path", x, y, w) for x, y, w in arcs}
        for x in nodes:
            for z, y, w in arcs:
                if dist[x, z] < inf:
                    expected.add(_atom("path", x, y, int(dist[x, z]) + w))
        expected |= {
            _atom("spath", x, y, int(d))
            for (x, y), d in dist.items()
            if d < inf
        }
        return _expect_exact(answers, [expected])

    return "\n".join(lines), oracle


def _party_invitations(n=5):
    persons = [f"g{i}" for i in range(1, n + 1)]
    friends = [(persons[i], persons[(i + 1) % n]) for i in range(n)]
    requires = {p: (0 if i == 0 else 1) for i, p in enumerate(persons)}
    lines = [
        "friend(X,Y) :- friend(Y,X).",
        "coming(X) :- requires(X,0).",
        "coming(X) :- requires(X,K), COUNT{ Y : come_friend(X,Y) } >= K.",
        "come_friend(X,Y) :- friend(X,Y), coming(Y).",
    ]
    lines += [f"friend({x},{y})." for x, y in friends]
    lines += [f"requires({p},{k})." for p, k in requires.items()]

    def oracle(answers):
        sym = set(friends) | {(y, x) for x, y in friends}
        coming = {p for p in persons if requires[p] == 0}
        while True:
            come_friend = {(x, y) for x, y in sym if y in coming}
            new = set(coming)
            for p in persons:
                if len({y for x, y in come_friend if x == p}) >= requires[p]:
                    new.add(p)
            if new == coming:
                break
            coming = new
        come_friend = {(x, y) for x, y in sym if y in coming}
        expected = {_atom("friend", x, y) for x, y in sym}
        expected |= {_atom("requires", p, k) for p, k in requires.items()}
        expected |= {_atom("coming", p) for p in coming}
        expected |= {_atom("come_friend", x, y) for x, y in come_friend}
        return _expect_exact(answers, [expected])

    return "\n".join(lines), oracle


def _group_seating(persons=4, tables=2, chairs=2):
    ps = [f"g{i}" for i in range(1, persons + 1)]
    ts = [f"t{i}" for i in range(1, tables + 1)]
    likes = [(ps[0], ps[1])] if persons >= 2 else []
    dislikes = [(ps[0], ps[2])] if persons >= 3 else []
    lines = [
        "at(P,T) :- person(P), table(T), not not_at(P,T).",
        "not_at(P,T) :- person(P), table(T), not at(P,T).",
        ":- table(T), nchairs(C), COUNT{ P : at(P,T) } > C.",
        ":- person(P), COUNT{ T : at(P,T) } != 1.",
        ":- like(P1,P2), at(P1,T), not at(P2,T).",
        ":- dislike(P1,P2), at(P1,T), at(P2,T).",
    ]
    lines += [f"person({p})." for p in ps]
    lines += [f"table({t})." for t in ts]
    lines += [f"nchairs({chairs})."]
    lines += [f"like({a},{b})." for a, b in likes]
    lines += [f"dislike({a},{b})." for a, b in dislikes]

    def oracle(answers):
        facts = {_atom("person", p) for p in ps}
        facts |= {_atom("table", t) for t in ts}
        facts.add(_atom("nchairs", chairs))
        facts |= {_atom("like", a, b) for a, b in likes}
        facts |= {_atom("dislike", a, b) for a, b in dislikes}
        expected = []
        for assignment in itertools.product(ts, repeat=len(ps)):
            seat = dict(zip(ps, assignment))
            if any(
                sum(1 for p in ps if seat[p] == t) > chairs for t in ts
            ):
                continue
            if any(seat[a] != seat[b] for a, b in likes):
                continue
            if any(seat[a] == seat[b] for a, b in dislikes):
                continue
            at = {(p, seat[p]) for p in ps}
            full = set(facts)
            full |= {_atom("at", p, t) for p, t in at}
            full |= {
                _atom("not_at", p, t)
                for p in ps
                for t in ts
                if (p, t) not in at
            }
            expected.append(frozenset(full))
        return _expect_exact(answers, expected)

    return "\n".join(lines), oracle


def _employee_raise(employees=6, max_raised=3, min_hours=8):
    ps = [f"e{i}" for i in range(1, employees + 1)]
    hours = {}
    for i, p in enumerate(ps):
        # alternate qualified / underworked employees deterministically
        if i % 3 == 2:
            hours[p] = [("d1", 4), ("d2", 3)]
        elif i % 3 == 1:
            hours[p] = [("d1", 4), ("d2", 4)]
        else:
            hours[p] = [("d1", 5), ("d2", 5)]
    lines = [
        "raised(X) :- empName(X), not notraised(X).",
        "notraised(X) :- empName(X), not raised(X).",
        "notraised(X) :- empName(X), nHours(K), SUM{{ H : emp(X,D,H) }} < K.",
        ":- maxRaised(N), COUNT{ X : raised(X) } > N.",
    ]
    lines += [f"empName({p})." for p in ps]
    lines += [
        f"emp({p},{d},{h})." for p in ps for d, h in hours[p]
    ]
    lines += [f"nHours({min_hours}).", f"maxRaised({max_raised})."]

    def oracle(answers):
        facts = {_atom("empName", p) for p in ps}
        facts |= {_atom("emp", p, d, h) for p in ps for d, h in hours[p]}
        facts.add(_atom("nHours", min_hours))
        facts.add(_atom("maxRaised", max_raised))
        qualified = [
            p for p in ps if sum(h for _, h in hours[p]) >= min_hours
        ]
        expected = []
        for k in range(0, max_raised + 1):
            for combo in itertools.combinations(qualified, k):
                raised = set(combo)
                full = set(facts)
                full |= {_atom("raised", p) for p in raised}
                full |= {_atom("notraised", p) for p in ps if p not in raised}
                expected.append(frozenset(full))
        return _expect_exact(answers, expected)

    return "\n".join(lines), oracle


def _nm1(n=5):
    lines = [
        "q(K) :- r(X), w(K), MAX{ Z : p(Z) } = K.",
        "p(X) :- q(K), r(X), w(K).",
        "a(X) :- not b(X), p(X), r(X).",
        "b(X) :- not a(X), p(X), r(X).",
    ]
    lines += [f"r({i})." for i in range(1, n + 1)]
    lines += [f"w({n}).", f"p({n})."]

    def oracle(answers):
        core = {_atom("r", i) for i in range(1, n + 1)}
        core.add(_atom("w", n))
        core.add(_atom("q", n))
        core |= {_atom("p", i) for i in range(1, n + 1)}
        expected = []
        for pattern in itertools.product("ab", repeat=n):
            full = set(core)
            for i, side in enumerate(pattern, start=1):
                full.add(_atom(side, i))
            expected.append(frozenset(full))
        return _expect_exact(answers, expected)

    return "\n".join(lines), oracle


def _nm2(n=6):
    lines = [
        "q(K) :- r(X), w(K), MIN{ Z : p(Z) } > K.",
        "p(X) :- q(K), r(X), w(K).",
    ]
    lines += [f"r({i})." for i in range(1, n + 1)]
    lines += ["w(0).", "p(1)."]

    def oracle(answers):
        expected = {_atom("r", i) for i in range(1, n + 1)}
        expected.add(_atom("w", 0))
        expected.add(_atom("q", 0))
        expected |= {_atom("p", i) for i in range(1, n + 1)}
        return _expect_exact(answers, [frozenset(expected)])

    return "\n".join(lines), oracle


def _expect_exact(answers, expected):
    got = sorted((frozenset(a) for a in answers), key=interpretation_key)
    want = sorted((frozenset(e) for e in expected), key=interpretation_key)
    if got == want:
        return "ok"
    for g, w in itertools.zip_longest(got, want):
        if g != w:
            return (
                "failed: first mismatch\n  got:      "
                + (format_interpretation(g) if g is not None else "(missing)")
                + "\n  expected: "
                + (format_interpretation(w) if w is not None else "(missing)")
            )
    return "failed: count mismatch"


BENCHMARKS = {
    "company-control": (_company_control, {"n": 4}),
    "shortest-path": (_shortest_path, {"n": 4}),
    "party-invitations": (_party_invitations, {"n": 5}),
    "group-seating": (_group_seating, {"persons": 4, "tables": 2, "chairs": 2}),
    "employee-raise": (_employee_raise, {"employees": 6, "max_raised": 3,
                                         "min_hours": 8}),
    "nm1": (_nm1, {"n": 5}),
    "nm2": (_nm2, {"n": 6}),
}


def bench_source(name: str, **params) -> str:
    gen, defaults = BENCHMARKS[name]
    merged = {**defaults, **params}
    source, _ = gen(**merged)
    return source + "\n"


def run_bench(name: str, params=None, limits=DEFAULT_LIMITS,
              base_mode=HEAD_RESTRICTED, solution_mode="minimal",
              validate=True) -> BenchResult:
    if name not in BENCHMARKS:
        raise AspaError(
            f"unknown benchmark {name!r}; choose from {', '.join(sorted(BENCHMARKS))}"
        )
    gen, defaults = BENCHMARKS[name]
    merged = {**defaults, **(params or {})}
    source, oracle = gen(**merged)

    timings = {}
    t0 = time.perf_counter()
    program = parse_program(source)
    ground = ground_program(program, limits, base_mode)
    timings["ground"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    normal = unfold_program(ground, solution_mode, limits)
    timings["transform"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    answers = enumerate_answer_sets(normal, None, limits)
    timings["solve"] = time.perf_counter() - t2
    timings["total"] = time.perf_counter() - t0

    status = oracle(answers) if validate else "skipped"
    first = (
        [str(a) for a in sorted(answers[0], key=Atom.sort_key)] if answers else []
    )
    return BenchResult(
        name=name,
        params=merged,
        answer_count=len(answers),
        first=first,
        timings=timings,
        oracle=status,
        source=source,
    )
