"""Bitmask truth-table kernels.

The innermost loop of solution computation fills, for every subset of an
aggregate atom's base (subsets encoded as bitmasks), the truth value of
the atom.  Three interchangeable backends:

  * ``numba``  - @njit compiled loop (default when numba imports)
  * ``numpy``  - chunked vectorized evaluation (``ASPA_NO_NUMBA=1``)
  * ``python`` - plain loop on arbitrary-precision ints (automatic
                 fallback when values could overflow int64)

``benchmarks/kernel_bench.py`` compares the first two.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InternalError

FUNC_CODES = {"COUNT": 0, "SUM": 1, "MIN": 2, "MAX": 3, "AVG": 4}
REL_CODES = {"=": 0, "!=": 1, "<": 2, "<=": 3, ">": 4, ">=": 5}

_I64_MIN = -(1 << 63)
_I64_MAX = (1 << 63) - 1
_SAFE_BOUND = 1 << 61  # headroom for sums and guard*count products

_CHUNK = 1 << 14


def _use_numba() -> bool:
    return os.environ.get("ASPA_NO_NUMBA", "") not in ("1", "true", "yes")


_numba_fill = None


def _get_numba_fill():
    global _numba_fill
    if _numba_fill is None:
        from numba import njit

        @njit(cache=True)
        def fill(values, func, rel, guard, cnt0, sum0, mn0, mx0, out):
            n = values.shape[0]
            for mask in range(out.shape[0]):
                cnt = cnt0
                s = sum0
                mn = mn0
                mx = mx0
                m = mask
                i = 0
                while m:
                    if m & 1:
                        v = values[i]
                        cnt += 1
                        s += v
                        if v < mn:
                            mn = v
                        if v > mx:
                            mx = v
                    m >>= 1
                    i += 1
                if func == 0:
                    val = cnt
                    lhs, rhs = val, guard
                    defined = True
                elif func == 1:
                    lhs, rhs = s, guard
                    defined = True
                elif cnt == 0:
                    lhs, rhs = 0, 0
                    defined = False
                elif func == 2:
                    lhs, rhs = mn, guard
                    defined = True
                elif func == 3:
                    lhs, rhs = mx, guard
                    defined = True
                else:  # AVG: s/cnt REL guard  <=>  s REL guard*cnt (cnt > 0)
                    lhs, rhs = s, guard * cnt
                    defined = True
                if not defined:
                    ok = False
                elif rel == 0:
                    ok = lhs == rhs
                elif rel == 1:
                    ok = lhs != rhs
                elif rel == 2:
                    ok = lhs < rhs
                elif rel == 3:
                    ok = lhs <= rhs
                elif rel == 4:
                    ok = lhs > rhs
                else:
                    ok = lhs >= rhs
                out[mask] = 1 if ok else 0

        _numba_fill = fill
    return _numba_fill


def _fill_python(values, func, rel, guard, cnt0, sum0, mn0, mx0, size):
    bits = 0
    n = len(values)
    for mask in range(size):
        cnt = cnt0
        s = sum0
        mn = mn0
        mx = mx0
        m = mask
        i = 0
        while m:
            if m & 1:
                v = values[i]
                cnt += 1
                s += v
                if mn is None or v < mn:
                    mn = v
                if mx is None or v > mx:
                    mx = v
            m >>= 1
            i += 1
        if func == 0:
            lhs, rhs, defined = cnt, guard, True
        elif func == 1:
            lhs, rhs, defined = s, guard, True
        elif cnt == 0:
            lhs, rhs, defined = 0, 0, False
        elif func == 2:
            lhs, rhs, defined = mn, guard, True
        elif func == 3:
            lhs, rhs, defined = mx, guard, True
        else:
            lhs, rhs, defined = s, guard * cnt, True
        if defined and _REL_FUNCS[rel](lhs, rhs):
            bits |= 1 << mask
    return bits


_REL_FUNCS = [
    lambda a, b: a == b,
    lambda a, b: a != b,
    lambda a, b: a < b,
    lambda a, b: a <= b,
    lambda a, b: a > b,
    lambda a, b: a >= b,
]


def _fill_numpy(values, func, rel, guard, cnt0, sum0, mn0, mx0, size):
    n = len(values)
    vals = np.asarray(values, dtype=np.int64)
    out = np.empty(size, dtype=np.uint8)
    for start in range(0, size, _CHUNK):
        stop = min(start + _CHUNK, size)
        masks = np.arange(start, stop, dtype=np.uint64)
        member = np.empty((stop - start, max(n, 1)), dtype=bool)
        for i in range(n):
            member[:, i] = (masks >> np.uint64(i)) & np.uint64(1)
        if n == 0:
            member = member[:, :0]
        cnt = cnt0 + member.sum(axis=1, dtype=np.int64)
        s = sum0 + (member * vals).sum(axis=1, dtype=np.int64)
        if func == 0:
            lhs, rhs, defined = cnt, np.int64(guard), None
        elif func == 1:
            lhs, rhs, defined = s, np.int64(guard), None
        elif func in (2, 3):
            if func == 2:
                filled = np.where(member, vals, _I64_MAX)
                agg = filled.min(axis=1, initial=_I64_MAX)
                agg = np.minimum(agg, mn0)
            else:
                filled = np.where(member, vals, _I64_MIN)
                agg = filled.max(axis=1, initial=_I64_MIN)
                agg = np.maximum(agg, mx0)
            lhs, rhs, defined = agg, np.int64(guard), cnt > 0
        else:
            lhs, rhs, defined = s, np.int64(guard) * cnt, None
        ok = _REL_FUNCS[rel](lhs, rhs)
        if defined is not None:
            ok &= defined
        out[start:stop] = ok
    return int.from_bytes(np.packbits(out, bitorder="little").tobytes(), "little")


def backend_name() -> str:
    return "numpy" if not _use_numba() else "numba"


def _int64_safe(values, guard, cnt0, sum0, n):
    bound = abs(sum0) + sum(abs(v) for v in values) + 1
    g = abs(guard) * (n + cnt0 + 1) + 1
    return bound < _SAFE_BOUND and g < _SAFE_BOUND


def truth_table(values, func: str, rel: str, guard: int,
                seed=(0, 0, None, None), backend: str | None = None) -> int:
    """Truth bitmask over all 2^len(values) subsets of the base.

    ``seed`` = (count, sum, min, max) accumulated from atoms fixed true
    outside the swept base (min/max None when nothing is fixed).
    """
    n = len(values)
    if n > 30:
        raise InternalError(f"truth table over {n} atoms is not representable")
    size = 1 << n
    fc = FUNC_CODES[func]
    rc = REL_CODES[rel]
    cnt0, sum0, mn0, mx0 = seed
    if backend is None:
        backend = backend_name()
        if not _int64_safe(values, guard, cnt0, sum0, n):
            backend = "python"
    if backend == "python":
        return _fill_python(values, fc, rc, guard, cnt0, sum0, mn0, mx0, size)
    mn_i = _I64_MAX if mn0 is None else mn0
    mx_i = _I64_MIN if mx0 is None else mx0
    if backend == "numpy":
        return _fill_numpy(values, fc, rc, guard, cnt0, sum0, mn_i, mx_i, size)
    if backend == "numba":
        vals = np.asarray(values, dtype=np.int64)
        out = np.empty(size, dtype=np.uint8)
        _get_numba_fill()(vals, fc, rc, guard, cnt0, sum0, mn_i, mx_i, out)
        return int.from_bytes(np.packbits(out, bitorder="little").tobytes(), "little")
    raise InternalError(f"unknown kernel backend {backend!r}")


# ---------------------------------------------------------------------------
# Table combinators (plain python big-int bit fiddling; not hot)
# ---------------------------------------------------------------------------


def full_table(n: int) -> int:
    return (1 << (1 << n)) - 1


def cube_fold(table: int, n: int, ones: int, zeros: int, any_true: bool = False) -> bool:
    """Fold the table down to the subcube {I : ones ⊆ I, I ∩ zeros = ∅}.

    Returns whether the aggregate is true on ALL points of the subcube
    (or on ANY point, with ``any_true``); atoms outside ones|zeros are
    swept.
    """
    if ones & zeros:
        raise InternalError("overlapping solution components")
    t = table
    for i in reversed(range(n)):
        half = 1 << (1 << i)  # bits in the low half
        lo = t & (half - 1)
        hi = t >> (1 << i)
        bit = 1 << i
        if ones & bit:
            t = hi
        elif zeros & bit:
            t = lo
        elif any_true:
            t = hi | lo
        else:
            t = hi & lo
    return bool(t & 1)


def monotone_table(table: int, n: int) -> bool:
    """True iff table(I) implies table(J) for all I ⊆ J."""
    total = 1 << n
    for i in range(n):
        width = 1 << i
        period = width << 1
        # mask selecting the low half of every period-sized block
        unit = (1 << width) - 1
        sel = unit * (((1 << total) - 1) // ((1 << period) - 1))
        lo = table & sel
        hi = (table >> width) & sel
        if lo & ~hi:
            return False
    return True


def prime_implicants(table: int, n: int):
    """Maximal subcubes on which the table is identically true.

    Cubes are (ones_mask, zeros_mask) pairs; the recursion splits on the
    highest atom and merges prime sets, with absorption against the
    x-free primes.
    """
    memo = {}

    def covered(p, primes) -> bool:
        po, pz = p
        for qo, qz in primes:
            if qo & ~po == 0 and qz & ~pz == 0:
                return True
        return False

    def rec(t, k):
        if t == 0:
            return []
        if t == full_table(k):
            return [(0, 0)]
        key = (k, t)
        cached = memo.get(key)
        if cached is not None:
            return cached
        half = 1 << (k - 1)
        lo = t & ((1 << half) - 1)
        hi = t >> half
        p01 = rec(lo & hi, k - 1)
        out = list(p01)
        bit = 1 << (k - 1)
        for o, z in rec(lo, k - 1):
            if not covered((o, z), p01):
                out.append((o, z | bit))
        for o, z in rec(hi, k - 1):
            if not covered((o, z), p01):
                out.append((o | bit, z))
        memo[key] = out
        return out

    return rec(table, n)
