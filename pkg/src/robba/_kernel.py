"""Integer and precision kernels shared by the scalar, cyclotomic and series layers.

Everything here works on plain Python integers (coefficient digits) and numpy
float arrays (absolute precisions, with ``inf`` for exact values).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

INF = math.inf


def vp(n: int, p: int) -> float:
    """p-adic valuation of an integer; ``inf`` for zero."""
    if n == 0:
        return INF
    if p == 2:
        return float((n & -n).bit_length() - 1)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return float(v)


def split(n: int, p: int) -> tuple[int, int]:
    """Write a non-zero integer as p^v * u with u prime to p."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def ilog(n: int, p: int) -> int:
    """floor(log_p n) for n >= 1, and 0 for n <= 1."""
    k = 0
    m = p
    while m <= n:
        m *= p
        k += 1
    return k


@lru_cache(maxsize=None)
def vfact(n: int, p: int) -> int:
    """v_p(n!) by Legendre's formula."""
    s, q = 0, p
    while q <= n:
        s += n // q
        q *= p
    return s


def reduce_mod(d: int, k: float, p: int) -> int:
    """Reduce a digit modulo p^k (k may be infinite or non-positive)."""
    if k == INF:
        return d
    if k <= 0:
        return 0
    return d % p ** int(k)


def _pack(a: list[int], w: int) -> int:
    acc = 0
    for x in reversed(a):
        acc = (acc << w) | x
    return acc


def _unpack(x: int, n: int, w: int) -> list[int]:
    nb = w // 8
    raw = x.to_bytes(n * nb, "little")
    return [int.from_bytes(raw[i * nb:(i + 1) * nb], "little") for i in range(n)]


def _conv_nonneg(a: list[int], b: list[int]) -> list[int]:
    ma, mb = max(a), max(b)
    if ma == 0 or mb == 0:
        return [0] * (len(a) + len(b) - 1)
    bits = ma.bit_length() + mb.bit_length() + min(len(a), len(b)).bit_length() + 1
    w = (bits + 7) // 8 * 8
    n = len(a) + len(b) - 1
    return _unpack(_pack(a, w) * _pack(b, w), n, w)


def convolve(a: list[int], b: list[int]) -> list[int]:
    """Full integer convolution via Kronecker substitution."""
    if not a or not b:
        return []
    if len(a) * len(b) <= 16:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out
    an = any(x < 0 for x in a)
    bn = any(y < 0 for y in b)
    if not an and not bn:
        return _conv_nonneg(a, b)
    ap = [x if x > 0 else 0 for x in a]
    am = [-x if x < 0 else 0 for x in a]
    bp = [y if y > 0 else 0 for y in b]
    bm = [-y if y < 0 else 0 for y in b]
    out = _conv_nonneg(ap, bp)
    for sign, u, v in ((-1, ap, bm), (-1, am, bp), (1, am, bm)):
        if any(u) and any(v):
            c = _conv_nonneg(u, v)
            out = [o + sign * x for o, x in zip(out, c)]
    return out


def minplus(va: np.ndarray, na: np.ndarray, vb: np.ndarray, nb: np.ndarray) -> np.ndarray:
    """Precision of a product of two coefficient vectors.

    out[k] = min over i+j=k of min(va[i] + nb[j], na[i] + vb[j]), where ``v``
    are valuation lower bounds and ``n`` absolute precisions.
    """
    la, lb = len(va), len(vb)
    with np.errstate(invalid="ignore"):
        c = np.minimum(va[:, None] + nb[None, :], na[:, None] + vb[None, :])
    c[np.isnan(c)] = INF
    out = np.full((la, la + lb - 1), INF)
    rows = np.arange(la)[:, None]
    out[rows, rows + np.arange(lb)[None, :]] = c
    return out.min(axis=0)


def digit_vals(digits, e: int, precs: np.ndarray, p: int) -> np.ndarray:
    """Valuation lower bounds min(v(p^e d), N) for each coefficient."""
    out = np.empty(len(digits))
    for i, d in enumerate(digits):
        out[i] = min(vp(d, p) + e, precs[i])
    return out


def binom(x: int, j: int) -> int:
    """Binomial coefficient C(x, j) for any integer x (falling factorial recurrence)."""
    c = 1
    for i in range(j):
        c = c * (x - i) // (i + 1)
    return c


def binom_row(x: int, n: int) -> list[int]:
    """[C(x, 0), ..., C(x, n-1)] for an integer x."""
    out = [1] * n if n else []
    c = 1
    for i in range(1, n):
        c = c * (x - i + 1) // i
        out[i] = c
    return out
