"""Independent reference implementations used to cross-check the library.

Everything here is deliberately plain: complex arithmetic straight from the
defining formulas, nested loops, and numerical quadrature.  No log-domain
tricks, no shared code with the package.
"""

from __future__ import annotations

import cmath
import itertools
import math
from functools import lru_cache

import numpy as np

PI = math.pi

TRIPLES = ((0, 1, 2), (0, 4, 5), (1, 3, 5), (2, 3, 4))
QUADS = ((0, 1, 3, 4), (0, 2, 3, 5), (1, 2, 4, 5))


def oracle_admissible_triple(r: int, a: int, b: int, c: int) -> bool:
    if min(a, b, c) < 0 or max(a, b, c) > r - 2:
        return False
    s = a + b + c
    return s % 2 == 0 and s <= 2 * (r - 2) and a + b >= c and b + c >= a and c + a >= b


def oracle_admissible_six(r: int, colors) -> bool:
    a = tuple(colors)
    return all(oracle_admissible_triple(r, a[i], a[j], a[k]) for i, j, k in TRIPLES)


@lru_cache(maxsize=None)
def _qfact(r: int, n: int) -> complex:
    q = cmath.exp(2j * PI / r)
    v = 1 + 0j
    for k in range(1, n + 1):
        v *= (q ** k - q ** -k) / (q - q ** -1)
    return v


def _sqrt_convention(x: complex) -> complex:
    # real input; negative values take sqrt(|x|) * i
    xr = x.real
    if xr >= 0:
        return complex(math.sqrt(xr), 0.0)
    return complex(0.0, math.sqrt(-xr))


def oracle_sixj(r: int, colors) -> complex:
    """6j-symbol by direct complex evaluation of the defining formula."""
    a = tuple(int(v) for v in colors)
    T = [(a[i] + a[j] + a[k]) // 2 for i, j, k in TRIPLES]
    Q = [(a[i] + a[j] + a[k] + a[l]) // 2 for i, j, k, l in QUADS]
    delta = 1 + 0j
    for i, j, k in TRIPLES:
        x, y, z = a[i], a[j], a[k]
        delta *= _sqrt_convention(
            _qfact(r, (x + y - z) // 2) * _qfact(r, (y + z - x) // 2)
            * _qfact(r, (z + x - y) // 2) / _qfact(r, (x + y + z) // 2 + 1))
    total = 0j
    for k in range(max(T), min(min(Q), r - 2) + 1):
        term = (-1) ** k * _qfact(r, k + 1)
        for t in T:
            term /= _qfact(r, k - t)
        for q in Q:
            term /= _qfact(r, q - k)
        total += term
    return (1j) ** (-sum(a)) * delta * total


def enumerate_admissible(r: int) -> list[tuple[int, ...]]:
    """All admissible 6-tuples, pruned triple by triple."""
    out = []
    rng = range(r - 1)
    for a1, a2, a3 in itertools.product(rng, repeat=3):
        if not oracle_admissible_triple(r, a1, a2, a3):
            continue
        for a5, a6 in itertools.product(rng, repeat=2):
            if not oracle_admissible_triple(r, a1, a5, a6):
                continue
            for a4 in rng:
                if (oracle_admissible_triple(r, a2, a4, a6)
                        and oracle_admissible_triple(r, a3, a4, a5)):
                    out.append((a1, a2, a3, a4, a5, a6))
    return out


class OracleDft:
    """Brute-force transform with a per-r memo of 6j values."""

    def __init__(self, r: int):
        self.r = r
        self.q = cmath.exp(2j * PI / r)
        self._memo: dict[tuple[int, ...], complex] = {}

    def sixj_sq(self, colors: tuple[int, ...]) -> complex:
        if colors not in self._memo:
            self._memo[colors] = oracle_sixj(self.r, colors) ** 2
        return self._memo[colors]

    def kernel(self, a: int, b: int) -> complex:
        return ((-1) ** (a + b)
                * (self.q ** ((a + 1) * (b + 1)) - self.q ** (-(a + 1) * (b + 1)))
                / (self.q - self.q ** -1))

    def value(self, deep_edges, b_deep, a_regular) -> tuple[complex, int]:
        """(sum, admissible extension count); edges are 1-based."""
        r = self.r
        deep = list(deep_edges)
        fixed = dict(zip([e for e in range(1, 7) if e not in deep], a_regular))
        bmap = dict(zip(deep, b_deep))
        total = 0j
        count = 0
        for vals in itertools.product(range(r - 1), repeat=len(deep)):
            colors = [0] * 6
            for e, v in fixed.items():
                colors[e - 1] = v
            for e, v in zip(deep, vals):
                colors[e - 1] = v
            if not oracle_admissible_six(r, colors):
                continue
            count += 1
            term = self.sixj_sq(tuple(colors))
            for e in deep:
                term *= self.kernel(colors[e - 1], bmap[e])
            total += term
        return total, count


# ---------------------------------------------------------------------------
# quadrature oracles for the special functions


def lobachevsky_quad(theta: float) -> float:
    """-integral of log|2 sin t| from 0 to theta by composite Gauss-Legendre,
    with the endpoint log singularities subtracted analytically."""
    th = float(theta)
    sign = 1.0
    if th < 0:
        th, sign = -th, -1.0
    th = math.fmod(th, PI)  # the integral over a full period vanishes
    if th == 0.0:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(80)

    def smooth_part(a: float) -> float:
        # integral of log(2 sin t / t) over (0, a); integrand is analytic
        t = 0.5 * a * (x + 1.0)
        return 0.5 * a * float(np.sum(w * np.log(2.0 * np.sin(t) / t)))

    def left(a: float) -> float:
        # integral of log(2 sin t) over (0, a) for a <= pi/2
        return a * math.log(a) - a + smooth_part(a)

    if th <= PI / 2:
        val = left(th)
    else:
        val = -left(PI - th)  # total over (0, pi) is zero; mirror the tail
    return -sign * val


def dilog_quad(z: complex, panels: int = 300) -> complex:
    """Dilogarithm by integrating -log(1-u)/u along the straight path to z."""
    z = complex(z)
    if z == 0:
        return 0j
    x, w = np.polynomial.legendre.leggauss(40)
    total = 0j
    for i in range(panels):
        a = z * (i / panels)
        b = z * ((i + 1) / panels)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        for xv, wv in zip(x, w):
            u = mid + half * xv
            total += wv * half * (-cmath.log(1.0 - u) / u if u != 0 else 1.0 + 0j)
    return total
