"""Quantum integers, factorials and 6j-symbols at the root of unity q = e^(2*pi*i/r).

Everything is kept in log-domain representations (sign * e^L or e^L * e^(i*phi))
because magnitudes grow like e^(O(r)) and overflow doubles long before the
interesting regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

# Edges of the tetrahedral graph are numbered 1..6 (0-based internally).
# The four graph vertices carry the edge triples below; the three quads pair
# the edges missing from two opposite vertices.  Opposite edge pairs: 1-4, 2-5, 3-6.
VERTEX_TRIPLES = ((0, 1, 2), (0, 4, 5), (1, 3, 5), (2, 3, 4))
EDGE_QUADS = ((0, 1, 3, 4), (0, 2, 3, 5), (1, 2, 4, 5))

Coloring6 = Sequence[int]


def wrap_phase(phi: float) -> float:
    """Reduce a phase to (-pi, pi]."""
    phi = math.fmod(phi, TWO_PI)
    if phi > math.pi:
        phi -= TWO_PI
    elif phi <= -math.pi:
        phi += TWO_PI
    return phi


@dataclass(frozen=True)
class SignedLog:
    """A real number sign * e^log_mag with sign in {-1, 0, +1}."""

    sign: int
    log_mag: float

    @staticmethod
    def zero() -> "SignedLog":
        return SignedLog(0, -math.inf)

    @staticmethod
    def one() -> "SignedLog":
        return SignedLog(1, 0.0)

    @staticmethod
    def from_float(x: float) -> "SignedLog":
        if x == 0.0:
            return SignedLog.zero()
        return SignedLog(1 if x > 0 else -1, math.log(abs(x)))

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.sign * other.sign, self.log_mag + other.log_mag)

    def value(self) -> float:
        """Plain float; overflows to +-inf when log_mag is huge."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_mag)


@dataclass(frozen=True)
class PhaseLog:
    """A complex number e^log_mag * e^(i*phase), or exact zero."""

    zero: bool
    log_mag: float
    phase: float

    @staticmethod
    def zero_value() -> "PhaseLog":
        return PhaseLog(True, -math.inf, 0.0)

    @staticmethod
    def make(log_mag: float, phase: float) -> "PhaseLog":
        return PhaseLog(False, log_mag, wrap_phase(phase))

    def __mul__(self, other: "PhaseLog") -> "PhaseLog":
        if self.zero or other.zero:
            return PhaseLog.zero_value()
        return PhaseLog.make(self.log_mag + other.log_mag, self.phase + other.phase)

    def value(self) -> complex:
        if self.zero:
            return 0j
        return math.exp(self.log_mag) * complex(math.cos(self.phase), math.sin(self.phase))


class SignedAccumulator:
    """Streaming max-shifted sum of signed exponentials.

    Tracks the running maximum exponent M and the mantissa sum of
    sign * e^(log - M); the mantissa is rescaled whenever a larger M arrives,
    so intermediate values stay in the representable range.  With
    ``compensated=True`` the mantissa uses Neumaier summation.
    """

    def __init__(self, compensated: bool = False):
        self.max_log = -math.inf
        self.mantissa = 0.0
        self._comp = 0.0
        self.compensated = compensated

    def _add_mantissa(self, x: float) -> None:
        if not self.compensated:
            self.mantissa += x
            return
        t = self.mantissa + x
        if abs(self.mantissa) >= abs(x):
            self._comp += (self.mantissa - t) + x
        else:
            self._comp += (x - t) + self.mantissa
        self.mantissa = t

    def add(self, sign: float, log_mag: float) -> None:
        if sign == 0 or log_mag == -math.inf:
            return
        if log_mag > self.max_log:
            scale = math.exp(self.max_log - log_mag) if self.max_log != -math.inf else 0.0
            self.mantissa *= scale
            self._comp *= scale
            self.max_log = log_mag
        self._add_mantissa(math.copysign(math.exp(log_mag - self.max_log), sign))

    def add_signedlog(self, x: SignedLog) -> None:
        self.add(x.sign, x.log_mag)

    def total(self) -> SignedLog:
        s = self.mantissa + self._comp
        if s == 0.0 or self.max_log == -math.inf:
            return SignedLog.zero()
        return SignedLog(1 if s > 0 else -1, self.max_log + math.log(abs(s)))


class RootContext:
    """Precomputed data for one odd root order r.

    Holds the quantum integers [n] = sin(2*pi*n/r)/sin(2*pi/r) and the
    factorial table [n]! for n = 0..r-1 in signed-log form.  Instances are
    immutable after construction and safe to share across threads.
    """

    __slots__ = ("r", "sin_base", "qint", "logfact", "signfact", "log2sin")

    def __init__(self, r: int):
        if r < 3 or r % 2 == 0:
            raise ValueError(f"r must be an odd integer >= 3, got {r}")
        self.r = r
        self.sin_base = math.sin(TWO_PI / r)
        n = np.arange(r + 1)
        self.qint = np.sin(TWO_PI * n / r) / self.sin_base  # [n], n = 0..r ([r] = 0)
        # Factorial table via compensated accumulation: the later ratio
        # fact[n]/fact[n-1] must recover [n] to ~1e-12 even when |log| ~ 1e4.
        logfact = np.zeros(r)
        signfact = np.ones(r)
        acc = comp = 0.0
        sign = 1.0
        for k in range(1, r):
            x = math.log(abs(self.qint[k]))
            y = x - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
            if self.qint[k] < 0:
                sign = -sign
            logfact[k] = acc
            signfact[k] = sign
        logfact.setflags(write=False)
        signfact.setflags(write=False)
        self.qint.setflags(write=False)
        self.logfact = logfact
        self.signfact = signfact
        self.log2sin = math.log(2.0 * self.sin_base)

    def __repr__(self) -> str:
        return f"RootContext(r={self.r})"


def quantum_integer(ctx: RootContext, n: int) -> float:
    """[n] = sin(2*pi*n/r)/sin(2*pi/r) for 0 <= n <= r."""
    if not 0 <= n <= ctx.r:
        raise ValueError(f"quantum_integer: n={n} outside [0, {ctx.r}]")
    return float(ctx.qint[n])


def quantum_factorial(ctx: RootContext, n: int) -> SignedLog:
    """[n]! for 0 <= n <= r-1, from the precomputed table."""
    if not 0 <= n <= ctx.r - 1:
        raise ValueError(f"quantum_factorial: n={n} outside [0, {ctx.r - 1}]")
    if n == 0:
        return SignedLog.one()
    return SignedLog(int(ctx.signfact[n]), float(ctx.logfact[n]))


def brace_factorial_log_abs(ctx: RootContext, n: int) -> float:
    """log|{n}!| where {k} = q^k - q^-k, i.e. log|[n]!| + n*log(2 sin(2*pi/r))."""
    if not 0 <= n <= ctx.r - 1:
        raise ValueError(f"brace_factorial_log_abs: n={n} outside [0, {ctx.r - 1}]")
    return float(ctx.logfact[n]) + n * ctx.log2sin


def admissible_triple(ctx: RootContext, a: int, b: int, c: int) -> bool:
    """Triangle inequalities, even sum, and the upper bound a+b+c <= 2(r-2)."""
    r = ctx.r
    for x in (a, b, c):
        if not 0 <= x <= r - 2:
            return False
    s = a + b + c
    return (s % 2 == 0 and s <= 2 * (r - 2)
            and a + b >= c and b + c >= a and c + a >= b)


def admissible_six(ctx: RootContext, colors: Coloring6) -> bool:
    """Admissibility of all four vertex triples of the tetrahedral graph."""
    a = tuple(colors)
    if len(a) != 6:
        raise ValueError("admissible_six expects 6 colors")
    return all(admissible_triple(ctx, a[i], a[j], a[k]) for i, j, k in VERTEX_TRIPLES)


def admissible_mask(ctx: RootContext, colors: np.ndarray) -> np.ndarray:
    """Vectorized admissible_six over an (N, 6) integer array."""
    r = ctx.r
    m = np.all((colors >= 0) & (colors <= r - 2), axis=1)
    for i, j, k in VERTEX_TRIPLES:
        a, b, c = colors[:, i], colors[:, j], colors[:, k]
        s = a + b + c
        m &= (s % 2 == 0) & (s <= 2 * (r - 2))
        m &= (a + b >= c) & (b + c >= a) & (c + a >= b)
    return m


def triangle_factor(ctx: RootContext, a: int, b: int, c: int) -> PhaseLog:
    """The square-rooted factorial weight attached to an admissible triple.

    sqrt([x]![y]![z]!/[w+1]!) with x = (a+b-c)/2 etc.; a negative radicand
    takes the branch sqrt(-|x|) = sqrt(|x|) * i, so the phase is 0 or pi/2.
    """
    if not admissible_triple(ctx, a, b, c):
        raise ValueError(f"triangle_factor: ({a},{b},{c}) is not admissible for r={ctx.r}")
    rad = (quantum_factorial(ctx, (a + b - c) // 2)
           * quantum_factorial(ctx, (b + c - a) // 2)
           * quantum_factorial(ctx, (c + a - b) // 2))
    top = quantum_factorial(ctx, (a + b + c) // 2 + 1)
    sign = rad.sign * top.sign
    log_mag = 0.5 * (rad.log_mag - top.log_mag)
    return PhaseLog.make(log_mag, 0.0 if sign > 0 else HALF_PI)


def sixj_batch(ctx: RootContext, colors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """6j-symbols of admissible 6-tuples, vectorized.

    Returns (log_mag, quarter_phase): the value of row i is
    e^log_mag[i] * i^quarter_phase[i]; an exactly cancelled sum is reported
    as log_mag = -inf.  Rows must already be admissible.

    The alternating k-sum is evaluated with a per-row max shift: terms are
    exponentiated relative to the row maximum so the mantissa sum stays O(1).
    """
    r = ctx.r
    lf, sf = ctx.logfact, ctx.signfact
    A = np.asarray(colors, dtype=np.int64)
    if A.ndim == 1:
        A = A[None, :]
    N = A.shape[0]
    T = np.empty((N, 4), dtype=np.int64)
    for t, (i, j, k) in enumerate(VERTEX_TRIPLES):
        T[:, t] = (A[:, i] + A[:, j] + A[:, k]) >> 1
    Q = np.empty((N, 3), dtype=np.int64)
    for qn, (i, j, k, l) in enumerate(EDGE_QUADS):
        Q[:, qn] = (A[:, i] + A[:, j] + A[:, k] + A[:, l]) >> 1
    kmin = T.max(axis=1)
    # Terms with k >= r-1 vanish ([k+1]! picks up the factor [r] = 0), so the
    # cap at r-2 agrees with the bare min(Q) upper limit.
    kmax = np.minimum(Q.min(axis=1), r - 2)

    delta_log = np.zeros(N)
    delta_quarter = np.zeros(N, dtype=np.int64)
    for i, j, k in VERTEX_TRIPLES:
        x, y, z = A[:, i], A[:, j], A[:, k]
        i1 = (x + y - z) >> 1
        i2 = (y + z - x) >> 1
        i3 = (z + x - y) >> 1
        i4 = ((x + y + z) >> 1) + 1
        delta_log += 0.5 * (lf[i1] + lf[i2] + lf[i3] - lf[i4])
        delta_quarter += (sf[i1] * sf[i2] * sf[i3] * sf[i4] < 0)

    sum_log = np.full(N, -np.inf)
    sum_sign = np.zeros(N)
    width = kmax - kmin
    rows_per_block = max(1, 2_000_000 // (int(width.max(initial=0)) + 1))
    for lo in range(0, N, rows_per_block):
        sl = slice(lo, min(N, lo + rows_per_block))
        wm = int(width[sl].max())
        K = kmin[sl, None] + np.arange(wm + 1, dtype=np.int64)[None, :]
        valid = K <= kmax[sl, None]
        K = np.where(valid, K, kmin[sl, None])
        term_log = lf[K + 1].copy()
        term_sign = sf[K + 1] * np.where(K & 1, -1.0, 1.0)
        for t in range(4):
            idx = K - T[sl, t][:, None]
            term_log -= lf[idx]
            term_sign = term_sign * sf[idx]
        for qn in range(3):
            idx = Q[sl, qn][:, None] - K
            term_log -= lf[idx]
            term_sign = term_sign * sf[idx]
        term_log[~valid] = -np.inf
        m = term_log.max(axis=1)
        mant = np.where(valid, term_sign * np.exp(term_log - m[:, None]), 0.0).sum(axis=1)
        nz = mant != 0.0
        sum_log[sl] = np.where(nz, m + np.log(np.abs(np.where(nz, mant, 1.0))), -np.inf)
        sum_sign[sl] = np.where(nz, np.sign(mant), 0.0)

    log_mag = delta_log + sum_log
    quarter = (-A.sum(axis=1) + delta_quarter + 2 * (sum_sign < 0)) % 4
    return log_mag, quarter


def sixj(ctx: RootContext, colors: Coloring6, compensated: bool = False) -> PhaseLog:
    """Quantum 6j-symbol of an admissible 6-tuple.

    ``compensated`` switches the k-sum to scalar Neumaier accumulation; the
    default vectorized path is plenty for the non-pathological colorings.
    """
    a = tuple(int(v) for v in colors)
    if not admissible_six(ctx, a):
        raise ValueError(f"sixj: {a} is not an admissible 6-tuple for r={ctx.r}")
    if not compensated:
        log_mag, quarter = sixj_batch(ctx, np.array([a], dtype=np.int64))
        if log_mag[0] == -math.inf:
            return PhaseLog.zero_value()
        return PhaseLog.make(float(log_mag[0]), float(quarter[0]) * HALF_PI)

    T = [(a[i] + a[j] + a[k]) // 2 for i, j, k in VERTEX_TRIPLES]
    Q = [(a[i] + a[j] + a[k] + a[l]) // 2 for i, j, k, l in EDGE_QUADS]
    acc = SignedAccumulator(compensated=True)
    for k in range(max(T), min(min(Q), ctx.r - 2) + 1):
        term = quantum_factorial(ctx, k + 1)
        if k % 2:
            term = SignedLog(-term.sign, term.log_mag)
        sign, log_mag = term.sign, term.log_mag
        for t in T:
            f = quantum_factorial(ctx, k - t)
            sign *= f.sign
            log_mag -= f.log_mag
        for q in Q:
            f = quantum_factorial(ctx, q - k)
            sign *= f.sign
            log_mag -= f.log_mag
        acc.add(sign, log_mag)
    ksum = acc.total()
    if ksum.sign == 0:
        return PhaseLog.zero_value()
    quarter = -sum(a) + 2 * (ksum.sign < 0)
    delta_log = 0.0
    for i, j, k in VERTEX_TRIPLES:
        d = triangle_factor(ctx, a[i], a[j], a[k])
        delta_log += d.log_mag
        quarter += round(d.phase / HALF_PI)
    return PhaseLog.make(delta_log + ksum.log_mag, (quarter % 4) * HALF_PI)


def dft_kernel(ctx: RootContext, a: int, b: int) -> float:
    """The transform kernel (-1)^(a+b) * [(a+1)(b+1)], a real number."""
    r = ctx.r
    if not (0 <= a <= r - 2 and 0 <= b <= r - 2):
        raise ValueError(f"dft_kernel: colors ({a},{b}) outside [0, {r - 2}]")
    sign = -1.0 if (a + b) % 2 else 1.0
    return sign * math.sin(TWO_PI * (a + 1) * (b + 1) / r) / ctx.sin_base


def dft_kernel_tables(ctx: RootContext, b: int) -> tuple[np.ndarray, np.ndarray]:
    """(log|H(a,b)|, sign H(a,b)) for a = 0..r-2 at fixed b; zeros get log -inf."""
    r = ctx.r
    if not 0 <= b <= r - 2:
        raise ValueError(f"dft_kernel_tables: b={b} outside [0, {r - 2}]")
    a = np.arange(r - 1)
    val = np.where((a + b) % 2 == 1, -1.0, 1.0) * np.sin(TWO_PI * (a + 1) * (b + 1) / r) / ctx.sin_base
    # (a+1)(b+1) = 0 mod r makes the kernel vanish exactly for composite r
    near_zero = np.isclose(np.sin(TWO_PI * (a + 1) * (b + 1) / r), 0.0, atol=1e-14)
    with np.errstate(divide="ignore"):
        log_mag = np.where(near_zero, -np.inf, np.log(np.abs(np.where(near_zero, 1.0, val))))
    sign = np.where(near_zero, 0.0, np.sign(val))
    return log_mag, sign
