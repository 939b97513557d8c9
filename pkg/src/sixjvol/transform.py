"""Discrete Fourier transforms of the squared 6j-symbol over the tetrahedral graph.

The transform sums H(a_i, b_i)-weighted squared 6j-symbols over all admissible
extensions of a partial coloring.  Enumeration prunes by parity first (vertex
sums must be even, which pins each unknown's parity class), then by the
triangle inequalities, and the surviving tuples are fed to the vectorized
6j kernel in fixed-size chunks.  Chunk partial sums are combined in index
order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .qcore import (
    EDGE_QUADS,
    PhaseLog,
    RootContext,
    SignedAccumulator,
    VERTEX_TRIPLES,
    admissible_mask,
    dft_kernel_tables,
    sixj_batch,
)

ALL_EDGES = (1, 2, 3, 4, 5, 6)
DEFAULT_CHUNK = 1 << 15


def resolve_threads(threads: int | None) -> int:
    """--threads flag, then SIXJ_THREADS, then a small default."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SIXJ_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class DeepPartition:
    """Partition of the six edges into deep (transformed) and regular (fixed)."""

    deep: tuple[int, ...]

    def __post_init__(self):
        d = tuple(sorted(set(self.deep)))
        if any(e not in ALL_EDGES for e in d):
            raise ValueError(f"deep edges must be among 1..6, got {self.deep}")
        object.__setattr__(self, "deep", d)

    @property
    def regular(self) -> tuple[int, ...]:
        return tuple(e for e in ALL_EDGES if e not in self.deep)

    def __len__(self) -> int:
        return len(self.deep)


@dataclass(frozen=True)
class DftInput:
    """One transform evaluation: kernel colors b on the deep edges, fixed
    colors a on the regular edges, both given in ascending edge order."""

    ctx: RootContext
    partition: DeepPartition
    b_deep: tuple[int, ...]
    a_regular: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "b_deep", tuple(int(v) for v in self.b_deep))
        object.__setattr__(self, "a_regular", tuple(int(v) for v in self.a_regular))
        if len(self.b_deep) != len(self.partition.deep):
            raise ValueError("b_deep length does not match the deep edge set")
        if len(self.a_regular) != len(self.partition.regular):
            raise ValueError("a_regular length does not match the regular edge set")
        hi = self.ctx.r - 2
        for v in (*self.b_deep, *self.a_regular):
            if not 0 <= v <= hi:
                raise ValueError(f"color {v} outside [0, {hi}]")

    def swapped(self) -> "DftInput":
        """Exchange the roles of the two blocks (colors keep their edges)."""
        return DftInput(self.ctx, DeepPartition(self.partition.regular),
                        self.a_regular, self.b_deep)


@dataclass(frozen=True)
class DftResult:
    value: PhaseLog
    empty_sum: bool
    term_count: int

    @property
    def signed_log(self) -> tuple[float, float]:
        """(log|value|, sign) with sign in {-1, 0, +1}; the value is real."""
        if self.value.zero:
            return (-math.inf, 0.0)
        return (self.value.log_mag, 1.0 if abs(self.value.phase) < 1.0 else -1.0)

    @property
    def nonreal_phase(self) -> bool:
        """Sanity flag: phase further than 1e-6 from a multiple of pi."""
        if self.value.zero:
            return False
        return min(abs(self.value.phase), abs(abs(self.value.phase) - math.pi)) > 1e-6


def _parity_classes(fixed: dict[int, int], unknowns: list[int]) -> list[tuple[int, ...]]:
    """Parity assignments of the unknowns that keep every vertex sum even."""
    classes = []
    for bits in range(1 << len(unknowns)):
        par = {e: (bits >> i) & 1 for i, e in enumerate(unknowns)}
        ok = True
        for tr in VERTEX_TRIPLES:
            s = 0
            for e0 in tr:
                e = e0 + 1
                s += fixed[e] if e in fixed else par[e]
            if s % 2:
                ok = False
                break
        if ok:
            classes.append(tuple(par[e] for e in unknowns))
    return classes


@dataclass
class _ChunkPlan:
    """One fixed slice of one parity class's mixed-radix lattice."""

    parities: tuple[int, ...]
    lo: int
    hi: int


def _chunk_plans(sizes_by_class: list[tuple[tuple[int, ...], int]],
                 chunk: int) -> list[_ChunkPlan]:
    plans = []
    for parities, total in sizes_by_class:
        for lo in range(0, total, chunk):
            plans.append(_ChunkPlan(parities, lo, min(total, lo + chunk)))
    return plans


def _eval_chunk(inp: DftInput, unknowns: list[int], plan: _ChunkPlan,
                kernel_logs: dict[int, np.ndarray], kernel_signs: dict[int, np.ndarray],
                compensated: bool) -> tuple[float, float, int]:
    """Sum one lattice chunk; returns (max_log, mantissa, admissible_count)."""
    ctx = inp.ctx
    colors = _chunk_colors(inp, unknowns, plan)
    count = int(colors.shape[0])
    if count == 0:
        return (-math.inf, 0.0, 0)
    log_mag, quarter = sixj_batch(ctx, colors)
    term_log = 2.0 * log_mag
    term_sign = np.where(quarter % 2 == 1, -1.0, 1.0)  # (i^q)^2 = (-1)^q
    for e in inp.partition.deep:
        a = colors[:, e - 1]
        term_log = term_log + kernel_logs[e][a]
        term_sign = term_sign * kernel_signs[e][a]
    finite = np.isfinite(term_log) & (term_sign != 0.0)
    term_log, term_sign = term_log[finite], term_sign[finite]
    if term_log.size == 0:
        return (-math.inf, 0.0, count)
    m = float(term_log.max())
    mant = term_sign * np.exp(term_log - m)
    s = math.fsum(mant.tolist()) if compensated else float(mant.sum())
    return (m, s, count)


def dft_tetra(inp: DftInput, threads: int | None = None,
              compensated: bool = False, chunk: int = DEFAULT_CHUNK) -> DftResult:
    """Transform value as a PhaseLog plus enumeration metadata.

    The value is always real (squared 6j-symbols have phase 0 or pi, kernel
    values are real), so the reported phase is 0 or pi.  An empty admissible
    set yields an exact zero flagged by ``empty_sum``.
    """
    ctx = inp.ctx
    fixed = dict(zip(inp.partition.regular, inp.a_regular))
    unknowns = list(inp.partition.deep)

    # a fully fixed vertex triple that is inadmissible kills every extension
    for tr in VERTEX_TRIPLES:
        edges = [e0 + 1 for e0 in tr]
        if all(e in fixed for e in edges):
            x, y, z = (fixed[e] for e in edges)
            s = x + y + z
            if s % 2 or s > 2 * (ctx.r - 2) or x + y < z or y + z < x or z + x < y:
                return DftResult(PhaseLog.zero_value(), True, 0)

    if not unknowns:
        colors = np.array([[fixed[e] for e in ALL_EDGES]], dtype=np.int64)
        if not admissible_mask(ctx, colors)[0]:
            return DftResult(PhaseLog.zero_value(), True, 0)
        log_mag, quarter = sixj_batch(ctx, colors)
        if not math.isfinite(float(log_mag[0])):
            return DftResult(PhaseLog.zero_value(), False, 1)
        phase = 0.0 if quarter[0] % 2 == 0 else math.pi
        return DftResult(PhaseLog.make(2.0 * float(log_mag[0]), phase), False, 1)

    kernel_logs = {}
    kernel_signs = {}
    for e, b in zip(inp.partition.deep, inp.b_deep):
        kernel_logs[e], kernel_signs[e] = dft_kernel_tables(ctx, b)

    sizes_by_class = []
    for parities in _parity_classes(fixed, unknowns):
        total = 1
        for p in parities:
            total *= len(range(p, ctx.r - 1, 2))
        if total:
            sizes_by_class.append((parities, total))
    plans = _chunk_plans(sizes_by_class, chunk)

    nworkers = resolve_threads(threads)
    if nworkers > 1 and len(plans) > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            partials = list(pool.map(
                lambda pl: _eval_chunk(inp, unknowns, pl, kernel_logs, kernel_signs, compensated),
                plans))
    else:
        partials = [_eval_chunk(inp, unknowns, pl, kernel_logs, kernel_signs, compensated)
                    for pl in plans]

    acc = SignedAccumulator(compensated=compensated)
    count = 0
    for m, s, c in partials:  # fixed chunk order: deterministic reduction
        count += c
        if s != 0.0 and m != -math.inf:
            acc.add(math.copysign(1.0, s), m + math.log(abs(s)))
    total = acc.total()
    if count == 0:
        return DftResult(PhaseLog.zero_value(), True, 0)
    if total.sign == 0:
        return DftResult(PhaseLog.zero_value(), False, count)
    phase = 0.0 if total.sign > 0 else math.pi
    return DftResult(PhaseLog.make(total.log_mag, phase), False, count)


def _chunk_colors(inp: DftInput, unknowns: list[int], plan: _ChunkPlan) -> np.ndarray:
    """Decode one lattice chunk to admissible color rows."""
    ctx = inp.ctx
    r = ctx.r
    ranges = [np.arange(p, r - 1, 2, dtype=np.int64) for p in plan.parities]
    sizes = [len(rg) for rg in ranges]
    idx = np.arange(plan.lo, plan.hi, dtype=np.int64)
    colors = np.empty((len(idx), 6), dtype=np.int64)
    for e, v in zip(inp.partition.regular, inp.a_regular):
        colors[:, e - 1] = v
    rem = idx
    for i in range(len(unknowns) - 1, -1, -1):
        rem, pos = np.divmod(rem, sizes[i])
        colors[:, unknowns[i] - 1] = ranges[i][pos]
    return colors[admissible_mask(ctx, colors)]


_MP_TABLE_CACHE: dict[tuple[int, int], tuple] = {}


def _mp_tables(r: int, dps: int):
    """(sin table, quantum integers, factorials) as mpf lists at dps digits."""
    key = (r, dps)
    if key in _MP_TABLE_CACHE:
        return _MP_TABLE_CACHE[key]
    from mpmath import mp, mpf

    with mp.workdps(dps):
        two_pi = 2 * mp.pi
        base = mp.sin(two_pi / r)
        sin_tab = [mp.sin(two_pi * n / r) for n in range(r)]
        qint = [sin_tab[n % r] / base for n in range(r + 1)]
        fact = [mpf(1)] * r
        for n in range(1, r):
            fact[n] = fact[n - 1] * qint[n]
    if len(_MP_TABLE_CACHE) > 8:
        _MP_TABLE_CACHE.clear()
    _MP_TABLE_CACHE[key] = (sin_tab, qint, fact, base)
    return _MP_TABLE_CACHE[key]


def _sixj_sq_mp(r: int, a, qint, fact):
    """6j^2 as a signed mpf; the k-sum runs by term recurrence, so huge
    magnitudes live in the mpf exponent and cancellation is resolved to the
    working precision."""
    T = [(a[i] + a[j] + a[k]) >> 1 for (i, j, k) in VERTEX_TRIPLES]
    Q = [(a[i] + a[j] + a[k] + a[l]) >> 1 for (i, j, k, l) in EDGE_QUADS]
    kmin, kmax = max(T), min(min(Q), r - 2)
    rad_all = fact[0]  # mpf(1)
    neg = 0
    for (i, j, k) in VERTEX_TRIPLES:
        x, y, z = a[i], a[j], a[k]
        rad = (fact[(x + y - z) >> 1] * fact[(y + z - x) >> 1]
               * fact[(z + x - y) >> 1] / fact[((x + y + z) >> 1) + 1])
        if rad < 0:
            neg += 1
            rad = -rad
        rad_all = rad_all * rad
    term = fact[kmin + 1]
    for t in T:
        term /= fact[kmin - t]
    for q in Q:
        term /= fact[q - kmin]
    if kmin & 1:
        term = -term
    total = term
    for k in range(kmin, kmax):
        ratio = -qint[k + 2]
        for t in T:
            ratio /= qint[k + 1 - t]
        for q in Q:
            ratio *= qint[q - k]
        term = term * ratio
        total = total + term
    quarter = (-sum(a) + neg + (2 if total < 0 else 0)) % 4
    val = rad_all * total * total
    return -val if quarter % 2 else val


def dft_tetra_mp(inp: DftInput, dps: int, chunk: int = DEFAULT_CHUNK) -> DftResult:
    """Arbitrary-precision transform evaluation.

    Needed when the signed sum cancels more than ~25 e-folds below its
    largest term, which happens whenever the kernel colorings select a
    tetrahedron with volume well below the zero-deep-angle maximum; doubles
    then return the rounding noise floor instead of the value.  Runs
    single-threaded (the multiprecision context is process-global, so do not
    call it concurrently); dps should exceed (cancellation depth)/ln 10 plus
    a guard of ~20 digits.
    """
    from mpmath import mp, mpf

    ctx = inp.ctx
    r = ctx.r
    fixed = dict(zip(inp.partition.regular, inp.a_regular))
    unknowns = list(inp.partition.deep)
    for tr in VERTEX_TRIPLES:
        edges = [e0 + 1 for e0 in tr]
        if all(e in fixed for e in edges):
            x, y, z = (fixed[e] for e in edges)
            s = x + y + z
            if s % 2 or s > 2 * (r - 2) or x + y < z or y + z < x or z + x < y:
                return DftResult(PhaseLog.zero_value(), True, 0)

    sin_tab, qint, fact, base = _mp_tables(r, dps)
    bmap = dict(zip(inp.partition.deep, inp.b_deep))
    with mp.workdps(dps):
        total = mpf(0)
        count = 0
        if not unknowns:
            colors = np.array([[fixed[e] for e in ALL_EDGES]], dtype=np.int64)
            if not admissible_mask(ctx, colors)[0]:
                return DftResult(PhaseLog.zero_value(), True, 0)
            total = _sixj_sq_mp(r, tuple(int(v) for v in colors[0]), qint, fact)
            count = 1
        else:
            sizes_by_class = []
            for parities in _parity_classes(fixed, unknowns):
                n = 1
                for p in parities:
                    n *= len(range(p, r - 1, 2))
                if n:
                    sizes_by_class.append((parities, n))
            plans = _chunk_plans(sizes_by_class, chunk)
            for plan in plans:
                rows = _chunk_colors(inp, unknowns, plan)
                count += len(rows)
                for row in rows:
                    a = tuple(int(v) for v in row)
                    y = _sixj_sq_mp(r, a, qint, fact)
                    for e in inp.partition.deep:
                        ai, bi = a[e - 1], bmap[e]
                        h = sin_tab[((ai + 1) * (bi + 1)) % r] / base
                        if (ai + bi) % 2:
                            h = -h
                        y = y * h
                    total = total + y
        if count == 0:
            return DftResult(PhaseLog.zero_value(), True, 0)
        if total == 0:
            return DftResult(PhaseLog.zero_value(), False, count)
        log_mag = float(mp.log(abs(total)))
        phase = 0.0 if total > 0 else math.pi
    return DftResult(PhaseLog.make(log_mag, phase), False, count)


def cancellation_depth(ctx: RootContext, target_volume: float, max_volume: float) -> float:
    """e-folds by which the transform cancels below its largest term:
    (r / pi) * (zero-deep-angle volume - target volume)."""
    return max(0.0, (ctx.r / math.pi) * (max_volume - target_volume))


def duality_factor(ctx: RootContext, deep_count: int) -> float:
    """(r / (2 sin^2(2 pi / r)))^(3 - deep_count)."""
    if not 0 <= deep_count <= 6:
        raise ValueError(f"deep_count must be in 0..6, got {deep_count}")
    base = ctx.r / (2.0 * ctx.sin_base ** 2)
    return base ** (3 - deep_count)


def duality_check(inp: DftInput, threads: int | None = None,
                  compensated: bool = False) -> float:
    """Relative discrepancy of the transform-exchange identity.

    Both orientations are evaluated by direct summation and compared as
    value(b_deep; a_regular) ?= duality_factor(|deep|) * value(a_regular; b_deep).
    Returns 0.0 when both sides vanish.
    """
    lhs = dft_tetra(inp, threads=threads, compensated=compensated)
    rhs = dft_tetra(inp.swapped(), threads=threads, compensated=compensated)
    log_f = (3 - len(inp.partition)) * math.log(inp.ctx.r / (2.0 * inp.ctx.sin_base ** 2))
    l_log, l_sign = lhs.signed_log
    r_log, r_sign = rhs.signed_log
    r_log = r_log + log_f
    if l_sign == 0.0 and r_sign == 0.0:
        return 0.0
    if l_sign == 0.0 or r_sign == 0.0:
        return 1.0
    top = max(l_log, r_log)
    return abs(l_sign * math.exp(l_log - top) - r_sign * math.exp(r_log - top))
