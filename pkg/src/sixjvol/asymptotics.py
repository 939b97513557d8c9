"""Growth-rate verification: coloring sequences, transform runs over odd r,
and finite-size extrapolation of the scaled logarithm toward twice the volume.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import TetraSpec, deep_angles, volume
from .qcore import RootContext
from .transform import DftInput, dft_tetra, dft_tetra_mp

PI = math.pi

# doubles resolve signed cancellation down to roughly e^-25 below the peak
# term; past that the sum returns its rounding-noise floor
DOUBLE_DEPTH_LIMIT = 22.0


def required_dps(depth: float) -> int:
    """Working digits needed to resolve a cancellation of ``depth`` e-folds."""
    return max(30, int(depth / math.log(10.0)) + 25)


def _evaluate(inp: DftInput, precision, depth: float, threads):
    """Route one transform evaluation by the requested precision policy."""
    if precision == "auto":
        if depth <= DOUBLE_DEPTH_LIMIT:
            return dft_tetra(inp, threads=threads)
        return dft_tetra_mp(inp, dps=required_dps(depth))
    if precision == "double":
        return dft_tetra(inp, threads=threads)
    if precision == "compensated":
        return dft_tetra(inp, threads=threads, compensated=True)
    if isinstance(precision, int) and not isinstance(precision, bool):
        return dft_tetra_mp(inp, dps=precision)
    raise ValueError(f"precision must be 'auto', 'double', 'compensated' or an "
                     f"integer digit count, got {precision!r}")


COLORING_RULES = ("half", "quarter-doubled", "quarter-raw")

# "half" (floor(r (pi - theta) / 2pi)) tracks the limit condition directly but
# produces odd fixed colors whose vertex parities can kill the whole admissible
# set; the even-valued quarter-doubled rule never does, so it is the default.
DEFAULT_COLORING_RULE = "quarter-doubled"


def coloring_for(r: int, theta: float, rule: str = DEFAULT_COLORING_RULE) -> int:
    """Edge color for angle theta at order r, clamped to [0, r-2].

    All three rules satisfy 2 pi b / r -> pi - theta; they differ by O(1)
    (or by the factor 2 for quarter-raw, kept for comparison only).
    """
    if not 0 <= theta <= PI:
        raise ValueError(f"theta must be in [0, pi], got {theta}")
    if rule == "half":
        b = math.floor(r * (PI - theta) / (2 * PI))
    elif rule == "quarter-doubled":
        b = 2 * math.floor(r * (PI - theta) / (4 * PI))
    elif rule == "quarter-raw":
        b = math.floor(r * (PI - theta) / (4 * PI))
    else:
        raise ValueError(f"unknown coloring rule {rule!r}; options: {COLORING_RULES}")
    return min(max(b, 0), r - 2)


@dataclass(frozen=True)
class RunRecord:
    """One conjecture data point at a single odd r."""

    r: int
    b_deep: tuple[int, ...]
    a_regular: tuple[int, ...]
    log_mag_Y: float
    phase_Y: float
    scaled: float       # (2 pi / r) * log_mag_Y
    target: float       # 2 * volume
    rel_err: float
    wall_time: float

    @property
    def half_scaled(self) -> float:
        return 0.5 * self.scaled

    @property
    def empty(self) -> bool:
        return self.log_mag_Y == -math.inf


def _deep_angle_targets(spec: TetraSpec) -> tuple[float, ...]:
    if spec.angles is not None:
        return spec.angles
    return deep_angles(spec)


def run_conjecture(spec: TetraSpec, rule: str = DEFAULT_COLORING_RULE,
                   r_list: Sequence[int] = (), threads: int | None = None,
                   precision="auto") -> list[RunRecord]:
    """Evaluate the transform at rule-derived colorings for each odd r.

    The geometric target 2*Vol is computed once from the input TetraSpec;
    records come back in r order.  Empty admissible sets are recorded with
    log = -inf rather than raising.

    ``precision``: 'auto' estimates the cancellation depth per r (from the
    volume drop relative to zero deep angles) and switches to multiprecision
    where doubles would bottom out on their noise floor; 'double',
    'compensated' or an explicit digit count force one path.
    """
    rs = sorted(int(r) for r in r_list)
    for r in rs:
        if r < 3 or r % 2 == 0:
            raise ValueError(f"r values must be odd and >= 3, got {r}")
    deep_thetas = _deep_angle_targets(spec)
    target = 2.0 * volume(spec)
    if deep_thetas and any(th > 0 for th in deep_thetas):
        zero_deep = TetraSpec(spec.partition, spec.regular_angles,
                              angles=(0.0,) * len(deep_thetas))
        vol_ceiling = volume(zero_deep)
    else:
        vol_ceiling = target / 2.0
    records = []
    for r in rs:
        ctx = RootContext(r)
        b_deep = tuple(coloring_for(r, th, rule) for th in deep_thetas)
        a_regular = tuple(coloring_for(r, th, rule) for th in spec.regular_angles)
        depth = (r / PI) * max(0.0, vol_ceiling - target / 2.0)
        t0 = time.perf_counter()
        res = _evaluate(DftInput(ctx, spec.partition, b_deep, a_regular),
                        precision, depth, threads)
        wall = time.perf_counter() - t0
        if res.value.zero:
            log_mag, phase = -math.inf, 0.0
        else:
            log_mag, phase = res.value.log_mag, res.value.phase
        scaled = (2 * PI / r) * log_mag
        rel_err = abs(scaled - target) / abs(target) if target else math.inf
        records.append(RunRecord(r=r, b_deep=b_deep, a_regular=a_regular,
                                 log_mag_Y=log_mag, phase_Y=phase, scaled=scaled,
                                 target=target, rel_err=rel_err, wall_time=wall))
    return records


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of scaled(r) = L + p log(r)/r + q/r."""

    limit_estimate: float
    coef_logr_over_r: float
    coef_1_over_r: float
    residual_rms: float


def fit_growth(records: Sequence[RunRecord]) -> FitResult:
    """Extrapolate the scaled growth rate with log(r)/r and 1/r corrections."""
    usable = [rec for rec in records if math.isfinite(rec.scaled)]
    rs = sorted({rec.r for rec in usable})
    if len(rs) < 3:
        raise ValueError(f"fit_growth needs records at >= 3 distinct r, got {len(rs)}")
    r = np.array([rec.r for rec in usable], dtype=float)
    y = np.array([rec.scaled for rec in usable])
    X = np.column_stack([np.ones_like(r), np.log(r) / r, 1.0 / r])
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return FitResult(limit_estimate=float(coef[0]), coef_logr_over_r=float(coef[1]),
                     coef_1_over_r=float(coef[2]), residual_rms=rms)


def angle_sweep(r: int, deep_edge: int, thetas: Sequence[float],
                rule: str = DEFAULT_COLORING_RULE, threads: int | None = None,
                precision="auto") -> list[tuple[float, float, float]]:
    """Sweep the single deep angle with all regular angles zero.

    Returns (theta, half_scaled, volume) per grid point, the data behind the
    growth-rate-versus-angle comparison at fixed r.  Large angles cancel
    hundreds of e-folds below the peak term, so 'auto' precision matters here.
    """
    from .transform import DeepPartition

    out = []
    partition = DeepPartition((deep_edge,))
    ctx = RootContext(r)
    vol_ceiling = volume(TetraSpec(partition, (0.0,) * 5, angles=(0.0,)))
    for th in thetas:
        spec = TetraSpec(partition, (0.0,) * 5, angles=(float(th),))
        vol = volume(spec)
        b = (coloring_for(r, th, rule),)
        a = tuple(coloring_for(r, 0.0, rule) for _ in range(5))
        depth = (r / PI) * max(0.0, vol_ceiling - vol)
        res = _evaluate(DftInput(ctx, partition, b, a), precision, depth, threads)
        log_mag = -math.inf if res.value.zero else res.value.log_mag
        out.append((float(th), (PI / r) * log_mag, vol))
    return out
