"""Hyperbolic geometry of tetrahedra with deeply truncated edges.

Gram-matrix existence test, dihedral angle / edge length conversion, the
Lobachevsky function and complex dilogarithm, and the critical-point
potentials whose imaginary part carries volume and co-volume.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .transform import DeepPartition

PI = math.pi
TWO_PI = 2.0 * PI
PI2_6 = PI * PI / 6.0

# Edge -> Gram slot (0-based row/column pair); opposite edges pair 1-4, 2-5, 3-6.
EDGE_SLOTS = {1: (0, 1), 2: (0, 2), 3: (1, 2), 4: (2, 3), 5: (1, 3), 6: (0, 3)}
OPPOSITE_EDGE = {1: 4, 2: 5, 3: 6, 4: 1, 5: 2, 6: 3}

# Vertex triples / quads in 1-based edge labels, matching the quantum side.
TRIPLES_1B = ((1, 2, 3), (1, 5, 6), (2, 4, 6), (3, 4, 5))
QUADS_1B = ((1, 2, 4, 5), (1, 3, 4, 6), (2, 3, 5, 6))

SIGNATURE_ZERO_TOL = 1e-10


class GeometryError(Exception):
    """Base class for geometric failures."""


class ExistenceError(GeometryError):
    """The Gram-matrix criterion rejects (or cannot decide) the parameters."""


class BranchTrackError(GeometryError):
    """Root continuation from the all-pi anchor lost the branch."""


class CutError(GeometryError):
    """A dilogarithm argument landed on the branch cut (1, inf)."""


class SolverError(GeometryError):
    """The length-from-angle Newton iteration failed to converge."""


# ---------------------------------------------------------------------------
# special functions


@lru_cache(maxsize=1)
def _bernoulli() -> tuple[float, ...]:
    vals = [Fraction(1), Fraction(-1, 2)]
    for n in range(2, 62):
        if n % 2 == 1:
            vals.append(Fraction(0))
            continue
        s = Fraction(0)
        for k in range(n):
            s += math.comb(n + 1, k) * vals[k]
        vals.append(-s / (n + 1))
    return tuple(float(v) for v in vals)


@lru_cache(maxsize=1)
def _zeta_even() -> tuple[float, ...]:
    # zeta(2k) = (2 pi)^(2k) |B_2k| / (2 (2k)!)
    B = _bernoulli()
    out = [0.0]
    for k in range(1, 31):
        out.append((TWO_PI ** (2 * k)) * abs(B[2 * k]) / (2.0 * math.factorial(2 * k)))
    return tuple(out)


def lobachevsky(theta: float) -> float:
    """Lobachevsky function: odd, pi-periodic, -integral of log|2 sin t|.

    The argument is reduced to (-pi/2, pi/2] and evaluated through the
    log-subtracted power series, which converges geometrically there.
    """
    t = math.fmod(float(theta), PI)
    if t > PI / 2:
        t -= PI
    elif t < -PI / 2:
        t += PI
    x = 2.0 * t
    if x == 0.0:
        return 0.0
    zeta = _zeta_even()
    s = x - x * math.log(abs(x))
    ratio = (x / TWO_PI) ** 2
    term = x
    for k in range(1, 31):
        term *= ratio
        add = zeta[k] * term / (k * (2 * k + 1))
        s += add
        if abs(add) < 1e-17 * abs(s):
            break
    return 0.5 * s


def _dilog_power(z: complex) -> complex:
    total = 0j
    zp = z
    n = 1
    while n < 600:
        add = zp / (n * n)
        total += add
        if abs(add) < 1e-18 * max(abs(total), 0.1):
            break
        zp *= z
        n += 1
    return total


def _dilog_log_series(z: complex) -> complex:
    # Li2 in powers of w = -log(1-z); valid whenever |w| < 2 pi.
    B = _bernoulli()
    w = -cmath.log(1.0 - z)
    total = 0j
    wp = w
    for n in range(0, 60):
        if B[n] != 0.0:
            add = B[n] * wp / math.factorial(n + 1)
            total += add
            if n > 6 and abs(add) < 1e-18 * max(abs(total), 0.1):
                break
        wp = wp * w
    return total


def dilog(z: complex) -> complex:
    """Principal-branch dilogarithm, holomorphic off the cut (1, inf).

    |z| > 1 is folded in by the inversion identity, Re z > 1/2 by reflection
    at 1 - z; what remains converges by power series (small |z|) or the
    log-argument series (annulus near |z| = 1).
    """
    z = complex(z)
    if z == 0:
        return 0j
    if z == 1:
        return complex(PI2_6, 0.0)
    if z.imag == 0.0 and z.real > 1.0:
        raise CutError(f"dilog argument {z.real} lies on the cut (1, inf)")
    if abs(z) > 1.0:
        return -dilog(1.0 / z) - PI2_6 - 0.5 * cmath.log(-z) ** 2
    if z.real > 0.5:
        return PI2_6 - cmath.log(z) * cmath.log(1.0 - z) - dilog(1.0 - z)
    if abs(z) <= 0.5:
        return _dilog_power(z)
    return _dilog_log_series(z)


# ---------------------------------------------------------------------------
# Gram matrix and the existence criterion


@dataclass(frozen=True)
class TetraSpec:
    """A tetrahedron with deep truncation along ``partition.deep``.

    Deep edges carry either hyperbolic lengths or target dihedral angles
    (exactly one of ``lengths``/``angles``); regular edges carry dihedral
    angles in [0, pi], all in ascending edge order.
    """

    partition: DeepPartition
    regular_angles: tuple[float, ...]
    lengths: tuple[float, ...] | None = None
    angles: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "regular_angles", tuple(float(v) for v in self.regular_angles))
        if (self.lengths is None) == (self.angles is None):
            raise ValueError("exactly one of lengths/angles must be given")
        if self.lengths is not None:
            object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
            if len(self.lengths) != len(self.partition.deep):
                raise ValueError("lengths must match the deep edge set")
            if any(v < 0 for v in self.lengths):
                raise ValueError("deep edge lengths must be >= 0")
        else:
            object.__setattr__(self, "angles", tuple(float(v) for v in self.angles))
            if len(self.angles) != len(self.partition.deep):
                raise ValueError("angles must match the deep edge set")
            if any(not 0 <= v < PI for v in self.angles):
                raise ValueError("deep target angles must lie in [0, pi)")
        if len(self.regular_angles) != len(self.partition.regular):
            raise ValueError("regular_angles must match the regular edge set")
        if any(not 0 <= v <= PI for v in self.regular_angles):
            raise ValueError("regular angles must lie in [0, pi]")

    def with_lengths(self, lengths: tuple[float, ...]) -> "TetraSpec":
        return TetraSpec(self.partition, self.regular_angles, lengths=lengths)


def gram_matrix(spec: TetraSpec) -> np.ndarray:
    """4x4 Gram matrix: unit diagonal, -cosh(length) at deep slots,
    -cos(angle) at regular slots."""
    if spec.lengths is None:
        raise ValueError("gram_matrix needs a lengths-mode TetraSpec")
    c = {}
    for e, l in zip(spec.partition.deep, spec.lengths):
        c[e] = math.cosh(l)
    for e, th in zip(spec.partition.regular, spec.regular_angles):
        c[e] = math.cos(th)
    G = np.eye(4)
    for e, (s, t) in EDGE_SLOTS.items():
        G[s, t] = G[t, s] = -c[e]
    return G


def cofactor(G: np.ndarray, s: int, t: int) -> float:
    minor = np.delete(np.delete(G, s, axis=0), t, axis=1)
    return float((-1) ** (s + t) * np.linalg.det(minor))


def tetra_exists(G: np.ndarray, zero_tol: float = SIGNATURE_ZERO_TOL) -> bool | None:
    """Signature (3,1) with positive off-diagonal and negative diagonal cofactors.

    Returns True/False, or None when an eigenvalue sits within ``zero_tol``
    of zero and the signature is genuinely undecidable.
    """
    eig = np.linalg.eigvalsh(np.asarray(G, dtype=float))
    if np.any(np.abs(eig) < zero_tol):
        return None
    if not (np.sum(eig > 0) == 3 and np.sum(eig < 0) == 1):
        return False
    for s in range(4):
        if cofactor(G, s, s) >= 0:
            return False
        for t in range(s + 1, 4):
            if cofactor(G, s, t) <= 0:
                return False
    return True


def deep_angles(spec: TetraSpec) -> tuple[float, ...]:
    """Dihedral angles at the deep edges of a lengths-mode tetrahedron.

    For edge i at slot (s,t) with opposite slot (u,v), cos(theta) is the
    cofactor ratio G_uv/sqrt(G_uu G_vv); the sine comes from the cofactor
    identity G_uu G_vv - G_uv^2 = det(G) (1 - cosh^2 l) so the angle is
    computed by atan2 and stays accurate down to theta = 0.
    """
    G = gram_matrix(spec)
    verdict = tetra_exists(G)
    if verdict is not True:
        raise ExistenceError(f"Gram criterion verdict {verdict!r}; no tetrahedron for {spec}")
    det = float(np.linalg.det(G))
    neg_det = -det
    if neg_det < -1e-12:
        raise GeometryError(f"unexpected positive determinant {det}")
    neg_det = max(neg_det, 0.0)
    out = []
    for e, l in zip(spec.partition.deep, spec.lengths):
        u, v = EDGE_SLOTS[OPPOSITE_EDGE[e]]
        guv = cofactor(G, u, v)
        out.append(math.atan2(math.sinh(l) * math.sqrt(neg_det), guv))
    return tuple(out)


def lengths_from_angles(spec: TetraSpec, tol: float = 1e-10,
                        max_iter: int = 100) -> tuple[float, ...]:
    """Invert deep_angles by damped Newton iteration.

    Starts from l = theta (the map is near-identity for small parameters)
    and halves the step until the residual decreases; a short continuation
    ramp retries harder targets.  Raises SolverError on non-convergence and
    ExistenceError if the converged point fails the criterion.
    """
    if spec.angles is None:
        raise ValueError("lengths_from_angles needs an angles-mode TetraSpec")
    target = np.array(spec.angles, dtype=float)
    nd = len(target)
    if nd == 0:
        return ()

    def residual(lengths: np.ndarray) -> np.ndarray:
        probe = spec.with_lengths(tuple(lengths))
        return np.array(deep_angles(probe)) - target

    def solve_for(tgt: np.ndarray, start: np.ndarray) -> np.ndarray:
        l = start.copy()
        nonlocal_spec = TetraSpec(spec.partition, spec.regular_angles, angles=tuple(tgt))

        def res(lv):
            return np.array(deep_angles(nonlocal_spec.with_lengths(tuple(lv)))) - tgt

        r = res(l)
        for _ in range(max_iter):
            if np.max(np.abs(r)) <= tol:
                return l
            J = np.empty((nd, nd))
            h = 1e-7
            for k in range(nd):
                lp = l.copy()
                lp[k] += h
                J[:, k] = (res(lp) - r) / h
            try:
                step = np.linalg.solve(J, r)
            except np.linalg.LinAlgError as exc:
                raise SolverError(f"singular Jacobian at lengths {l}") from exc
            lam = 1.0
            base = np.max(np.abs(r))
            while lam > 1e-8:
                cand = np.maximum(l - lam * step, 0.0)
                try:
                    rc = res(cand)
                except GeometryError:
                    lam /= 2
                    continue
                if np.max(np.abs(rc)) < base:
                    l, r = cand, rc
                    break
                lam /= 2
            else:
                raise SolverError(f"no descent direction at lengths {l}")
        if np.max(np.abs(r)) <= tol:
            return l
        raise SolverError(f"no convergence after {max_iter} iterations (residual {r})")

    start = np.maximum(target.copy(), 0.0)
    try:
        sol = solve_for(target, start)
    except (SolverError, ExistenceError):
        # continuation: walk the target up from an easier configuration
        sol = np.maximum(0.5 * target, 0.0)
        for frac in (0.25, 0.5, 0.75, 1.0):
            sol = solve_for(frac * target, sol)
    final = spec.with_lengths(tuple(sol))
    if tetra_exists(gram_matrix(final)) is not True:
        raise ExistenceError(f"converged lengths {sol} fail the Gram criterion")
    return tuple(float(v) for v in sol)


# ---------------------------------------------------------------------------
# potentials


def is_hyperideal(alphas, tol: float = 1e-9) -> bool:
    """True when every vertex triple satisfies 0 <= x+y-z <= 2 pi and
    2 pi <= x+y+z <= 4 pi (real parts for complex input)."""
    a = {i + 1: complex(v).real for i, v in enumerate(alphas)}
    for (i, j, k) in TRIPLES_1B:
        for (x, y, z) in ((i, j, k), (j, k, i), (k, i, j)):
            if not -tol <= a[x] + a[y] - a[z] <= TWO_PI + tol:
                return False
        s = a[i] + a[j] + a[k]
        if not TWO_PI - tol <= s <= 2 * TWO_PI + tol:
            return False
    return True


@dataclass(frozen=True)
class PotentialPoint:
    """Six angle-like parameters plus the auxiliary variable.

    Carries the vertex half-sums (over the four triples) and quad half-sums
    (over the three opposite-edge quadrilaterals) the potentials are built
    from.
    """

    alphas: tuple[complex, ...]
    xi: complex
    vertex_half_sums: tuple[complex, ...] = None  # type: ignore[assignment]
    quad_half_sums: tuple[complex, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        a = tuple(complex(v) for v in self.alphas)
        if len(a) != 6:
            raise ValueError("PotentialPoint needs six parameters")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "xi", complex(self.xi))
        by_edge = {i + 1: a[i] for i in range(6)}
        object.__setattr__(self, "vertex_half_sums",
                           tuple(sum(by_edge[e] for e in tr) / 2.0 for tr in TRIPLES_1B))
        object.__setattr__(self, "quad_half_sums",
                           tuple(sum(by_edge[e] for e in q) / 2.0 for q in QUADS_1B))

    @property
    def strip(self) -> tuple[float, float]:
        lo = max(t.real for t in self.vertex_half_sums)
        hi = min(min(e.real for e in self.quad_half_sums), TWO_PI)
        return (lo, hi)

    @property
    def in_strip(self) -> bool:
        lo, hi = self.strip
        return lo - 1e-12 <= self.xi.real <= hi + 1e-12


def _triangle_lob(x: float, y: float, z: float) -> float:
    return (-0.5 * lobachevsky((x + y - z) / 2.0)
            - 0.5 * lobachevsky((y + z - x) / 2.0)
            - 0.5 * lobachevsky((z + x - y) / 2.0)
            + 0.5 * lobachevsky((x + y + z) / 2.0))


def real_potential(p: PotentialPoint) -> float:
    """The Lobachevsky-sum potential; at the critical xi its value is the
    volume of the associated (hyper)ideal tetrahedron."""
    a = [v.real for v in p.alphas]
    if any(abs(v.imag) > 1e-12 for v in p.alphas) or abs(p.xi.imag) > 1e-12:
        raise ValueError("real_potential expects real parameters")
    if not is_hyperideal(a):
        raise ValueError(f"parameters {a} are not of hyperideal type")
    xi = p.xi.real
    by_edge = {i + 1: a[i] for i in range(6)}
    val = sum(_triangle_lob(*(by_edge[e] for e in tr)) for tr in TRIPLES_1B)
    val -= lobachevsky(xi)
    val += sum(lobachevsky(xi - t.real) for t in p.vertex_half_sums)
    val += sum(lobachevsky(e.real - xi) for e in p.quad_half_sums)
    return val


def complex_potential(p: PotentialPoint) -> complex:
    """The dilogarithm potential; on real hyperideal points it equals
    2 pi^2 + 2i * real_potential."""
    t = p.vertex_half_sums
    e = p.quad_half_sums
    xi = p.xi
    val: complex = PI * PI
    val += 0.5 * sum((ej - ti) ** 2 for ti in t for ej in e)
    val -= 0.5 * sum((ti - PI) ** 2 for ti in t)
    val += (xi - PI) ** 2
    val -= sum((xi - ti) ** 2 for ti in t)
    val -= sum((ej - xi) ** 2 for ej in e)
    val -= 2.0 * PI2_6
    try:
        val -= 0.5 * sum(dilog(cmath.exp(2j * (ej - ti))) for ti in t for ej in e)
        val += 0.5 * sum(dilog(cmath.exp(2j * (ti - PI))) for ti in t)
        val -= dilog(cmath.exp(2j * (xi - PI)))
        val += sum(dilog(cmath.exp(2j * (xi - ti))) for ti in t)
        val += sum(dilog(cmath.exp(2j * (ej - xi))) for ej in e)
    except CutError as exc:
        raise CutError(f"potential hit the dilog cut at point {p}: {exc}") from exc
    return val


def complex_potential_xi_derivative(p: PotentialPoint) -> complex:
    """Closed-form d/dxi of the dilogarithm potential (log-sine ratio form)."""
    t = p.vertex_half_sums
    e = p.quad_half_sums
    xi = p.xi
    num = cmath.sin(-xi)
    for ej in e:
        num *= cmath.sin(ej - xi)
    den = 1.0 + 0j
    for ti in t:
        den *= cmath.sin(xi - ti)
    return 2j * cmath.log(num / den)


# ---------------------------------------------------------------------------
# critical point of the potential


def quad_coefficients(alphas) -> tuple[complex, complex, complex]:
    """Coefficients of the quadratic satisfied by z = e^(-2 i xi) at a
    critical point, in terms of u_i = e^(i alpha_i)."""
    u = [cmath.exp(1j * complex(v)) for v in alphas]
    u1, u2, u3, u4, u5, u6 = u
    A = (u1 * u4 + u2 * u5 + u3 * u6
         - u1 * u2 * u6 - u1 * u3 * u5 - u2 * u3 * u4 - u4 * u5 * u6
         + u1 * u2 * u3 * u4 * u5 * u6)
    B = -((u1 - 1 / u1) * (u4 - 1 / u4) + (u2 - 1 / u2) * (u5 - 1 / u5)
          + (u3 - 1 / u3) * (u6 - 1 / u6))
    C = (1 / (u1 * u4) + 1 / (u2 * u5) + 1 / (u3 * u6)
         - 1 / (u1 * u2 * u6) - 1 / (u1 * u3 * u5) - 1 / (u2 * u3 * u4)
         - 1 / (u4 * u5 * u6) + 1 / (u1 * u2 * u3 * u4 * u5 * u6))
    return A, B, C


@dataclass(frozen=True)
class CriticalData:
    z: complex
    xi: complex
    in_strip: bool


def _track_root(alphas, max_jump: float = 0.1) -> complex:
    """Continue the quadratic root from the all-pi anchor (z = i) along the
    straight parameter segment, halving the step whenever the root moves by
    more than ``max_jump`` in log modulus or the two roots become ambiguous."""
    target = [complex(v) for v in alphas]
    start = [complex(PI, 0.0)] * 6
    z = 1j
    t = 0.0
    dt = 1.0 / 16
    while t < 1.0 - 1e-15:
        t_next = min(1.0, t + dt)
        a = [s + t_next * (x - s) for s, x in zip(start, target)]
        A, B, C = quad_coefficients(a)
        if abs(A) < 1e-12:
            raise BranchTrackError(f"quadratic degenerates (|A| < 1e-12) at t={t_next:.4f}")
        disc = B * B - 4.0 * A * C
        s = cmath.sqrt(disc)
        roots = ((-B + s) / (2 * A), (-B - s) / (2 * A))
        if roots[0] == 0 or roots[1] == 0:
            raise BranchTrackError(f"vanishing root at t={t_next:.4f}")
        d = [abs(cmath.log(rt / z)) for rt in roots]
        near = min(d)
        pick = roots[0] if d[0] <= d[1] else roots[1]
        root_gap = abs(cmath.log(roots[0] / roots[1])) if roots[0] != roots[1] else 0.0
        if near > max_jump or (root_gap < 2 * near and root_gap > 0):
            dt /= 2
            if dt < 1e-10:
                raise BranchTrackError(
                    f"cannot separate roots near t={t_next:.6f}; discriminant {disc:.3e}")
            continue
        z = pick
        t = t_next
        dt = min(2 * dt, 1.0 / 8)
    return z


def critical_point(alphas) -> CriticalData:
    """Critical value of the auxiliary variable for the given parameters.

    The log branch adds the pi-multiple that lands Re xi inside the strip
    (max vertex half-sum, min(quad half-sums, 2 pi)) when possible;
    otherwise the closest representative is returned with in_strip False.
    """
    a = [complex(v) for v in alphas]
    if not is_hyperideal(a):
        raise ValueError("critical_point requires hyperideal real parts")
    z = _track_root(a)
    xi0 = 0.5j * cmath.log(z)  # determined mod pi
    point0 = PotentialPoint(tuple(a), xi0)
    lo, hi = point0.strip
    chosen = None
    for k in range(-4, 9):
        cand = xi0 + k * PI
        if lo - 1e-9 <= cand.real <= hi + 1e-9:
            chosen = cand
            break
    in_strip = chosen is not None
    if chosen is None:
        mid = 0.5 * (lo + hi)
        k = min(range(-4, 9), key=lambda kk: abs((xi0 + kk * PI).real - mid))
        chosen = xi0 + k * PI
    return CriticalData(z=z, xi=chosen, in_strip=in_strip)


def critical_potential(alphas) -> complex:
    """The dilogarithm potential evaluated at its critical point."""
    crit = critical_point(alphas)
    if not crit.in_strip:
        raise GeometryError(f"critical point {crit.xi} escaped the strip for {alphas}")
    return complex_potential(PotentialPoint(tuple(complex(v) for v in alphas), crit.xi))


# ---------------------------------------------------------------------------
# volume and co-volume


def _complexified_alphas(spec: TetraSpec, lengths: tuple[float, ...]) -> tuple[complex, ...]:
    by_edge: dict[int, complex] = {}
    for e, l in zip(spec.partition.deep, lengths):
        by_edge[e] = complex(PI, l)
    for e, th in zip(spec.partition.regular, spec.regular_angles):
        by_edge[e] = complex(PI + th, 0.0)
    return tuple(by_edge[e] for e in range(1, 7))


def covolume(spec: TetraSpec) -> float:
    """Im(W)/2 at the complexified point (pi + i l on deep edges)."""
    if spec.lengths is None:
        raise ValueError("covolume needs a lengths-mode TetraSpec")
    verdict = tetra_exists(gram_matrix(spec))
    if verdict is not True:
        raise ExistenceError(f"Gram criterion verdict {verdict!r} for {spec}")
    W = critical_potential(_complexified_alphas(spec, spec.lengths))
    return W.imag / 2.0


def volume(spec: TetraSpec) -> float:
    """Hyperbolic volume of the tetrahedron described by ``spec``.

    Lengths mode subtracts the length-angle pairing from the co-volume;
    angle mode first solves for the lengths.  Without deep edges the volume
    is the critical value of the Lobachevsky-sum potential.
    """
    if len(spec.partition.deep) == 0:
        alphas = tuple(PI + th for th in spec.regular_angles)
        crit = critical_point(alphas)
        if not crit.in_strip:
            raise GeometryError("critical point escaped the strip")
        return real_potential(PotentialPoint(tuple(complex(v) for v in alphas), crit.xi.real))
    if spec.lengths is not None:
        lengths = spec.lengths
        work = spec
    else:
        lengths = lengths_from_angles(spec)
        work = spec.with_lengths(lengths)
    thetas = deep_angles(work)
    cov = covolume(work)
    return cov - 0.5 * sum(th * l for th, l in zip(thetas, lengths))
