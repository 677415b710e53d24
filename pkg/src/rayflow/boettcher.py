"""Green potentials, Boettcher coordinates and external rays of z^2 + c.

Rays are traced by Newton continuation: a point at potential g and angle t
solves f^n(z) = exp(2^n (g + 2 pi i t)) (dynamic plane) or z_{n+1}(c) = same
(parameter plane, z_k the critical orbit), with n the smallest depth putting
the target beyond the escape radius. Newton runs on log(F/T) so huge targets
never have to be formed, and the angle 2^n t mod 1 is exact.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .angles import ExactAngle, doubling_orbit
from .errors import NoCauchy, NewtonStall, NotEscaping, OutsideDomain

TWO_PI = 2.0 * math.pi
ESCAPE_RADIUS = 1e4
MAX_NEWTON = 80
MAX_HALVINGS = 20
# residual of log(F/T) accepted when damping can no longer reduce it
NEWTON_FLOOR = 1e-9


# ---------------------------------------------------------------- potentials

def green_potential(c: complex, z: complex, budget: int = 10000, radius: float = 1e10) -> float:
    """G_c(z) = lim 2^-n log|z_n|; 0 if the orbit does not escape within ``budget``."""
    c = complex(c)
    z = complex(z)
    r2 = radius * radius
    for n in range(budget + 1):
        a = z.real * z.real + z.imag * z.imag
        if a > r2:
            # one more factor of the product: log|z^2 + c| = 2 log|z| + log|1 + c/z^2|
            corr = 0.5 * math.log(abs(1.0 + c / (z * z)))
            return (0.5 * math.log(a) + corr) / 2.0 ** n
        z = z * z + c
    return 0.0


def _escaping_orbit(c: complex, z: complex, radius: float, budget: int):
    zs = [z]
    r2 = radius * radius
    for _ in range(budget):
        if z.real * z.real + z.imag * z.imag > r2:
            return zs
        z = z * z + c
        zs.append(z)
    if z.real * z.real + z.imag * z.imag > r2:
        return zs
    return None


def boettcher_levels(c: complex, z: complex, reference: Optional[Sequence[complex]] = None,
                     budget: int = 10000) -> list[complex]:
    """Phi_c(z_k) for the orbit z_0 = z, z_1, ... until escape.

    The deepest level uses the convergent product directly. Shallower levels
    are square roots of the next one. Without ``reference`` the root is the
    one closest to the principal-branch product z_k * prod (1 + c/z_j^2)^(...).
    With ``reference`` (levels of a nearby point on the same ray) the root
    closest in argument to the reference is taken, which continues the
    branch along a path.
    """
    c = complex(c)
    zs = _escaping_orbit(c, complex(z), 1e10, budget)
    if zs is None:
        raise NotEscaping(f"orbit of z={z} under c={c} does not escape")
    w = zs[-1]
    for _ in range(8):
        w = w * w + c
        zs.append(w)
        if abs(c / (w * w)) < 1e-17:
            break
    logs = [cmath.log(1.0 + c / (zk * zk)) for zk in zs]
    N = len(zs) - 1
    tail = 0.5 * logs[N]
    levels = [0j] * (N + 1)
    levels[N] = zs[N] * cmath.exp(tail)
    principal = tail
    for k in range(N - 1, -1, -1):
        principal = 0.5 * logs[k] + 0.5 * principal
        r = cmath.sqrt(levels[k + 1])
        if reference is not None and k < len(reference):
            guide = reference[k]
        else:
            guide = zs[k] * cmath.exp(principal)
        levels[k] = r if abs(r / abs(r) - guide / abs(guide)) <= abs(r / abs(r) + guide / abs(guide)) else -r
    return levels


def boettcher_value(c: complex, z: complex, budget: int = 10000) -> complex:
    """Phi_c(z) = z * prod_k (1 + c/z_k^2)^(1/2^(k+1)) with principal half-logs.

    Defined where G_c(z) > G_c(0); in particular Phi_c(c) is available for
    c outside M. Close to the boundary of that domain the principal branch can
    pick the wrong root; ``boettcher_levels`` with a reference fixes that.
    """
    c = complex(c)
    z = complex(z)
    if _escaping_orbit(c, z, 1e10, budget) is None:
        raise NotEscaping(f"orbit of z={z} under c={c} does not escape")
    g0 = green_potential(c, 0j, budget)
    gz = green_potential(c, z, budget)
    if gz <= g0 * (1.0 + 1e-12):
        raise OutsideDomain(f"G(z)={gz:.6g} is not above G(0)={g0:.6g}")
    return boettcher_levels(c, z, budget=budget)[0]


# ---------------------------------------------------------------- polylines

@dataclass
class RayPolyline:
    angle: ExactAngle
    kind: str  # "dynamic" or "parameter"
    c: Optional[complex]
    potentials: np.ndarray
    points: np.ndarray
    landing: Optional[tuple] = None
    stalled: bool = False
    message: str = ""

    def __len__(self):
        return len(self.potentials)

    def conjugate(self) -> "RayPolyline":
        return replace(
            self,
            angle=self.angle.conjugate(),
            c=None if self.c is None else self.c.conjugate(),
            points=np.conj(self.points),
            landing=None if self.landing is None else (self.landing[0].conjugate(), self.landing[1]),
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["potential", "re", "im"])
            for g, z in zip(self.potentials, self.points):
                w.writerow([repr(float(g)), repr(float(z.real)), repr(float(z.imag))])

    def landing_json(self) -> dict:
        if self.landing is None:
            raise ValueError("polyline has no landing estimate")
        z, err = self.landing
        return {
            "angle": str(self.angle),
            "landing_re": float(z.real),
            "landing_im": float(z.imag),
            "est_error": float(err),
            "n_samples": int(len(self)),
        }


def read_ray_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def write_landing_json(poly: RayPolyline, path) -> None:
    with open(path, "w") as fh:
        json.dump(poly.landing_json(), fh, indent=2)


# ---------------------------------------------------------------- newton

def _depth(g: float, log_r0: float) -> int:
    n = 0
    while g * 2.0 ** n < 2.0 * log_r0:
        n += 1
    return n


def _log_target(t: ExactAngle, g: float, n: int) -> tuple[float, float]:
    """(log modulus, angle in radians in (-pi, pi]) of exp(2^n (g + 2 pi i t))."""
    td = t.double(n)
    num = td.num
    if 2 * num > td.den:
        num -= td.den
    return g * 2.0 ** n, TWO_PI * num / td.den


def _wrap(x: float) -> float:
    return (x + math.pi) % TWO_PI - math.pi


def _dynamic_residual(c: complex, z: complex, n: int, logmod: float, arg: float):
    dz = 1.0 + 0j
    for _ in range(n):
        dz = 2.0 * z * dz
        z = z * z + c
    if not (math.isfinite(abs(z)) and abs(z) > 0):
        return complex(math.inf), 0j
    h = complex(math.log(abs(z)) - logmod, _wrap(cmath.phase(z) - arg))
    return h, dz / z


def _parameter_residual(c: complex, n: int, logmod: float, arg: float):
    z = 0j
    dc = 0j
    for _ in range(n + 1):
        dc = 2.0 * z * dc + 1.0
        z = z * z + c
    if not (math.isfinite(abs(z)) and abs(z) > 0):
        return complex(math.inf), 0j
    h = complex(math.log(abs(z)) - logmod, _wrap(cmath.phase(z) - arg))
    return h, dc / z


def _newton(residual, x0: complex, max_iter: int = MAX_NEWTON) -> complex:
    """Damped Newton on a log-residual; raises NewtonStall on failure."""
    x = x0
    h, dh = residual(x)
    if not math.isfinite(abs(h)):
        raise NewtonStall(f"residual not finite at seed {x0}")
    for _ in range(max_iter):
        if dh == 0:
            raise NewtonStall(f"singular derivative at {x}")
        step = h / dh
        if abs(h) < 1e-15 or abs(step) <= 1e-16 * (1.0 + abs(x)):
            return x - step
        for _ in range(MAX_HALVINGS + 1):
            xt = x - step
            ht, dht = residual(xt)
            if abs(ht) < abs(h):
                break
            step *= 0.5
        else:
            if abs(h) < NEWTON_FLOOR:
                return x  # rounding floor
            raise NewtonStall(f"damping failed at {x} (residual {abs(h):.3g})")
        x, h, dh = xt, ht, dht
    if abs(h) < NEWTON_FLOOR:
        return x
    raise NewtonStall(f"no convergence after {max_iter} iterations at {x} (residual {abs(h):.3g})")


def schedule(g_start: float, g_min: float, steps_per_halving: int,
             extra: Sequence[float] = ()) -> np.ndarray:
    """Potentials g_start * 2^(-k/s) above g_min, then g_min, merged with ``extra``."""
    if g_min <= 0:
        raise ValueError("g_min must be positive")
    k_max = int(math.floor(steps_per_halving * math.log2(g_start / g_min)))
    gs = g_start * 2.0 ** (-np.arange(k_max + 1) / steps_per_halving)
    gs = gs[gs > g_min * (1 + 1e-12)]
    allg = np.concatenate([gs, [g_min], np.asarray(extra, dtype=float)])
    allg = np.unique(allg)[::-1]
    return allg[allg >= g_min * (1 - 1e-12)]


def _trace(kind: str, t: ExactAngle, potentials: np.ndarray, c: Optional[complex],
           seed: Optional[complex] = None, log_r0: float = math.log(ESCAPE_RADIUS)) -> RayPolyline:
    pts = []
    x = seed
    done = []
    for g in potentials:
        n = _depth(g, log_r0)
        logmod, arg = _log_target(t, g, n)
        if x is None:
            x = t.polar(g)
        if kind == "dynamic":
            res = lambda z, n=n, lm=logmod, a=arg: _dynamic_residual(c, z, n, lm, a)
        else:
            res = lambda cc, n=n, lm=logmod, a=arg: _parameter_residual(cc, n, lm, a)
        try:
            x = _newton(res, x)
        except NewtonStall as exc:
            partial = RayPolyline(t, kind, c, np.array(done, dtype=float),
                                  np.array(pts, dtype=complex), stalled=True, message=str(exc))
            raise NewtonStall(f"{kind} ray {t} stalled at potential {g:.3g}: {exc}", partial=partial)
        pts.append(x)
        done.append(g)
    return RayPolyline(t, kind, c, np.array(done, dtype=float), np.array(pts, dtype=complex))


def trace_dynamic_ray(c: complex, t: ExactAngle, g_min: float, steps_per_halving: int = 8,
                      extra: Sequence[float] = ()) -> RayPolyline:
    """Dynamic ray R_c(t) from G0 = log R0 down to g_min."""
    c = complex(c)
    log_r0 = math.log(max(ESCAPE_RADIUS, 2.0 + abs(c)))
    gs = schedule(log_r0, g_min, steps_per_halving, extra)
    return _trace("dynamic", t, gs, c, log_r0=log_r0)


def trace_parameter_ray(theta: ExactAngle, g_min: float, steps_per_halving: int = 8,
                        extra: Sequence[float] = ()) -> RayPolyline:
    """Parameter ray R_M(theta) from G0 = log R0 down to g_min."""
    log_r0 = math.log(ESCAPE_RADIUS)
    gs = schedule(log_r0, g_min, steps_per_halving, extra)
    return _trace("parameter", theta, gs, None, log_r0=log_r0)


def extend_ray(poly: RayPolyline, potentials: Sequence[float]) -> RayPolyline:
    """Continue a traced ray to further (smaller) potentials, seeded by its last sample."""
    potentials = np.asarray(potentials, dtype=float)
    if len(potentials) == 0:
        return poly
    if len(poly) and potentials[0] >= poly.potentials[-1]:
        raise ValueError("extension potentials must continue downward")
    if poly.kind == "dynamic":
        log_r0 = math.log(max(ESCAPE_RADIUS, 2.0 + abs(poly.c)))
    else:
        log_r0 = math.log(ESCAPE_RADIUS)
    tail = _trace(poly.kind, poly.angle, potentials, poly.c, seed=poly.points[-1], log_r0=log_r0)
    return replace(poly, potentials=np.concatenate([poly.potentials, tail.potentials]),
                   points=np.concatenate([poly.points, tail.points]), landing=None)


def polyline_errors(poly: RayPolyline) -> np.ndarray:
    """Relative defect of every sample, recomputed independently of the tracer.

    Dynamic rays: |G_c(z) - g| / g. Parameter rays: |Phi_c(c) - target| / |target|.
    """
    out = np.empty(len(poly))
    ref = None
    for k, (g, x) in enumerate(zip(poly.potentials, poly.points)):
        if poly.kind == "dynamic":
            out[k] = abs(green_potential(poly.c, x) - g) / g
        else:
            # branch of Phi_c(c) continued from the previous sample
            target = poly.angle.polar(g)
            ref = boettcher_levels(x, x, reference=ref)
            out[k] = abs(ref[0] - target) / abs(target)
    return out


# ---------------------------------------------------------------- landing

def geometric_limit(seq: Sequence[complex]) -> tuple[complex, float]:
    """Aitken/geometric extrapolation of the last three terms, with an error estimate."""
    if len(seq) < 2:
        raise ValueError("need at least two terms")
    if len(seq) == 2:
        return seq[-1], abs(seq[-1] - seq[-2])
    a, b, c = seq[-3], seq[-2], seq[-1]
    d1, d2 = b - a, c - b
    if d1 == 0 or d2 == 0:
        return c, abs(d2)
    r = d2 / d1
    if abs(r) >= 1:
        return c, abs(d2)
    lim = c + d2 * r / (1 - r)
    # the next-order term is not modelled; bound it by the last gap scaled by |r|
    err = max(abs(lim - c) * abs(r), abs(d2) * abs(r) ** 2 / (1 - abs(r)), 1e-16 * abs(lim))
    return lim, err


def _land(poly_factory, g0: float, step_pow: int, tol: float, max_terms: int = 80,
          burn_in: int = 4):
    """Sample a ray at g0 / 2^(k * step_pow) until successive gaps drop below tol."""
    poly = None
    seq: list[complex] = []
    gaps: list[float] = []
    ratios: list[float] = []
    for k in range(max_terms):
        g = g0 / 2.0 ** (k * step_pow)
        poly = poly_factory(poly, g)
        seq.append(complex(poly.points[-1]))
        if len(seq) >= 2:
            gaps.append(abs(seq[-1] - seq[-2]))
            if len(gaps) >= 2 and gaps[-2] > 0:
                ratios.append(gaps[-1] / gaps[-2])
            if len(gaps) > burn_in and gaps[-1] >= gaps[-2] and gaps[-1] > tol:
                raise NoCauchy(f"gaps stopped decreasing after {len(seq)} terms "
                               f"({gaps[-2]:.3g} -> {gaps[-1]:.3g})")
            if gaps[-1] < tol and len(seq) >= 3:
                lim, err = geometric_limit(seq)
                return poly, seq, ratios, lim, err
    raise NoCauchy(f"no Cauchy convergence within {max_terms} terms")


def land_parameter_ray(theta: ExactAngle, p: int, r0: float = 2.0, tol: float = 1e-10,
                       steps_per_halving: int = 8):
    """Landing point of R_M(theta) from c_n = Phi_M^-1(r0^(1/2^(np)) e^(2 pi i theta)).

    Returns (c_hat, sequence, gap ratios, error estimate, polyline).
    """
    if r0 <= 1:
        raise ValueError("r0 must exceed 1")
    g0 = math.log(r0)

    def factory(poly, g):
        if poly is None:
            return trace_parameter_ray(theta, g, steps_per_halving)
        gs = schedule(poly.potentials[-1], g, steps_per_halving)[1:]
        return extend_ray(poly, gs)

    poly, seq, ratios, lim, err = _land(factory, g0, p, tol)
    poly = replace(poly, landing=(lim, err))
    return lim, seq, ratios, err, poly


def land_dynamic_ray(c: complex, t: ExactAngle, tol: float = 1e-10, steps_per_halving: int = 8,
                     g0: float = 1.0, guide_potential: float = 1e-4) -> tuple[complex, float, RayPolyline]:
    """Landing point of R_c(t).

    The eventually periodic ray R_c(2^m t) is sampled at potentials g0 / 2^(k q)
    (q its period) and extrapolated; the result is pulled back m times by
    z = +-sqrt(w - c), each sign chosen nearest to the forward orbit of a
    traced sample of R_c(t) at ``guide_potential``. Square roots keep precision
    near the critical point, where tracing itself loses it.
    """
    c = complex(c)
    _, pre, q = doubling_orbit(t)
    s = t.double(pre)

    def factory(poly, g):
        if poly is None:
            return trace_dynamic_ray(c, s, g, steps_per_halving)
        gs = schedule(poly.potentials[-1], g, steps_per_halving)[1:]
        return extend_ray(poly, gs)

    poly, seq, ratios, y, err = _land(factory, g0, q, tol)
    if pre == 0:
        return y, err, replace(poly, landing=(y, err))

    try:
        guide_poly = trace_dynamic_ray(c, t, guide_potential, steps_per_halving)
    except NewtonStall as exc:
        guide_poly = exc.partial
        if guide_poly is None or len(guide_poly) == 0:
            raise
    guide = [complex(guide_poly.points[-1])]
    for _ in range(pre - 1):
        guide.append(guide[-1] * guide[-1] + c)
    for j in range(pre - 1, -1, -1):
        r = cmath.sqrt(y - c)
        y = r if abs(r - guide[j]) <= abs(r + guide[j]) else -r
        # |sqrt(a) - sqrt(b)| <= min(sqrt|a-b|, |a-b| / |sqrt a|)
        err = min(math.sqrt(err), err / abs(y)) if y != 0 else math.sqrt(err)
    return y, err, replace(guide_poly, landing=(y, err))


# ---------------------------------------------------------------- parameter lookup

def parameter_ray_velocity(c: complex, g: float) -> complex:
    """dc/dg on R_M(theta): differentiate z_{n+1}(c) = exp(2^n (g + 2 pi i theta))."""
    n = _depth(g, math.log(ESCAPE_RADIUS))
    z, dc = 0j, 0j
    for _ in range(n + 1):
        dc = 2.0 * z * dc + 1.0
        z = z * z + c
    return 2.0 ** n * z / dc


@dataclass
class ParameterRay:
    """Cached parameter ray used to locate c on R_M(theta) by potential or by distance to c_hat."""

    theta: ExactAngle
    c_hat: complex
    steps_per_halving: int = 8
    poly: Optional[RayPolyline] = None

    def _ensure(self, eps: float):
        if self.poly is None:
            self.poly = trace_parameter_ray(self.theta, 1e-2, self.steps_per_halving)
        while abs(self.poly.points[-1] - self.c_hat) > 0.5 * eps:
            g = self.poly.potentials[-1]
            gs = schedule(g, g / 4.0, self.steps_per_halving)[1:]
            self.poly = extend_ray(self.poly, gs)
            if self.poly.potentials[-1] < 1e-30:
                raise NoCauchy(f"ray {self.theta} does not approach {self.c_hat} within eps={eps}")

    def at_potential(self, g: float) -> complex:
        """Point of the ray at potential g, Newton-seeded from the nearest cached sample."""
        if self.poly is None:
            self._ensure(1.0)
        if g < self.poly.potentials[-1]:
            self.poly = extend_ray(self.poly, schedule(self.poly.potentials[-1], g,
                                                       self.steps_per_halving)[1:])
        k = int(np.argmin(np.abs(np.log(self.poly.potentials / g))))
        tail = _trace("parameter", self.theta, np.array([g]), None, seed=self.poly.points[k])
        return complex(tail.points[0])

    def velocity(self, c: complex, g: float) -> complex:
        """dc/dg along the ray at the point c of potential g."""
        return parameter_ray_velocity(c, g)

    def potential_at_distance(self, eps: float) -> float:
        """Potential g at which |c(g) - c_hat| = eps (first crossing from outside)."""
        from scipy.optimize import brentq

        self._ensure(eps)
        d = np.abs(self.poly.points - self.c_hat)
        idx = int(np.nonzero(d < eps)[0][0])
        if idx == 0:
            raise ValueError(f"eps={eps} exceeds the distance of the first cached sample")
        lo, hi = math.log(self.poly.potentials[idx]), math.log(self.poly.potentials[idx - 1])
        f = lambda s: abs(self.at_potential(math.exp(s)) - self.c_hat) - eps
        s = brentq(f, lo, hi, xtol=1e-14, rtol=1e-13)
        return math.exp(s)

    def at_distance(self, eps: float) -> tuple[complex, float]:
        g = self.potential_at_distance(eps)
        return self.at_potential(g), g
