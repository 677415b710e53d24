"""Quadratic map iteration, Misiurewicz parameters and the exterior distance bracket."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsideM, NoConvergence, NotMisiurewicz

OVERFLOW_GUARD = 1e150
DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class OrbitData:
    """Orbit z_0..z_N of f_c with Df^n(z_0) and dz_n/dc.

    ``truncated_at`` is the first index whose modulus passed the overflow
    guard; the orbit stops there.
    """

    c: complex
    points: tuple
    d_space: tuple
    d_param: Optional[tuple] = None
    truncated_at: Optional[int] = None


def iterate_with_derivatives(c: complex, z0: complex, n: int, want_param: bool = False) -> OrbitData:
    if n < 0:
        raise ValueError("n must be non-negative")
    c = complex(c)
    z = complex(z0)
    dz = 1.0 + 0j
    dc = 0j
    points, d_space, d_param = [z], [dz], [dc]
    truncated = None
    for k in range(n):
        dz, dc = 2.0 * z * dz, 2.0 * z * dc + 1.0
        z = z * z + c
        points.append(z)
        d_space.append(dz)
        d_param.append(dc)
        if abs(z) > OVERFLOW_GUARD:
            truncated = k + 1
            break
    return OrbitData(
        c=c,
        points=tuple(points),
        d_space=tuple(d_space),
        d_param=tuple(d_param) if want_param else None,
        truncated_at=truncated,
    )


def escape_time(c: complex, z: complex, radius: float, max_iter: int) -> Optional[int]:
    """Smallest n <= max_iter with |f_c^n(z)| > radius, or None if the orbit stays inside."""
    r2 = radius * radius
    for n in range(max_iter + 1):
        if z.real * z.real + z.imag * z.imag > r2:
            return n
        z = z * z + c
    return None


def critical_orbit(c: complex, n: int):
    """z_k = f_c^k(0) and dz_k/dc for k = 0..n (stops early on overflow)."""
    zs = [0j]
    ds = [0j]
    z = 0j
    d = 0j
    for _ in range(n):
        d = 2.0 * z * d + 1.0
        z = z * z + c
        zs.append(z)
        ds.append(d)
        if abs(z) > OVERFLOW_GUARD:
            break
    return zs, ds


@dataclass(frozen=True)
class MisiurewiczData:
    c_hat: complex
    l: int
    cycle: tuple
    period: int
    multiplier: complex
    p: int


def _misiurewicz_residual(c: complex, l: int, p: int):
    zs, ds = critical_orbit(c, l + p)
    if len(zs) < l + p + 1:
        return math.inf, 0j
    F = zs[l + p] - zs[l]
    dF = ds[l + p] - ds[l]
    if not (math.isfinite(F.real) and math.isfinite(F.imag)):
        return math.inf, 0j
    return F, dF


def solve_misiurewicz(l: int, p: int, seed: complex, tol: float = DEFAULT_TOL,
                      max_iter: int = 200) -> complex:
    """Newton root of f_c^{l+p}(0) - f_c^l(0) near ``seed``, validated for minimality."""
    if l < 1 or p < 1:
        raise ValueError("l and p must be positive")
    c = complex(seed)
    F, dF = _misiurewicz_residual(c, l, p)
    converged = False
    for _ in range(max_iter):
        if abs(F) < tol:
            converged = True
            break
        if dF == 0:
            raise NoConvergence(f"zero derivative at c={c}")
        step = F / dF
        for _ in range(21):
            trial = c - step
            Ft, dFt = _misiurewicz_residual(trial, l, p)
            if abs(Ft) < abs(F):
                break
            step *= 0.5
        else:
            raise NoConvergence(f"damped Newton made no progress at c={c}")
        c, F, dF = trial, Ft, dFt
    if not converged:
        raise NoConvergence(f"no root within {max_iter} iterations from seed {seed}")
    # polish to rounding level; stop as soon as the residual stops shrinking
    for _ in range(6):
        if dF == 0 or F == 0:
            break
        trial = c - F / dF
        Ft, dFt = _misiurewicz_residual(trial, l, p)
        if not abs(Ft) < abs(F):
            break
        c, F, dF = trial, Ft, dFt

    data = landing_data(c, tol=10 * tol)
    if data.l != l or p % data.period != 0:
        raise NotMisiurewicz(
            f"root {c} has preperiod {data.l} and period {data.period}, requested ({l}, {p})")
    return c


def landing_data(c_hat: complex, tol: float = DEFAULT_TOL, max_l: int = 64,
                 expansion: float = 3.0) -> MisiurewiczData:
    """Preperiod, repelling cycle and expansion exponent p of a Misiurewicz parameter."""
    zs, _ = critical_orbit(c_hat, 2 * max_l + 1)
    found = None
    for n in range(min(max_l + 1, len(zs))):
        for q in range(1, max_l + 1):
            if n + q >= len(zs):
                break
            if abs(zs[n + q] - zs[n]) < tol:
                found = (n, q)
                break
        if found:
            break
    if found is None:
        raise NotMisiurewicz(f"no cycle detected for c={c_hat} within max_l={max_l}")
    l, period = found
    if l == 0:
        raise NotMisiurewicz(f"critical point of c={c_hat} is periodic (super-attracting)")
    cycle = tuple(zs[l:l + period])
    mult = 1.0 + 0j
    for b in cycle:
        mult *= 2.0 * b
    if not abs(mult) > 1.0:
        raise NotMisiurewicz(f"cycle of c={c_hat} is not repelling (|multiplier|={abs(mult):.3g})")
    m = 1
    while abs(mult) ** m < expansion:
        m += 1
    return MisiurewiczData(c_hat=complex(c_hat), l=l, cycle=cycle, period=period,
                           multiplier=mult, p=m * period)


def _known_points_of_m() -> np.ndarray:
    t = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    w = np.exp(1j * t)
    cardioid = w / 2 - w * w / 4
    disk2 = -1.0 + 0.25 * w
    return np.concatenate([cardioid, disk2, [1j, -1j]])


_M_POINTS = _known_points_of_m()


def _distance_upper_from_known_points(c: complex) -> float:
    # real slice [-2, 1/4] lies in M
    x = min(max(c.real, -2.0), 0.25)
    d = abs(c - x)
    return float(min(d, np.min(np.abs(_M_POINTS - c))))


def mandelbrot_distance_estimate(c: complex, max_iter: int = 100000,
                                 radius: float = 1e20) -> tuple[float, float]:
    """Bracket (lower, upper) of dist(c, M) for c outside M.

    Uses the Koebe-type bounds sinh G / (2 e^G |G'|) <= dist <= 2 sinh G / |G'|
    in the Green function G of M, tightened by M in the closed disk of radius 2
    and by explicit points of M.
    """
    c = complex(c)
    z = 0j
    dz = 0j
    for n in range(1, max_iter + 1):
        dz = 2.0 * z * dz + 1.0
        z = z * z + c
        if abs(z) > radius:
            break
    else:
        raise InsideM(f"critical orbit of c={c} did not escape within {max_iter} iterations")
    scale = 2.0 ** (n - 1)
    G = math.log(abs(z)) / scale
    dG = abs(dz) / (abs(z) * scale)
    lower = math.sinh(G) / (2.0 * math.exp(G) * dG)
    upper = 2.0 * math.sinh(G) / dG
    lower = max(lower, abs(c) - 2.0)
    upper = min(upper, _distance_upper_from_known_points(c))
    return lower, upper
