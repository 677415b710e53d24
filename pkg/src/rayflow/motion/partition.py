"""The curve through 0 made of the two rays of angles theta/2 and (theta+1)/2.

It is built as the full preimage z = +-sqrt(w - c) of the ray R_c(theta)
from infinity down to the critical value c (c on the parameter ray) or to
its landing point (c = c_hat). The curve is symmetric under z -> -z, so the
two roots of w - c always lie on opposite sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..angles import ExactAngle
from ..boettcher import green_potential, trace_dynamic_ray

SNAP = 1e-9
CHUNK = 1024


@dataclass(frozen=True)
class PartitionCurve:
    c: complex
    theta: ExactAngle
    branch: np.ndarray  # one half of the curve, ordered from far out to 0 (inclusive)
    potentials: np.ndarray  # potentials of the image points w on R_c(theta)
    on_ray: bool  # c strictly outside M on the parameter ray
    log_r: np.ndarray  # log|u| along the branch, increasing (0 excluded)
    phi: np.ndarray  # continuous argument of the branch at those radii
    monotone: bool  # |u| strictly monotone, so the curve is a polar graph

    @property
    def branch_angles(self) -> tuple[ExactAngle, ExactAngle]:
        return self.theta.halves()

    @property
    def polyline(self) -> np.ndarray:
        """Full curve: one branch in to 0 then the mirror branch back out."""
        return np.concatenate([self.branch, -self.branch[-2::-1]])

    def branches(self) -> tuple[np.ndarray, np.ndarray]:
        """(ray theta/2, ray (theta+1)/2) as point arrays from far out to 0."""
        a = self.branch
        far = a[0]
        t0 = float(self.theta) / 2.0
        # decide which half carries angle theta/2 by the argument of the outer end
        ang = (np.angle(far) / (2 * np.pi)) % 1.0
        d = min(abs(ang - t0), 1 - abs(ang - t0))
        return (a, -a) if d < 0.25 else (-a, a)


def _refined_potentials(g_c: float, levels: int = 40, per_halving: int = 4) -> np.ndarray:
    k = np.arange(1, levels * per_halving + 1)
    return g_c * (1.0 + 2.0 ** (-k / per_halving))


def build_partition(c: complex, theta: ExactAngle, g_min: float = 1e-6, steps_per_halving: int = 8,
                    landing: complex | None = None, bound: float | None = None) -> PartitionCurve:
    """Partition curve for c on R_M(theta), or for its landing point when ``landing`` is given.

    For c outside M the image ray R_c(theta) is traced down to G(c), where it
    reaches c itself; extra samples cluster towards that end so the curve is
    finely resolved near 0. For c in M (the landing parameter) the image ray
    is traced to ``g_min`` and closed at ``landing`` (= c).
    """
    c = complex(c)
    # a Misiurewicz c in floating point eventually "escapes" with a tiny potential
    g_c = green_potential(c, c) if landing is None else 0.0
    if g_c > 1e-16:
        extra = _refined_potentials(g_c)
        ray = trace_dynamic_ray(c, theta, g_c, steps_per_halving, extra=extra)
        w = ray.points.copy()
        w[-1] = c
        pots = ray.potentials
    else:
        ray = trace_dynamic_ray(c, theta, g_min, steps_per_halving)
        end = c if landing is None else complex(landing)
        w = np.append(ray.points, end)
        pots = np.append(ray.potentials, 0.0)
    # image samples closer to c than this are rounding noise after the square root
    keep = np.abs(w - c) > 1e-11 * (1.0 + abs(c))
    keep[-1] = True
    w, pots = w[keep], pots[keep]
    u = np.sqrt(w - c)
    # continuous choice of root along the ray
    for k in range(1, len(u)):
        if abs(u[k] + u[k - 1]) < abs(u[k] - u[k - 1]):
            u[k] = -u[k]
    u[-1] = 0j
    if bound is None:
        bound = 3.0 + abs(c)
    far = np.nonzero(np.abs(u) <= 4.0 * bound)[0]
    start = max(int(far[0]) - 1, 0) if len(far) else 0
    u, pots = u[start:], pots[start:]
    r = np.abs(u[:-1])[::-1]
    phi = np.unwrap(np.angle(u[:-1]))[::-1]
    monotone = bool(np.all(np.diff(r) > 0))
    return PartitionCurve(c=c, theta=theta, branch=u, potentials=pots, on_ray=g_c > 1e-16,
                          log_r=np.log(r), phi=phi, monotone=monotone)


def _orient(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def _polar_offset(part: PartitionCurve, z: np.ndarray) -> np.ndarray:
    """Angle of z past the branch at radius |z|, reduced to [0, 2 pi)."""
    lr = np.log(np.maximum(np.abs(z), 1e-300))
    ph = np.interp(lr, part.log_r, part.phi)
    return (np.angle(z) - ph) % (2.0 * np.pi)


def classify_codes(part: PartitionCurve, zs, snap: float = SNAP, exact: bool = False) -> np.ndarray:
    """Side codes for many points: 0 (side of c), 1 (other side), 2 (on the curve, i.e. *).

    When the curve is a polar graph (|u| monotone along each branch) a point's
    side is read off from its argument relative to the branch at the same
    radius. Otherwise, or with ``exact``, segment crossings between z and c
    are counted.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if part.monotone and not exact:
        d = _polar_offset(part, zs)
        dc = _polar_offset(part, np.array([part.c]))[0]
        code = ((d < np.pi) != (dc < np.pi)).astype(np.int8)
        near = np.abs(zs) * np.minimum(np.abs(np.sin(d)), 1.0) < snap
        code[near | (np.abs(zs) < snap)] = 2
        return code
    return _crossing_codes(part, zs, snap)


def _crossing_codes(part: PartitionCurve, zs: np.ndarray, snap: float) -> np.ndarray:
    P = part.polyline
    ax, ay = P[:-1].real, P[:-1].imag
    bx, by = P[1:].real, P[1:].imag
    ex, ey = bx - ax, by - ay
    seg2 = ex * ex + ey * ey
    cx, cy = part.c.real, part.c.imag
    o_c = _orient(ax, ay, bx, by, cx, cy)
    out = np.empty(len(zs), dtype=np.int8)
    for lo in range(0, len(zs), CHUNK):
        z = zs[lo:lo + CHUNK]
        px, py = z.real[:, None], z.imag[:, None]
        o_z = _orient(ax, ay, bx, by, px, py)
        o_a = _orient(px, py, cx, cy, ax, ay)
        o_b = _orient(px, py, cx, cy, bx, by)
        cross = ((o_z > 0) != (o_c > 0)) & ((o_a > 0) != (o_b > 0))
        parity = np.count_nonzero(cross, axis=1) & 1
        # distance to the polyline
        t = np.clip(((px - ax) * ex + (py - ay) * ey) / seg2, 0.0, 1.0)
        dx, dy = px - (ax + t * ex), py - (ay + t * ey)
        dmin = np.sqrt(np.min(dx * dx + dy * dy, axis=1))
        code = parity.astype(np.int8)
        code[(dmin < snap) | (np.abs(z) < snap)] = 2
        out[lo:lo + CHUNK] = code
    return out


def classify_side(part: PartitionCurve, z: complex, snap: float = SNAP) -> str:
    return "01*"[int(classify_codes(part, [z], snap)[0])]
