"""Julia-set points from itineraries, their parameter derivative and their motion along a ray.

A point with itinerary s is the limit of backward orbits: start at an anchor
at level D and apply z_n = +-sqrt(z_{n+1} - c) for n = D-1..0, picking the
root on side s_n of the partition curve. For an eventually periodic s the
anchor is the repelling cycle point with itinerary sigma^D(s), so the chain
is the exact orbit; otherwise it is the fixed point beta(c). The whole
backward chain z_0..z_D is kept; it is the forward orbit of the realized
point to working precision (forward iteration in doubles is not, it expands
rounding errors).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import BranchAmbiguous, DepthInsufficient, Escaped, NoContraction
from ..symbolic import ItinerarySeq
from .partition import PartitionCurve, classify_codes

DEPTH = 60
# |w - c| below this is treated as w = c, so the preimage is exactly 0
CRITICAL_SNAP = 1e-13
MAX_RATIO = 0.95


def beta(c: complex) -> complex:
    """Fixed point (1 + sqrt(1 - 4c)) / 2, principal root."""
    return complex((1.0 + np.sqrt(complex(1.0 - 4.0 * c))) / 2.0)


def symbol_matrix(seqs: Sequence[ItinerarySeq], depth: int) -> np.ndarray:
    rows = []
    for s in seqs:
        word = s.prefix(depth)
        if len(word) < depth:
            raise DepthInsufficient(f"itinerary {s} is shorter than depth {depth}")
        if "*" in word:
            raise ValueError(f"itinerary {s} contains *; realize a 0/1 fiber representative instead")
        rows.append(np.frombuffer(word.encode(), dtype=np.uint8) - 48)
    return np.array(rows, dtype=np.int8).reshape(len(seqs), depth)


@dataclass
class RealizedBatch:
    c: complex
    seqs: list
    chains: np.ndarray  # (N, D+1), chains[:, 0] are the positions
    residuals: np.ndarray
    periods: np.ndarray  # cycle length of the anchor, 0 for the beta anchor
    ambiguity: float = 0.0  # tracking only: worst nearest/farther root distance ratio

    @property
    def positions(self) -> np.ndarray:
        return self.chains[:, 0]

    @property
    def depth(self) -> int:
        return self.chains.shape[1] - 1

    def point(self, k: int) -> "JuliaPoint":
        return JuliaPoint(self.c, self.seqs[k], complex(self.chains[k, 0]), float(self.residuals[k]),
                          chain=self.chains[k].copy(), period=int(self.periods[k]))


@dataclass
class JuliaPoint:
    c: complex
    itinerary: ItinerarySeq
    position: complex
    residual: float
    d_dc: Optional[tuple] = None  # (value, tail_bound)
    chain: Optional[np.ndarray] = field(default=None, repr=False)
    period: int = 0


def _roots(w: np.ndarray, c: complex) -> np.ndarray:
    d = w - c
    u = np.sqrt(d)
    u[np.abs(d) < CRITICAL_SNAP] = 0.0
    return u


def _follow(c: complex, anchor_level: int, guide: np.ndarray) -> np.ndarray:
    """Backward chain from beta(c) at ``anchor_level`` choosing roots nearest to ``guide``."""
    n_pts = guide.shape[0]
    z = np.full(n_pts, beta(c), dtype=complex)
    for n in range(anchor_level - 1, -1, -1):
        u = _roots(z, c)
        g = guide[:, n]
        z = np.where(np.abs(u - g) <= np.abs(u + g), u, -u)
    return z


def _pull_cycle(c: complex, choose, q: int, start: complex, max_cycles: int = 4000) -> complex:
    """Fixed point of the q-fold backward branch; choose(level, u) returns the root to keep."""
    z = start
    for _ in range(max_cycles):
        old = z
        for i in range(q - 1, -1, -1):
            z = choose(i, complex(_roots(np.array([z]), c)[0]))
        if abs(z - old) <= 1e-15 * (1.0 + abs(z)):
            break
    return z


def _cycle_anchors(part: PartitionCurve, seqs: Sequence[ItinerarySeq], depth: int):
    """Per sequence: (period, anchor) with the anchor on the cycle of sigma^depth(s), or (0, beta)."""
    c = part.c
    periods = np.zeros(len(seqs), dtype=int)
    anchors = np.full(len(seqs), beta(c), dtype=complex)
    cache = {}
    for k, s in enumerate(seqs):
        if s.repeat is None or "*" in s.repeat or len(s.head) + len(s.repeat) > depth:
            continue
        word = s.rotated_repeat(depth)
        if word not in cache:
            def choose(i, u, word=word):
                code = int(classify_codes(part, np.array([u]))[0])
                return u if code == 2 or code == int(word[i]) else -u
            cache[word] = _pull_cycle(c, choose, len(word), beta(c))
        periods[k] = len(word)
        anchors[k] = cache[word]
    return periods, anchors


def realize_batch(part: PartitionCurve, seqs: Sequence[ItinerarySeq], depth: int = DEPTH,
                  tol: Optional[float] = 1e-10) -> RealizedBatch:
    """Realize many itineraries at part.c by partition-guided pullback."""
    c = part.c
    S = symbol_matrix(seqs, depth)
    n_pts = len(seqs)
    chains = np.empty((n_pts, depth + 1), dtype=complex)
    periods, chains[:, depth] = _cycle_anchors(part, seqs, depth)
    for n in range(depth - 1, -1, -1):
        u = _roots(chains[:, n + 1], c)
        code = classify_codes(part, u)
        star = code == 2
        bad = star & (u != 0)
        if np.any(bad):
            k = int(np.nonzero(bad)[0][0])
            raise BranchAmbiguous(f"both roots lie on the partition curve at level {n} for {seqs[k]}",
                                  location=complex(u[k]))
        # the curve is odd, so -u is on the other side; u = 0 needs no choice
        flip = (code != S[:, n]) & ~star
        chains[:, n] = np.where(flip, -u, u)
    residuals = np.abs(chains[:, 0] - _follow(c, depth - 1, chains))
    if tol is not None and np.any(residuals > tol):
        k = int(np.argmax(residuals))
        raise DepthInsufficient(f"residual {residuals[k]:.3g} above {tol:g} for {seqs[k]} at depth {depth}")
    return RealizedBatch(c, list(seqs), chains, residuals, periods)


def realize_to_tolerance(part: PartitionCurve, seqs: Sequence[ItinerarySeq], depth: int = DEPTH,
                         tol: float = 1e-10, max_depth: int = 960) -> RealizedBatch:
    """realize_batch with the depth doubled until every residual is below tol.

    The residual shrinks like |Df^D| ** -1 along the chain, which is slow near a
    weakly repelling cycle (the alpha fixed point near c = i needs D ~ 80).
    """
    while True:
        batch = realize_batch(part, seqs, depth, tol=None)
        if float(np.max(batch.residuals)) <= tol:
            return batch
        if depth * 2 > max_depth:
            k = int(np.argmax(batch.residuals))
            raise DepthInsufficient(f"residual {batch.residuals[k]:.3g} above {tol:g} for {seqs[k]} "
                                    f"at depth {depth}")
        depth *= 2


def track_batch(c: complex, prev: RealizedBatch) -> RealizedBatch:
    """Realize the same itineraries at a nearby parameter c by continuity.

    Each root is the one closest to the previous chain at the same level. The
    returned ``ambiguity`` (max over choices of nearer/farther distance) tells
    the caller whether the parameter step was small enough.
    """
    c = complex(c)
    guide = prev.chains
    depth = prev.depth
    chains = np.empty_like(guide)
    chains[:, depth] = beta(c)
    cache = {}
    for k in np.nonzero(prev.periods)[0]:
        q = int(prev.periods[k])
        cyc = guide[k, depth - q:depth]
        key = (q, complex(guide[k, depth]))
        if key not in cache:
            def choose(i, u, cyc=cyc):
                return u if abs(u - cyc[i]) <= abs(u + cyc[i]) else -u
            cache[key] = _pull_cycle(c, choose, q, complex(guide[k, depth]))
        chains[k, depth] = cache[key]
    worst = 0.0
    for n in range(depth - 1, -1, -1):
        u = _roots(chains[:, n + 1], c)
        g = guide[:, n]
        a, b = np.abs(u - g), np.abs(u + g)
        # both roots within rounding of 0: nothing to choose
        real_choice = np.abs(u) > 1e-7 * (1.0 + np.abs(g))
        if np.any(real_choice):
            worst = max(worst, float(np.max((np.minimum(a, b) / np.maximum(a, b))[real_choice])))
        chains[:, n] = np.where(a <= b, u, -u)
    residuals = np.abs(chains[:, 0] - _follow(c, depth - 1, chains))
    return RealizedBatch(c, prev.seqs, chains, residuals, prev.periods, ambiguity=worst)


def point_from_itinerary(part: PartitionCurve, s: ItinerarySeq, depth: int = DEPTH,
                         tol: float = 1e-10) -> JuliaPoint:
    return realize_batch(part, [s], depth, tol).point(0)


def itinerary_of_point(part: PartitionCurve, z: complex, n: int) -> ItinerarySeq:
    """Symbols of z, f(z), ..., f^(n-1)(z) relative to the partition (forward iteration)."""
    c = part.c
    bound = 3.0 + abs(c)
    orbit = np.empty(n, dtype=complex)
    for k in range(n):
        if abs(z) > bound:
            raise Escaped(f"orbit left the disk of radius {bound:g} at step {k}")
        orbit[k] = z
        z = z * z + c
    codes = classify_codes(part, orbit)
    return ItinerarySeq("".join("01*"[k] for k in codes), None)


def chain_itinerary(part: PartitionCurve, chain: np.ndarray, n: Optional[int] = None) -> ItinerarySeq:
    """Itinerary read off a realized backward chain instead of forward iteration."""
    pts = chain if n is None else chain[:n]
    return ItinerarySeq("".join("01*"[k] for k in classify_codes(part, pts)), None)


# ---------------------------------------------------------------- derivative

def derivative_terms(c: complex, chains: np.ndarray) -> np.ndarray:
    """1/Df^n(z_0) for n = 1..D along each realized chain."""
    return 1.0 / np.cumprod(2.0 * chains[:, :-1], axis=1)


def derivative_batch(c: complex, chains: np.ndarray, periods: Optional[np.ndarray] = None):
    """dz/dc = -sum_{n>=1} 1/Df^n(z) over realized orbits continued by their anchor.

    Beyond level D the orbit stays on the anchor cycle (chains[k, D-q:D] for
    period q, the fixed point beta for q = 0), so the tail is summed exactly as
    a geometric series over whole cycles. Returns (values, tail_bounds,
    ratios): for the beta anchor the bound is twice the geometric tail implied
    by the ratio q of the last two terms; for a cycle anchor it is the
    rounding level of the summed tail.
    """
    n_pts, width = chains.shape
    depth = width - 1
    periods = np.zeros(n_pts, dtype=int) if periods is None else np.asarray(periods)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = derivative_terms(c, chains)
        last = t[:, -1]
        q = np.abs(t[:, -1] / t[:, -2])
        qb = 1.0 / (2.0 * chains[:, -1])
        tail = last * qb / (1.0 - qb)
        bound = 2.0 * np.abs(last) * q / (1.0 - q)
        for p in np.unique(periods[periods > 0]):
            rows = periods == p
            cp = np.cumprod(2.0 * chains[rows, depth - p:depth], axis=1)
            per_cycle = (1.0 / cp).sum(axis=1) / (1.0 - 1.0 / cp[:, -1])
            tail[rows] = last[rows] * per_cycle
            bound[rows] = np.abs(tail[rows]) * 1e-13
        values = -(t.sum(axis=1) + tail)
    return values, bound, q


def derivative_series(c: complex, point: JuliaPoint, tol: float = 1e-10):
    """(value, tail_bound, terms) for a realized point."""
    if point.chain is None:
        raise ValueError("point carries no realized chain")
    vals, tail, q = derivative_batch(c, point.chain[None, :], np.array([point.period]))
    if not np.isfinite(vals[0]):
        raise NoContraction(f"orbit of {point.position} meets 0; the series diverges")
    if q[0] >= MAX_RATIO:
        raise NoContraction(f"term ratio {q[0]:.3f} does not stay below {MAX_RATIO}")
    return complex(vals[0]), float(tail[0]), len(point.chain) - 1


# ---------------------------------------------------------------- motion

@dataclass
class MotionFrame:
    potential: float
    c: complex
    batch: Optional[RealizedBatch]
    derivatives: Optional[np.ndarray] = None
    tail_bounds: Optional[np.ndarray] = None
    skipped: str = ""  # reason if the frame could not be computed


@dataclass
class MotionPath:
    seqs: list
    frames: list  # MotionFrame, in order of decreasing potential, the last one at c_hat

    def positions(self, k: int = 0) -> np.ndarray:
        return np.array([f.batch.positions[k] if f.batch is not None else np.nan for f in self.frames])

    def write_csv(self, path, k: int = 0) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["potential", "c_re", "c_im", "z_re", "z_im", "dz_re", "dz_im", "tail_bound", "residual"])
            for f in self.frames:
                if f.batch is None:
                    continue
                z = f.batch.positions[k]
                dz = f.derivatives[k] if f.derivatives is not None else complex("nan")
                tb = f.tail_bounds[k] if f.tail_bounds is not None else float("nan")
                w.writerow([repr(float(f.potential)), repr(f.c.real), repr(f.c.imag), repr(float(z.real)),
                            repr(float(z.imag)), repr(float(dz.real)), repr(float(dz.imag)), repr(float(tb)),
                            repr(float(f.batch.residuals[k]))])


def track_to(ray, prev: RealizedBatch, g_prev: float, g: float, max_ambiguity: float = 0.25,
             max_splits: int = 40) -> RealizedBatch:
    """Track a batch from potential g_prev to g along the parameter ray, splitting steps as needed.

    ``ray`` maps a potential to the parameter at that potential.
    """
    stack = [g]
    cur, g_cur = prev, g_prev
    splits = 0
    while stack:
        target = stack[-1]
        nxt = track_batch(ray(target), cur)
        if nxt.ambiguity > max_ambiguity:
            splits += 1
            if splits > max_splits:
                raise BranchAmbiguous(f"tracking step from potential {g_cur:.3g} to {target:.3g} stays ambiguous")
            stack.append(float(np.sqrt(g_cur * target)))
            continue
        stack.pop()
        cur, g_cur = nxt, target
    return cur


def follow_motion(ctx, seqs: Sequence[ItinerarySeq], potentials: Sequence[float], depth: int = DEPTH,
                  with_derivative: bool = True) -> MotionPath:
    """Motion of the points with itineraries ``seqs`` along R_M(theta), then the frame at c_hat.

    The first frame is realized with the partition at that parameter; later
    frames continue the previous backward chains. ``ctx`` is a
    MisiurewiczContext (theta, c_hat, cached parameter ray).
    """
    from .partition import build_partition

    potentials = [float(g) for g in potentials]
    if any(b >= a for a, b in zip(potentials, potentials[1:])):
        raise ValueError("potentials must be strictly decreasing")
    frames = []
    prev, g_prev = None, None
    for g in potentials:
        try:
            c = ctx.at_potential(g)
            if prev is None:
                batch = realize_batch(build_partition(c, ctx.theta), seqs, depth, tol=None)
            else:
                batch = track_to(ctx.at_potential, prev, g_prev, g)
            frame = MotionFrame(g, batch.c, batch)
            if with_derivative:
                frame.derivatives, frame.tail_bounds, _ = derivative_batch(batch.c, batch.chains, batch.periods)
            prev, g_prev = batch, g
        except Exception as exc:  # noqa: BLE001 - recorded as a skipped frame
            frame = MotionFrame(g, complex("nan"), None, skipped=f"{type(exc).__name__}: {exc}")
        frames.append(frame)
    final = realize_batch(ctx.partition_at_landing(), seqs, depth, tol=None)
    frames.append(MotionFrame(0.0, ctx.c_hat, final))
    return MotionPath(list(seqs), frames)
