"""Quantitative checks of the motion of Julia sets near a Misiurewicz parameter.

Every suite returns a VerificationReport whose pass flag is computed from its
metrics by the tolerance clauses it declares.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..dynamics import mandelbrot_distance_estimate
from ..parallel import pmap
from ..symbolic import ItinerarySeq, equivalent_wrt, fiber_partner, sample_set, shift, words
from .context import MisiurewiczContext
from .hausdorff import hausdorff_distance
from .realize import (DEPTH, JuliaPoint, beta, derivative_batch, derivative_series, realize_to_tolerance,
                      track_to)
from .report import VerificationReport
from .zcycles import INF, reciprocal_sum, zcycle_decompose

EPSILONS = (1e-2, 1e-3, 1e-4)
SAMPLE_LEN = 7


def _key(eps: float) -> str:
    return f"{eps:.3g}"


def _realize_at(ctx: MisiurewiczContext, eps: float, seqs, depth: int):
    return realize_to_tolerance(ctx.partition_at_eps(eps), seqs, depth)


def _prepare(ctx: MisiurewiczContext, epsilons: Sequence[float]):
    # parameter lookups share one cached ray, so resolve them before fanning out
    for eps in epsilons:
        if eps:
            ctx.parameter_at(eps)


# ---------------------------------------------------------------- derivative bound

def verify_main_bound(ctx: MisiurewiczContext, epsilons: Sequence[float] = EPSILONS,
                      max_len: int = SAMPLE_LEN, depth: int = DEPTH, stability: float = 3.0) -> VerificationReport:
    """K(eps) = max |dz/dc| sqrt(eps) over sampled Julia points, plus the distance-based a priori bound."""
    seqs = sample_set(ctx.e, max_len)
    _prepare(ctx, epsilons)

    def one(eps):
        batch = _realize_at(ctx, eps, seqs, depth)
        vals, tails, q = derivative_batch(batch.c, batch.chains, batch.periods)
        mags = np.abs(vals)
        lower, _ = mandelbrot_distance_estimate(batch.c)
        bound = (1.0 + math.sqrt(1.0 + 6.0 * abs(batch.c))) / lower
        k = int(np.argmax(mags))
        beta_idx = seqs.index(ItinerarySeq("", "1")) if ItinerarySeq("", "1") in seqs else None
        return {
            "K": float(mags[k] * math.sqrt(eps)),
            "argmax": str(seqs[k]),
            "violations": int(np.count_nonzero(mags > bound)),
            "max_over_bound": float(np.max(mags) / bound),
            "tail": float(np.max(tails)),
            "ratio": float(np.max(q)),
            "beta_K": float(mags[beta_idx] * math.sqrt(eps)) if beta_idx is not None else float("nan"),
        }

    rows = pmap(one, epsilons)
    Ks = [r["K"] for r in rows]
    metrics = {f"K@{_key(e)}": r["K"] for e, r in zip(epsilons, rows)}
    metrics.update({f"betaK@{_key(e)}": r["beta_K"] for e, r in zip(epsilons, rows)})
    metrics.update({
        "K_max": max(Ks),
        "K_min": min(Ks),
        "K_ratio": max(Ks) / min(Ks),
        "bound_violations": float(sum(r["violations"] for r in rows)),
        "bound_worst_fraction": max(r["max_over_bound"] for r in rows),
        "max_tail_bound": max(r["tail"] for r in rows),
        "max_term_ratio": max(r["ratio"] for r in rows),
        "n_samples": float(len(seqs)),
    })
    return VerificationReport(
        "main-bound",
        {"theta": str(ctx.theta), "epsilons": list(epsilons), "max_len": max_len, "depth": depth},
        metrics,
        f"K_ratio < {stability:g}; bound_violations == 0; max_tail_bound < 1e-8; max_term_ratio < 0.95",
        details={"argmax": [r["argmax"] for r in rows]},
    )


# ---------------------------------------------------------------- distance from 0 to J

def dist_zero_julia(ctx: MisiurewiczContext, epsilons: Sequence[float] = EPSILONS,
                    max_len: int = SAMPLE_LEN, depth: int = DEPTH) -> VerificationReport:
    """min |z| over sampled Julia points, normalized by sqrt(eps)."""
    seqs = sample_set(ctx.e, max_len)
    _prepare(ctx, epsilons)
    mins = pmap(lambda eps: float(np.min(np.abs(_realize_at(ctx, eps, seqs, depth).positions))), epsilons)
    ratios = [d / math.sqrt(e) for d, e in zip(mins, epsilons)]
    metrics = {f"d@{_key(e)}": d for e, d in zip(epsilons, mins)}
    metrics.update({f"ratio@{_key(e)}": r for e, r in zip(epsilons, ratios)})
    metrics.update({"ratio_min": min(ratios), "ratio_max": max(ratios),
                    "ratio_spread": max(ratios) / min(ratios)})
    return VerificationReport(
        "lemma-t",
        {"theta": str(ctx.theta), "epsilons": list(epsilons), "max_len": max_len, "depth": depth},
        metrics,
        "ratio_min > 0.05; ratio_spread < 3",
    )


# ---------------------------------------------------------------- Z-cycles

def zcycle_statistics(chains: np.ndarray, periods: np.ndarray, nu: float):
    """(min expansion over finite Z-cycles, max Z-cycle reciprocal sum, max prefix reciprocal sum).

    Orbits continue on their anchor cycle past the chain end; infinite blocks
    get the geometric tail with the cycle's mean expansion per step.
    """
    lam = math.inf
    ka = 0.0
    kb = 0.0
    n_cycles = 0
    for chain, p in zip(chains, periods):
        cyc = chain[-1 - p:-1] if p else chain[-1:]
        if np.min(np.abs(cyc)) < nu:
            raise ValueError("anchor cycle meets V0; the orbit tail is not V0-free")
        anchor = float(np.exp(np.mean(np.log(np.abs(2.0 * cyc)))))
        dec = zcycle_decompose(chain[:-1], nu)
        last = len(chain) - 1
        for b, exp_ in zip(dec.finite_cycles(), dec.expansions):
            lam = min(lam, exp_)
            n_cycles += 1
        for b in dec.blocks:
            stop = last if b.end == INF else int(b.end)
            tail = anchor if b.end == INF else None
            s = reciprocal_sum(chain, b.start, stop, tail)
            if b.kind == "zcycle":
                ka = max(ka, s)
            else:
                kb = max(kb, s)
    return lam, ka, kb, n_cycles


def return_itineraries(e: ItinerarySeq, max_shadow: int = 16, max_prefix: int = 3) -> list[ItinerarySeq]:
    """v x e_0..e_(k-1) y e: orbits that pass near 0, shadow the critical orbit for k steps, and come back.

    Points near 0 carry itineraries close to 0e and 1e, so these produce
    finite Z-cycles of every length up to max_shadow + 1.
    """
    seen = {}
    for k in range(1, max_shadow + 1):
        for n in range(max_prefix + 1):
            for v in words(n):
                for x in "01":
                    for y in "01":
                        seen.setdefault(e.prepend(v + x + e.prefix(k) + y), None)
    return list(seen)


def verify_zcycles(ctx: MisiurewiczContext, epsilons: Sequence[float] = EPSILONS, nu: float = 0.1,
                   max_len: int = SAMPLE_LEN, depth: int = DEPTH, stability: float = 3.0) -> VerificationReport:
    """Uniform expansion of finite Z-cycles and the sqrt(eps) scaling of Z-cycle sums."""
    seqs = list(dict.fromkeys(sample_set(ctx.e, max_len) + return_itineraries(ctx.e)))
    _prepare(ctx, epsilons)

    def one(eps):
        batch = _realize_at(ctx, eps, seqs, depth)
        return zcycle_statistics(batch.chains, batch.periods, nu)

    rows = pmap(one, epsilons)
    lam = [r[0] for r in rows]
    ka = [r[1] * math.sqrt(e) for r, e in zip(rows, epsilons)]
    kb = [r[2] for r in rows]
    metrics = {f"Lambda@{_key(e)}": v for e, v in zip(epsilons, lam)}
    metrics.update({f"KA@{_key(e)}": v for e, v in zip(epsilons, ka)})
    metrics.update({f"KB@{_key(e)}": v for e, v in zip(epsilons, kb)})
    metrics.update({
        "Lambda_min": min(lam),
        "KA_ratio": max(ka) / min(ka) if min(ka) > 0 else math.inf,
        "KB_max": max(kb),
        "KB_ratio": max(kb) / min(kb) if min(kb) > 0 else math.inf,
        "finite_cycles": float(sum(r[3] for r in rows)),
    })
    return VerificationReport(
        "zcycles",
        {"theta": str(ctx.theta), "epsilons": list(epsilons), "nu": nu, "max_len": max_len, "depth": depth},
        metrics,
        f"Lambda_min > 1; KA_ratio < {stability:g}; KB_ratio < {stability:g}; finite_cycles > 0",
    )


# ---------------------------------------------------------------- Hausdorff convergence

def tail_e_words(e: ItinerarySeq, word_len: int) -> list[ItinerarySeq]:
    return [e.prepend(w) for w in words(word_len)]


def hausdorff_scaling(ctx: MisiurewiczContext, epsilons: Sequence[float], word_len: int = 10,
                      depth: int = DEPTH) -> VerificationReport:
    """d_H between matched clouds at c_eps and at c_hat, and its log-log slope in eps."""
    seqs = tail_e_words(ctx.e, word_len)
    _prepare(ctx, epsilons)
    hat = realize_to_tolerance(ctx.partition_at_landing(), seqs, depth).positions

    def one(eps):
        cloud = _realize_at(ctx, eps, seqs, depth).positions
        return hausdorff_distance(cloud, hat), float(np.max(np.abs(cloud - hat)))

    rows = pmap(one, epsilons)
    dh = np.array([r[0] for r in rows])
    matched = np.array([r[1] for r in rows])
    le = np.log(np.asarray(epsilons, dtype=float))
    slope = float(np.polyfit(le, np.log(dh), 1)[0])
    mslope = float(np.polyfit(le, np.log(matched), 1)[0])
    metrics = {f"dH@{_key(e)}": v for e, v in zip(epsilons, dh)}
    metrics.update({f"matched@{_key(e)}": v for e, v in zip(epsilons, matched)})
    metrics.update({"slope": slope, "matched_slope": mslope,
                    "matched_dominates": float(np.all(matched >= dh * (1 - 1e-12))),
                    "n_points": float(len(seqs))})
    return VerificationReport(
        "hausdorff",
        {"theta": str(ctx.theta), "epsilons": list(epsilons), "word_len": word_len, "depth": depth},
        metrics,
        "slope >= 0.4; slope <= 0.6; matched_dominates == 1",
    )


# ---------------------------------------------------------------- conjugacy at c_hat

def _components(n: int, pairs) -> list[list[int]]:
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def conjugacy_sample(e: ItinerarySeq, word_len: int) -> list[ItinerarySeq]:
    tails = [ItinerarySeq("", "0"), ItinerarySeq("", "1"), e]
    seen = {}
    for w in words(word_len):
        for t in tails:
            seen.setdefault(t.prepend(w), None)
    return list(seen)


def semiconjugacy_check(ctx: MisiurewiczContext, word_len: int = 10, depth: int = DEPTH,
                        collision_radius: float = 1e-9, snap: float = 1e-9) -> VerificationReport:
    """At c_hat: h(sigma s) = f(h(s)), and h(s) = h(a) exactly when s ~_e a."""
    seqs = conjugacy_sample(ctx.e, word_len)
    part = ctx.partition_at_landing()
    batch = realize_to_tolerance(part, seqs, depth)
    shifted = realize_to_tolerance(part, [shift(s) for s in seqs], depth)
    pos = batch.positions
    conj = float(np.max(np.abs(pos * pos + ctx.c_hat - shifted.positions)))

    index = {s: i for i, s in enumerate(seqs)}
    predicted = set()
    for i, s in enumerate(seqs):
        a = fiber_partner(ctx.e, s)
        if a is not None and a in index:
            j = index[a]
            predicted.add((min(i, j), max(i, j)))
    observed = set(cKDTree(np.column_stack([pos.real, pos.imag])).query_pairs(collision_radius))
    mismatches = predicted ^ observed
    # spot-check that predicted pairs are the relation itself, not just partner lookups
    rel_fail = sum(not equivalent_wrt(ctx.e, seqs[i], seqs[j]) for i, j in observed)

    groups = _components(len(seqs), observed)
    max_class = max(len(g) for g in groups)
    near_zero = np.min(np.abs(batch.chains), axis=1) < snap
    size2 = np.zeros(len(seqs), dtype=bool)
    for g in groups:
        if len(g) == 2:
            size2[g] = True
    iff_fail = int(np.count_nonzero(size2 != near_zero))

    # closest distinct classes
    reps = np.array([pos[g[0]] for g in groups])
    tree = cKDTree(np.column_stack([reps.real, reps.imag]))
    dist, _ = tree.query(np.column_stack([reps.real, reps.imag]), k=2)
    min_sep = float(np.min(dist[:, 1])) if len(reps) > 1 else math.inf

    metrics = {
        "conjugacy_residual": conj,
        "collision_mismatches": float(len(mismatches)),
        "relation_failures": float(rel_fail),
        "max_class_size": float(max_class),
        "pair_iff_zero_failures": float(iff_fail),
        "pairs": float(len(observed)),
        "min_separation": min_sep,
        "max_residual": float(np.max(batch.residuals)),
        "n_points": float(len(seqs)),
    }
    return VerificationReport(
        "semiconjugacy",
        {"theta": str(ctx.theta), "word_len": word_len, "depth": depth, "collision_radius": collision_radius},
        metrics,
        f"conjugacy_residual < 1e-8; collision_mismatches == 0; relation_failures == 0; max_class_size <= 2; "
        f"pair_iff_zero_failures == 0; min_separation > {10 * collision_radius:g}",
    )


# ---------------------------------------------------------------- motion limit

def motion_limit(ctx: MisiurewiczContext, s: ItinerarySeq, depth: int = DEPTH, r0: float = 2.0,
                 per_halving: int = 16, tol: float = 1e-9, eps_floor: float = 1e-12, max_arcs: int = 60):
    """z(c_hat) as z(c_0) plus the integral of dz/dc over the subarcs [c_n, c_{n+1}] of the ray.

    c_n has potential log(r0) / 2^(n p). Each subarc integral is a trapezoid
    sum in log-potential with the exact ray velocity, Richardson-combined with
    the half-resolution sum; a geometric tail closes the sum of subarcs.
    Returns a dict with the integral estimate, the direct value and the
    Hoelder quotients |z(c_n) - z(c_hat)| / sqrt|c_n - c_hat|.
    """
    p = ctx.data.p
    g0 = math.log(r0)
    c0 = ctx.at_potential(g0)
    cur = realize_to_tolerance(ctx.partition(c0), [s], depth)
    z0 = complex(cur.positions[0])
    g_cur = g0
    direct = complex(realize_to_tolerance(ctx.partition_at_landing(), [s], depth).positions[0])

    def integrand(batch, g):
        dzdc = derivative_batch(batch.c, batch.chains, batch.periods)[0][0]
        return dzdc * ctx.ray.velocity(batch.c, g) * g

    f_prev = integrand(cur, g_cur)
    arcs = []
    nodes = [(g0, c0, z0)]
    total = 0j
    tail = 0j
    for n in range(max_arcs):
        g_a = g0 / 2.0 ** (n * p)
        m = per_halving * p + (per_halving * p) % 2  # even, for the half-resolution sum
        s_grid = np.linspace(math.log(g_a), math.log(g_a) - p * math.log(2.0), m + 1)
        vals = [f_prev]
        for sg in s_grid[1:]:
            g = math.exp(sg)
            cur = track_to(ctx.at_potential, cur, g_cur, g)
            g_cur = g
            vals.append(integrand(cur, g))
        vals = np.array(vals)
        h = s_grid[1] - s_grid[0]
        fine = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
        coarse = 2 * h * (vals[::2].sum() - 0.5 * (vals[0] + vals[-1]))
        arc = (4.0 * fine - coarse) / 3.0
        arcs.append(arc)
        total += arc
        f_prev = vals[-1]
        nodes.append((g_cur, cur.c, complex(cur.positions[0])))
        eps_n = abs(cur.c - ctx.c_hat)
        if len(arcs) >= 3 and abs(arcs[-2]) > 0:
            r = arcs[-1] / arcs[-2]
            if abs(r) < 1:
                tail = arcs[-1] * r / (1 - r)
                if abs(tail) < tol:
                    break
        if eps_n < eps_floor:
            break
    estimate = z0 + total + tail
    holder = [abs(z - direct) / math.sqrt(abs(c - ctx.c_hat)) for _, c, z in nodes]
    return {
        "estimate": estimate,
        "direct": direct,
        "discrepancy": abs(estimate - direct),
        "tracked_end": nodes[-1][2],
        "tail": abs(tail),
        "arcs": len(arcs),
        "holder": holder,
        "final_eps": abs(nodes[-1][1] - ctx.c_hat),
    }


def motion_limit_crosscheck(ctx: MisiurewiczContext, seqs: Sequence[ItinerarySeq], depth: int = DEPTH,
                            tol_discrepancy: float = 1e-5) -> VerificationReport:
    rows = pmap(lambda s: motion_limit(ctx, s, depth), seqs)
    metrics = {}
    for s, r in zip(seqs, rows):
        metrics[f"discrepancy@{s}"] = r["discrepancy"]
        metrics[f"holder@{s}"] = max(r["holder"])
    disc = max(r["discrepancy"] for r in rows)
    hold = max(max(r["holder"]) for r in rows)
    # where along the subdivision the quotient peaks: a blow-up would push it to the end
    late = max(max(r["holder"][len(r["holder"]) // 2:]) / max(r["holder"]) for r in rows)
    metrics.update({"max_discrepancy": disc, "max_holder": hold, "late_holder_fraction": late})
    return VerificationReport(
        "holder",
        {"theta": str(ctx.theta), "itineraries": [str(s) for s in seqs], "depth": depth},
        metrics,
        f"max_discrepancy < {tol_discrepancy:g}; max_holder < 1e3; late_holder_fraction <= 1",
        details={"estimates": [str(r["estimate"]) for r in rows], "direct": [str(r["direct"]) for r in rows]},
    )


# ---------------------------------------------------------------- derivative formula

FIXED_POINT_PARAMETERS = (-3.0, 3.0, -2.5, -2.01, -2.001, -2.0001)


def fixed_point(c: complex, depth: int = DEPTH) -> JuliaPoint:
    """The fixed point beta(c) as a realized point (constant backward chain)."""
    b = beta(c)
    return JuliaPoint(complex(c), ItinerarySeq("", "1"), b, 0.0, chain=np.full(depth + 1, b))


def verify_derivative_formula(parameters: Sequence[complex] = FIXED_POINT_PARAMETERS,
                              depth: int = DEPTH) -> VerificationReport:
    """Series -sum 1/Df^n at the fixed point against -1/(2 beta - 1)."""
    metrics = {}
    worst = 0.0
    for c in parameters:
        val, tail, _ = derivative_series(complex(c), fixed_point(c, depth))
        exact = -1.0 / (2.0 * beta(c) - 1.0)
        rel = abs(val - exact) / abs(exact)
        metrics[f"rel@{c}"] = rel
        worst = max(worst, rel)
    metrics["max_rel_error"] = worst
    return VerificationReport(
        "derivative-formula",
        {"parameters": [str(c) for c in parameters], "depth": depth},
        metrics,
        "max_rel_error < 1e-8",
    )


def default_holder_itineraries(ctx: MisiurewiczContext) -> list[ItinerarySeq]:
    return [ItinerarySeq("", "1"), ctx.e.prepend("1"), ctx.e.prepend("01")]


def verify_holder(ctx: MisiurewiczContext, depth: int = DEPTH) -> VerificationReport:
    return motion_limit_crosscheck(ctx, default_holder_itineraries(ctx), depth)
