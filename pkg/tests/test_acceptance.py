"""Acceptance criteria 1-10; each test carries its criterion number and the summary prints one line per criterion."""

import json
import math
import time

import numpy as np
import pytest

from rayflow.angles import ExactAngle
from rayflow.cli import run
from rayflow.dynamics import solve_misiurewicz
from rayflow.motion import suites
from rayflow.motion.realize import beta, derivative_series, itinerary_of_point, realize_to_tolerance
from rayflow.motion.suites import fixed_point
from rayflow.symbolic import (ItinerarySeq, equivalent_wrt, fiber_partner, kneading, sample_set, shift,
                              tail_hits)

A = ExactAngle.parse
S = ItinerarySeq.parse
HAUSDORFF_EPS = [10 ** -1.5, 1e-2, 10 ** -2.5, 1e-3, 10 ** -3.5, 1e-4]


def crit(n, title):
    return pytest.mark.criterion(n, title)


# ---------------------------------------------------------------- 1

def _orbit(c, n):
    z, out = 0j, []
    for _ in range(n):
        z = z * z + c
        out.append(z)
    return out


@crit(1, "parameter-ray landing at -2 and i")
@pytest.mark.parametrize("angle,p,l,target", [("1/2", 1, 2, -2), ("1/6", 2, 2, 1j)])
def test_landing_oracle(capsys, angle, p, l, target):
    t0 = time.perf_counter()
    code = run(["land", "--angle", angle, "--p", str(p)])
    dt = time.perf_counter() - t0
    d = json.loads(capsys.readouterr().out)
    c = complex(d["landing_re"], d["landing_im"])
    # oracle: Newton root of the preperiodicity equation, checked on the critical orbit
    root = solve_misiurewicz(l, p, target + 1e-3)
    orb = _orbit(root, l + p)
    assert abs(orb[l + p - 1] - orb[l - 1]) < 1e-12
    assert abs(root - target) < 1e-12
    print(f"land {angle}: {c} (|err| {abs(c - root):.1e}, {dt:.2f} s)")
    assert code == 0 and abs(c - root) < 1e-6 and dt < 5


# ---------------------------------------------------------------- 2

@crit(2, "derivative series at beta equals -1/(2 beta - 1)")
def test_derivative_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    for c in (-3.0, 3.0, -2.5, -2 - 1e-3):
        val, _, _ = derivative_series(c, fixed_point(c))
        exact = 1 / (2 * beta(c) - 1)
        worst = max(worst, abs(val + exact) / abs(exact))
    dt = time.perf_counter() - t0
    print(f"max relative error {worst:.2e} in {dt:.2f} s")
    assert worst < 1e-8 and dt < 1


# ---------------------------------------------------------------- 3

@crit(3, "near-zero asymptotics at c_hat=-2, eps=1e-4")
def test_near_zero_asymptotics(ctx_half):
    eps = 1e-4
    part = ctx_half.partition_at_eps(eps)
    b = realize_to_tolerance(part, sample_set(ctx_half.e, 7), 60)
    k = int(np.argmin(np.abs(b.positions)))
    dmin = abs(b.positions[k])
    val, tail, _ = derivative_series(part.c, b.point(k))
    print(f"min|z| {dmin:.6g} vs {math.sqrt(2 * eps / 3):.6g}; |dz/dc| {abs(val):.4f} vs {1 / math.sqrt(6 * eps):.4f}")
    assert dmin == pytest.approx(math.sqrt(2 * eps / 3), rel=0.05)
    assert abs(val) == pytest.approx(1 / math.sqrt(6 * eps), rel=0.05)
    assert tail < 1e-6 * abs(val)


# ---------------------------------------------------------------- 4, 5

@pytest.fixture(scope="module")
def main_bound_half(ctx_half):
    t0 = time.perf_counter()
    r = suites.verify_main_bound(ctx_half, (1e-2, 1e-3, 1e-4), max_len=7)
    return r, time.perf_counter() - t0


@crit(4, "K(eps) stable over eps for theta=1/2")
def test_main_theorem_stability(main_bound_half):
    r, dt = main_bound_half
    m = r.metrics
    ks = [m[k] for k in m if k.startswith("K@")]
    print(f"K(eps) {['%.4f' % k for k in ks]} ratio {m['K_ratio']:.3f} n={m['n_samples']:.0f} in {dt:.1f} s")
    assert len(ks) == 3 and m["n_samples"] >= 200
    assert m["K_ratio"] < 3
    assert min(ks) >= 0.9 / math.sqrt(6)
    assert dt < 180


@crit(5, "a priori derivative bound from the distance bracket")
@pytest.mark.parametrize("fixture", ["ctx_half", "ctx_sixth"])
def test_a_priori_derivative_bound(request, main_bound_half, fixture):
    if fixture == "ctx_half":
        r = main_bound_half[0]
    else:
        r = suites.verify_main_bound(request.getfixturevalue(fixture), (1e-2, 1e-3, 1e-4), max_len=7)
    print(f"violations {r.metrics['bound_violations']:.0f}, worst fraction {r.metrics['bound_worst_fraction']:.3g}")
    assert r.metrics["bound_violations"] == 0
    assert r.metrics["n_samples"] >= 200


# ---------------------------------------------------------------- 6

@crit(6, "Z-cycle expansion and scaling (nu=0.1, theta=1/2)")
def test_zcycle_suite(ctx_half):
    r = suites.verify_zcycles(ctx_half, (1e-2, 1e-3, 1e-4), nu=0.1, max_len=7)
    m = r.metrics
    print(f"Lambda_min {m['Lambda_min']:.3f}, finite {m['finite_cycles']:.0f}, KA ratio {m['KA_ratio']:.3f}")
    assert m["finite_cycles"] > 0
    assert m["Lambda_min"] > 1
    assert m["KA_ratio"] < 3


# ---------------------------------------------------------------- 7

@crit(7, "Hausdorff slope in [0.4, 0.6] and motion-limit cross-check")
@pytest.mark.parametrize("fixture", ["ctx_half", "ctx_sixth"])
def test_hausdorff_slope(request, fixture):
    ctx = request.getfixturevalue(fixture)
    r = suites.hausdorff_scaling(ctx, HAUSDORFF_EPS, word_len=16)
    print(f"theta {ctx.theta}: slope {r.metrics['slope']:.4f}")
    assert 0.4 <= r.metrics["slope"] <= 0.6


@crit(7, "Hausdorff slope in [0.4, 0.6] and motion-limit cross-check")
@pytest.mark.parametrize("fixture", ["ctx_half", "ctx_sixth"])
def test_motion_limit_discrepancy(request, fixture):
    ctx = request.getfixturevalue(fixture)
    seqs = suites.default_holder_itineraries(ctx)
    for s in seqs:
        out = suites.motion_limit(ctx, s)
        print(f"theta {ctx.theta} s={s}: discrepancy {out['discrepancy']:.2e}")
        assert out["discrepancy"] < 1e-5


# ---------------------------------------------------------------- 8

def _relation_by_groups(e, fam):
    """Every pair (i, j), i != j, with equivalent_wrt(e, fam[i], fam[j]), grouped by the shared (k, prefix) key."""
    groups = {}
    for i, s in enumerate(fam):
        for k in tail_hits(e, s):
            groups.setdefault((k, s.prefix(k)), []).append(i)
    pairs = set()
    for members in groups.values():
        pairs.update((i, j) for i in members for j in members if i != j)
    return pairs


def _relation_by_flips(e, fam):
    """Oracle straight from the definition: a and b differ at exactly one index k and both continue with e."""
    index = {s: i for i, s in enumerate(fam)}
    n = max(len(s.head) for s in fam) + max(len(s.repeat) for s in fam) + 1
    pairs = set()
    for i, s in enumerate(fam):
        for k in range(n):
            b = s.flip(k)
            j = index.get(b)
            if j is not None and shift(s, k + 1) == e and shift(b, k + 1) == e:
                pairs.add((i, j))
    return pairs, n


@crit(8, "symbolic layer: kneading, equivalence axioms, partner involution")
def test_kneading_exact():
    assert kneading(A("1/2")) == S("0(1)")
    assert kneading(A("1/6")) == S("0(01)")


@crit(8, "symbolic layer: kneading, equivalence axioms, partner involution")
@pytest.mark.parametrize("theta", ["1/2", "1/6"])
def test_equivalence_axioms_exhaustive(theta):
    e = kneading(A(theta))
    fam = sample_set(e, 12)
    grouped = _relation_by_groups(e, fam)
    oracle, n = _relation_by_flips(e, fam)
    assert grouped == oracle
    # the function itself on every candidate pair: identity and all single-symbol flips inside the family
    index = {s: i for i, s in enumerate(fam)}
    for i, s in enumerate(fam):
        assert equivalent_wrt(e, s, s)
        for k in range(n):
            j = index.get(s.flip(k))
            if j is not None:
                assert equivalent_wrt(e, s, fam[j]) == ((i, j) in oracle)
    # pairs at Hamming distance >= 2 never relate; spot-check the function on random ones
    rng = np.random.default_rng(8)
    for i, j in rng.integers(0, len(fam), size=(20000, 2)):
        if i != j and (i, j) not in oracle:
            assert not equivalent_wrt(e, fam[i], fam[j])
    # symmetry and transitivity of the full relation
    nbrs = {}
    for i, j in grouped:
        nbrs.setdefault(i, set()).add(j)
    assert all((j, i) in grouped for i, j in grouped)
    for i, js in nbrs.items():
        for j in js:
            assert nbrs[j] - {i} <= js
    print(f"theta {theta}: {len(fam)} sequences, {len(grouped) // 2} related pairs")
    assert len(fam) == len(set(fam)) > 10 ** 4
    assert grouped


@crit(8, "symbolic layer: kneading, equivalence axioms, partner involution")
def test_fiber_partner_involution_random():
    rng = np.random.default_rng(88)
    thetas = [A("1/2"), A("1/6"), A("9/56"), A("5/12")]
    knead = [kneading(t) for t in thetas]
    found = 0
    for _ in range(10 ** 4):
        e = knead[rng.integers(len(knead))]
        n = int(rng.integers(0, 25))
        w = "".join(rng.choice(["0", "1"], size=n))
        tail = [e, S("(0)"), S("(1)")][rng.integers(3)]
        s = tail.prepend(w)
        a = fiber_partner(e, s)
        if a is not None:
            found += 1
            assert a != s and fiber_partner(e, a) == s and equivalent_wrt(e, a, s)
    print(f"{found} inputs with a partner")
    assert found > 1000


# ---------------------------------------------------------------- 9

@crit(9, "semiconjugacy at c_hat=-2 and c_hat=i")
@pytest.mark.parametrize("fixture", ["ctx_half", "ctx_sixth"])
def test_semiconjugacy(request, fixture):
    ctx = request.getfixturevalue(fixture)
    r = suites.semiconjugacy_check(ctx, word_len=10)
    m = r.metrics
    print(f"theta {ctx.theta}: residual {m['conjugacy_residual']:.1e}, pairs {m['pairs']:.0f}, "
          f"mismatches {m['collision_mismatches']:.0f}")
    assert m["conjugacy_residual"] < 1e-8
    assert m["max_class_size"] <= 2
    assert m["pair_iff_zero_failures"] == 0
    assert m["collision_mismatches"] == 0
    assert m["relation_failures"] == 0


# ---------------------------------------------------------------- 10

def _random_instances(ctx, rng, n_c=50, per_c=20):
    fams = [ctx.e, S("(0)"), S("(1)")]
    for _ in range(n_c):
        g = 10 ** rng.uniform(-4, 0)
        c = ctx.at_potential(g)
        seqs = []
        for _ in range(per_c):
            w = "".join(rng.choice(["0", "1"], size=int(rng.integers(0, 13))))
            seqs.append(fams[rng.integers(3)].prepend(w))
        yield c, seqs


@crit(10, "round trip and equivariance on 10^3 random (c, s) per ray")
@pytest.mark.parametrize("fixture", ["ctx_half", "ctx_sixth", "ctx_956"])
def test_round_trip_and_equivariance(request, fixture):
    ctx = request.getfixturevalue(fixture)
    rng = np.random.default_rng(10)
    count, worst_eq, worst_res = 0, 0.0, 0.0
    for c, seqs in _random_instances(ctx, rng):
        part = ctx.partition(c)
        b = realize_to_tolerance(part, seqs, 60)
        sh = realize_to_tolerance(part, [shift(s) for s in seqs], 60)
        worst_eq = max(worst_eq, float(np.max(np.abs(b.positions ** 2 + c - sh.positions))))
        worst_res = max(worst_res, float(np.max(b.residuals)))
        for k, s in enumerate(seqs):
            assert itinerary_of_point(part, b.positions[k], 20) == s.truncate(20), (c, s)
            count += 1
    print(f"theta {ctx.theta}: {count} instances, equivariance {worst_eq:.1e}, residual {worst_res:.1e}")
    assert count == 1000
    assert worst_eq < 1e-9 and worst_res <= 1e-10
