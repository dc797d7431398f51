"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS n: ...`` or ``FAIL n: ...`` line (also collected
into the pytest terminal summary) and then asserts.  Run alone with

    pytest tests/test_acceptance.py -v

or ``python3 tests/test_acceptance.py``.
"""

import sys

import numpy as np
import pytest
from scipy.special import digamma, gammaln

from qwrecur import coins as C
from qwrecur.evolution import (
    ProductWalk,
    evolve_collect,
    evolve_product,
    init_state,
    return_probability,
    step,
)
from qwrecur.polya import (
    classical_return_series,
    criterion_demo,
    fit_decay_exponent,
    fit_fourier_surface,
    fourier_polya_surface,
    polya_at_cutoffs,
    polya_partial,
    survival_cutoff,
    tensor_polya_estimate,
)
from qwrecur.evolution import ReturnSeries
from qwrecur.spectral import (
    find_saddles,
    flat_band_overlap,
    fourier_implicit,
    kspace_return_amplitude,
    wrap_phase,
)

from conftest import ACCEPTANCE

WINDOW = (100, 1000)


def report(num, title, checks):
    """checks: list of (ok, text).  Records one line and returns overall ok."""
    ok = all(c for c, _ in checks)
    detail = "; ".join(t for _, t in checks)
    line = f"{'PASS' if ok else 'FAIL'} {num}: {title} | {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


# 1 -------------------------------------------------------------------------

TABLE_SIM = {2: 0.29325, 3: 0.12947, 4: 0.06302, 5: 0.031313}
TABLE_EST = {2: 0.27325, 3: 0.12841, 4: 0.06296, 5: 0.031309}


def test_1_table_reproduction(long_runs):
    checks = []
    for d in (2, 3, 4, 5):
        s = long_runs.product(d)
        p = polya_partial(s).partial_product
        cuts = polya_at_cutoffs(s, (900, 1000))
        checks.append((abs(p - TABLE_SIM[d]) <= 5e-5,
                       f"d={d} sim {p:.6f} (ref {TABLE_SIM[d]}, t<=900 gives {cuts[900]:.6f})"))
        e = tensor_polya_estimate(d)
        checks.append((abs(e - TABLE_EST[d]) <= 5e-6, f"est {e:.6f} (ref {TABLE_EST[d]})"))
    assert report(1, "tensor-Hadamard Polya table", checks)


# 2 -------------------------------------------------------------------------

def test_2_decay_exponents(long_runs):
    cases = [
        ("hadamard", 1.0, 0.05),
        ("random1d_a", 1.0, 0.05),
        ("random1d_b", 1.0, 0.05),
        ("tensorH2", 2.0, 0.1),
        ("grover_G", 2.0, 0.1),
        ("fourier_F", 2.0, 0.1),
        ("fourier_e1", 1.0, 0.1),
    ]
    checks = []
    for name, want, tol in cases:
        a, _ = fit_decay_exponent(long_runs[name], WINDOW)
        checks.append((abs(a - want) <= tol, f"{name} {a:.4f}"))
    for d in (3, 4, 5):
        a, _ = fit_decay_exponent(long_runs.product(d), WINDOW)
        checks.append((abs(a - d) <= 0.1 * d, f"product d={d} {a:.4f}"))
    assert report(2, "decay exponents on [100, 1000]", checks)


# 3 -------------------------------------------------------------------------

def test_3_grover_localization(long_runs, grids):
    tail_s = np.mean(long_runs["grover_S"].p0[-100:])
    tail_g = np.mean(long_runs["grover_G"].p0[-100:])
    grid = grids(C.grover_coin())
    vs = flat_band_overlap(C.named_state("psi_S"), grid).verdict
    vg = flat_band_overlap(C.named_state("psi_G"), grid).verdict
    checks = [
        (tail_s >= 100 * tail_g, f"tail ratio {tail_s / tail_g:.3e}"),
        (vs == "localized", f"psi_S {vs}"),
        (vg == "not localized by flat bands", f"psi_G {vg}"),
    ]
    assert report(3, "Grover localization dichotomy", checks)


# 4 -------------------------------------------------------------------------

def test_4_grover_tensor_coincidence(long_runs):
    g = long_runs["grover_G"].window(0, 500).p0
    h = long_runs["tensorH2"].window(0, 500).p0
    dev = float(np.max(np.abs(g - h)))
    assert report(4, "Grover psi_G vs tensor Hadamard", [(dev <= 1e-8, f"max deviation {dev:.3e}")])


# 5 -------------------------------------------------------------------------

def test_5_fourier_surface():
    model = fit_fourier_surface(200)
    a = np.arange(142) / 200
    a = np.append(a, 1 / np.sqrt(2))
    phi = 2 * np.pi * np.arange(360) / 360
    surf = fourier_polya_surface(model, a, phi, 100)
    lo, hi = surf.minimum, surf.maximum
    st = C.named_state("psi_F", 0.3, 1.0)
    direct = evolve_collect(C.fourier_coin(), st, 200)[0].p0[1:]
    holdout = float(np.max(np.abs(model.p0(0.3, 1.0) - direct)))

    def at(ext, phi_ref):
        return abs(ext["a"] - 0.5) < 1e-12 and abs(wrap_phase(ext["phi"] - phi_ref)) < 1e-9

    checks = [
        (abs(lo["value"] - 0.314) <= 0.005 and at(lo, 7 * np.pi / 4),
         f"min {lo['value']:.4f} at a={lo['a']:.3f} phi={lo['phi'] / np.pi:.3f}pi"),
        (abs(hi["value"] - 0.671) <= 0.005 and at(hi, 3 * np.pi / 4),
         f"max {hi['value']:.4f} at a={hi['a']:.3f} phi={hi['phi'] / np.pi:.3f}pi (ref 0.671)"),
        (holdout <= 1e-10, f"hold-out error {holdout:.2e}"),
    ]
    assert report(5, "Fourier Polya surface", checks)


# 6 -------------------------------------------------------------------------

def _match(found, expected, tol=1e-6):
    """Every expected k is found once and nothing else is."""
    found = [np.asarray(k) for k in found]
    used = [False] * len(found)
    for e in expected:
        hits = [i for i, k in enumerate(found) if np.max(np.abs(wrap_phase(k - e))) <= tol]
        if len(hits) != 1:
            return False
        used[hits[0]] = True
    return all(used)


def test_6_spectral_ground_truth(grids):
    checks = []
    hp = np.pi / 2

    g = grids(C.grover_coin())
    spread = g.phase_spread()
    flat = g.flat_bands()
    checks.append((len(flat) == 2 and max(spread[flat]) <= 1e-10,
                   f"Grover flat spread {max(spread[flat]):.1e}"))
    k = g.momenta()
    disp = [j for j in range(4) if j not in flat]
    res = np.max(np.abs(np.cos(g.phases[..., disp]) + (np.cos(k[..., 0]) * np.cos(k[..., 1]))[..., None]))
    checks.append((res <= 1e-10, f"Grover dispersion residual {res:.1e}"))

    f = grids(C.fourier_coin())
    k = f.momenta()
    res = float(np.max(np.abs(fourier_implicit(k[..., 0, None], k[..., 1, None], f.phases))))
    checks.append((res <= 1e-9, f"Fourier implicit residual {res:.1e}"))

    # 1-D: k0 = alpha +- pi/2 for every band
    ok1 = True
    for alpha, beta in ((0.0, 0.0), (0.7, 0.3), (2.1, -1.2)):
        coin = C.unbiased_coin_1d(alpha, beta)
        rep = find_saddles(grids(coin))
        want = [np.array([wrap_phase(alpha + s)]) for s in (hp, -hp)]
        for band in range(2):
            ok1 &= _match([p.k for p in rep.points_of(band)], want)
        ok1 &= not rep.continua and len(rep.points) == 4
    checks.append((ok1, "1-D saddles alpha +- pi/2"))

    rep = find_saddles(g)
    want = [np.array([a, b]) for a in (hp, -hp) for b in (hp, -hp)]
    okg = not rep.continua and len(rep.points) == 8
    for band in disp:
        okg &= _match([p.k for p in rep.points_of(band)], want)
    checks.append((okg, f"Grover {len(rep.points)} points on bands {disp}"))

    rep = find_saddles(f)
    lines = sorted((round(c.fixed[0], 6), round(float(np.cos(np.median(c.phases))))) for c in rep.continua)
    line_err = max(min(abs(wrap_phase(c.fixed[0])), abs(wrap_phase(c.fixed[0] - np.pi))) for c in rep.continua)
    flat_along = max(float(np.ptp(np.cos(c.phases))) for c in rep.continua)
    okl = len(rep.continua) == 4 and line_err <= 1e-6 and flat_along < 1e-9
    okl &= sorted({(abs(round(c.fixed[0] / np.pi)), round(float(np.cos(c.phases[0])))) for c in rep.continua}) == [
        (0, -1), (0, 1), (1, -1), (1, 1)]
    checks.append((okl, f"Fourier lines {lines}"))
    pts = [np.array([a, b]) for a in (hp, -hp) for b in (np.pi / 4, -3 * np.pi / 4)]
    okp = len(rep.points) == 16
    for kk in pts:
        here = [p for p in rep.points if np.max(np.abs(wrap_phase(p.k - kk))) <= 1e-6]
        phases = np.sort(np.mod([p.omega for p in here], 2 * np.pi))
        okp &= len(here) == 4 and np.min(np.diff(phases)) > 1e-3
    checks.append((okp, f"Fourier {len(rep.points)} points"))
    assert report(6, "spectral ground truth at N=256", checks)


# 7 -------------------------------------------------------------------------

def test_7_oracle_equivalences():
    checks = []
    t = np.arange(0, 65)
    cases = [
        ("Grover psi_S", C.grover_coin(), C.named_state("psi_S")),
        ("Grover psi_G", C.grover_coin(), C.named_state("psi_G")),
        ("Fourier e1", C.fourier_coin(), C.basis_state(4, 0)),
        ("Fourier psi_F", C.fourier_coin(), C.named_state("psi_F", 0.5, -np.pi / 4)),
    ]
    for name, coin, st in cases:
        series = evolve_collect(coin, st, 64)[0]
        ks = kspace_return_amplitude(coin, st, series.t, 130)
        dev = float(np.max(np.abs(ks - series.p0)))
        # odd times vanish in both pictures
        odd = float(np.max(np.abs(kspace_return_amplitude(coin, st, t[1::2], 130))))
        checks.append((max(dev, odd) <= 1e-10, f"{name} {max(dev, odd):.1e}"))

    h = C.hadamard()
    sym = C.CoinState(np.array([1, 1j]) / np.sqrt(2))
    walk = ProductWalk(((h, sym), (h, sym)))
    prod = evolve_product(walk, 100)
    direct = evolve_collect(walk.joint_coin(), walk.joint_state(), 100)[0]
    dev = float(np.max(np.abs(prod.p0 - direct.p0)))
    checks.append((dev <= 1e-12, f"product vs direct {dev:.1e}"))

    for d in (1, 2, 3):
        a, _ = fit_decay_exponent(classical_return_series(d, 1000), WINDOW)
        checks.append((abs(a - d / 2) <= 0.05, f"classical d={d} {a:.4f}"))
    assert report(7, "oracle equivalences", checks)


# 8 -------------------------------------------------------------------------

def test_8_product_sum_criterion():
    checks = []
    t = np.arange(0, 200001, 2)
    for name, p in (("1/t", 1.0 / np.maximum(t, 1)), ("1/t^2", 1.0 / np.maximum(t, 1) ** 2)):
        p[0] = 1.0
        table = criterion_demo(ReturnSeries(t, p))
        ls, s = table.log_survival, table.partial_sum
        ok = bool(np.all(-2 * s <= ls) and np.all(ls <= -s))
        checks.append((ok, f"{name}: bound holds at all {ls.size} n"))

    # 1/t at even t: terms 1/(2j), S_n = (H_n)/2, 1 - P_n = Gamma(n+1/2)/(Gamma(1/2)Gamma(n+1))
    def s_n(n):
        return 0.5 * (digamma(n + 1) + np.euler_gamma)

    n = survival_cutoff(s_n, 1e-6)
    surv = float(np.exp(gammaln(n + 0.5) - gammaln(0.5) - gammaln(n + 1)))
    checks.append((surv < 1e-6, f"divergent: 1-P_n={surv:.2e} at n={n}"))
    # convergent 1/t^2: survival never drops below exp(-2 S_inf)
    floor = np.exp(-2 * np.pi**2 / 24)
    with pytest.raises(ValueError):
        survival_cutoff(lambda m: np.pi**2 / 24 * (1 - 1 / (m + 1)), 1e-6, n_max=2**40)
    checks.append((floor > 0.4, f"convergent: 1-P_n >= {floor:.3f} for all n"))
    assert report(8, "product vanishes iff sum diverges", checks)


# 9 -------------------------------------------------------------------------

def test_9_invariants(long_runs):
    checks = []
    worst = max(long_runs[name].metadata["norm_deviation"] for name in long_runs.walks)
    for d in (2, 3, 4, 5):
        worst = max(worst, long_runs.product(d).metadata["norm_deviation"])
    checks.append((worst <= 1e-10, f"norm deviation at t=1000 <= {worst:.1e}"))

    odd_ok = True
    for name, (coin, st) in long_runs.walks.items():
        s = init_state(coin, st)
        for t in range(1, 40):
            s = step(s, coin)
            if t % 2 and return_probability(s) != 0.0:
                odd_ok = False
    checks.append((odd_ok, "p0(odd t) == 0"))

    coin = C.tensor_coin([C.hadamard(), C.hadamard()])
    rng = np.random.default_rng(2024)
    ref = evolve_collect(coin, C.named_state("psi_S"), 200)[0].p0
    dev = 0.0
    for _ in range(10):
        st = C.random_state(4, rng)
        dev = max(dev, float(np.max(np.abs(evolve_collect(coin, st, 200)[0].p0 - ref))))
    checks.append((dev <= 1e-12, f"tensor state independence {dev:.1e}"))
    assert report(9, "invariant suite", checks)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
