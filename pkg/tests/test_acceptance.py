"""Exit criteria. Each test prints one PASS/FAIL line (also collected into
the terminal summary). Statistical criteria use seeds 0..19, fixed before
any result was looked at.
"""

import math
import time

import numpy as np
import pytest

import conftest
from oracles import discrete_gaussian_pmf, stationary_distribution, total_variation, transition_matrix
from ntru_mcmc import security
from ntru_mcmc.cli import main
from ntru_mcmc.diagnostics import analyze_mixing, fit_mixing_exponent
from ntru_mcmc.ntru import KeygenPolicy, decrypt, decryption_margin, encrypt, keygen, random_ternary
from ntru_mcmc.polyring import NotInvertible, RingElement, RingParams, add, invert_mod, mul, reduce_mod
from ntru_mcmc.sampler import GaussianConfig, default_proposal_sigma, run_chain

SEEDS = range(20)

TABLE1 = {
    (256, 2.5): 63.57, (256, 3.0): 53.44, (256, 3.5): 44.87, (256, 4.0): 37.44, (256, 4.5): 30.90,
    (512, 2.5): 165.02, (512, 3.0): 144.75, (512, 3.5): 127.61, (512, 4.0): 112.77, (512, 4.5): 99.67,
    (768, 3.5): 224.87, (768, 4.0): 202.60, (768, 4.5): 182.96,
    (1024, 4.0): 301.87, (1024, 4.5): 275.68, (1024, 5.0): 252.25,
}
TIME_COLUMN = {256: (6.43e8, 8.81), 512: (5.78e9, 9.76), 768: (2.08e10, 10.32), 1024: (5.14e10, 10.71)}


def report(cid: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def median_conv(values):
    """Median with non-converged chains ranked above every finite value."""
    return float(np.median([math.inf if v is None else v for v in values]))


def test_c1_table_reproduction(capsys):
    t0 = time.perf_counter()
    code = main(["table", "--builtin-table1"])
    out = capsys.readouterr().out
    elapsed = time.perf_counter() - t0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    errs = {(int(r[1]), float(r[2])): abs(float(r[4]) - TABLE1[(int(r[1]), float(r[2]))]) for r in rows}
    worst = max(errs.values())
    ok = code == 0 and len(rows) == 16 and set(errs) == set(TABLE1) and worst <= 0.05 and elapsed < 1.0
    with capsys.disabled():
        report("C1 Table 1 log10 security", ok, f"16 rows, max |err| = {worst:.4f} (tol 0.05), {elapsed:.3f}s")


def test_c2_cost_model():
    ratios = [t / (n ** 3 * math.log2(n)) for n, (t, _) in TIME_COLUMN.items()]
    kappa = round(sum(ratios) / len(ratios), 3)
    problems = []
    for n, (t_pub, log_pub) in TIME_COLUMN.items():
        t = security.time_complexity(n, kappa)
        if f"{t:.2e}" != f"{t_pub:.2e}":
            problems.append(f"N={n}: {t:.2e} vs {t_pub:.2e}")
        if abs(math.log10(t) - log_pub) > 0.01:
            problems.append(f"N={n}: log10 {math.log10(t):.3f} vs {log_pub}")
    ok = not problems and kappa == security.DEFAULT_KAPPA
    report("C2 cost model", ok,
           f"kappa re-derived = {kappa} (ratios {', '.join(f'{r:.4f}' for r in ratios)}); "
           + ("all 4 rows match to 3 s.f." if not problems else "; ".join(problems)))


def test_c3_stationarity():
    t0 = time.perf_counter()
    exact = {}
    for sigma in (1.0, 2.5, 4.0):
        support, T = transition_matrix(sigma, default_proposal_sigma(1, sigma))
        exact[sigma] = total_variation(stationary_distribution(T), discrete_gaussian_pmf(sigma, support))
    sigma = 2.5
    _, trace = run_chain(GaussianConfig(N=1, sigma=sigma, steps=1_000_000, burn_in=1000, seed=0),
                         keep_positions=True)
    xs = trace.positions[trace.burn_in:, 0]
    K = max(math.ceil(10 * sigma), int(np.abs(xs).max()))
    support = np.arange(-K, K + 1)
    emp = np.bincount(xs + K, minlength=len(support)) / len(xs)
    tv_emp = total_variation(emp, discrete_gaussian_pmf(sigma, support))
    elapsed = time.perf_counter() - t0
    ok = max(exact.values()) < 1e-6 and tv_emp < 0.01 and elapsed < 30
    report("C3 stationarity", ok,
           "exact TV " + ", ".join(f"s={s}: {v:.1e}" for s, v in exact.items())
           + f" (tol 1e-6); empirical 1e6-step TV = {tv_emp:.4f} (tol 0.01); {elapsed:.1f}s")


def test_c4_norm_concentration():
    means = [run_chain(GaussianConfig(N=1024, sigma=4.0, seed=s))[1].mean_norm() for s in SEEDS]
    inside = sum(125 <= m <= 135 for m in means)
    rel = {}
    for (n, sigma) in TABLE1:
        per_seed = [run_chain(GaussianConfig(N=n, sigma=sigma, seed=s))[1].mean_norm() for s in range(10)]
        rel[(n, sigma)] = float(np.median(per_seed)) / (sigma * math.sqrt(n)) - 1
    worst_cfg = max(rel, key=lambda k: abs(rel[k]))
    ok_a = inside >= 18
    ok_b = all(abs(v) <= 0.05 for v in rel.values())
    report("C4 norm concentration", ok_a and ok_b,
           f"N=1024 s=4.0: {inside}/20 seeds in [125,135] (need 18; range {min(means):.1f}-{max(means):.1f}); "
           f"Table 1 configs median rel. error worst {rel[worst_cfg]:+.3f} at {worst_cfg} (tol 0.05)")


def test_c5_convergence_ordering():
    conv = {}
    for sigma in (4.2, 4.5):
        conv[sigma] = [analyze_mixing(run_chain(GaussianConfig(N=1024, sigma=sigma, seed=s))[1]) for s in SEEDS]
    m42, m45 = median_conv(conv[4.2]), median_conv(conv[4.5])
    ok = m45 < m42 and 2500 <= m42 <= 5500
    nc = {s: sum(v is None for v in vals) for s, vals in conv.items()}
    report("C5 convergence ordering", ok,
           f"median conv s=4.2: {m42} ({nc[4.2]} not converged), s=4.5: {m45} ({nc[4.5]} not converged); "
           "need s=4.5 < s=4.2 and s=4.2 in [2500, 5500]")


def test_c6_mixing_scaling():
    t0 = time.perf_counter()
    medians = {}
    for n in (64, 128, 256, 512):
        medians[n] = median_conv(
            [analyze_mixing(run_chain(GaussianConfig(N=n, sigma=3.5, seed=s))[1]) for s in range(10)])
    elapsed = time.perf_counter() - t0
    finite = all(math.isfinite(v) and v > 0 for v in medians.values())
    slope = fit_mixing_exponent([(n, int(v)) for n, v in medians.items()]) if finite else math.nan
    ok = finite and slope <= 2.5 and elapsed < 300
    report("C6 mixing scaling", ok,
           "median conv " + ", ".join(f"N={n}: {v}" for n, v in medians.items())
           + (f"; slope {slope:.3f} (tol <= 2.5)" if finite else "; slope undefined (non-converged medians)")
           + f"; {elapsed:.1f}s")


def test_c7_ntru_roundtrip():
    params = RingParams(256, 2048, 3)
    kp = keygen(params, KeygenPolicy(), seed=1)
    rng = np.random.default_rng(2024)
    good = 0
    for _ in range(1000):
        m, r = random_ternary(256, rng), random_ternary(256, rng)
        good += decrypt(kp, encrypt(kp.h, m, r, params)) == m
    bad_kp = keygen(params, KeygenPolicy(key_sigma=20.0, margin_check=False), seed=1)
    failures = 0
    for _ in range(100):
        m, r = random_ternary(256, rng), random_ternary(256, rng)
        failures += decrypt(bad_kp, encrypt(bad_kp.h, m, r, params)) != m
    report("C7 NTRU round-trip", good == 1000 and failures >= 1,
           f"{good}/1000 decrypted with margin check; negative control: {failures}/100 failures")


def _rand(rng, N, bound):
    return RingElement(tuple(int(v) for v in rng.integers(-bound, bound + 1, N)))


def test_c8_ring_properties():
    rng = np.random.default_rng(8)
    failures = {k: 0 for k in ("commutative", "associative", "distributive", "wraparound",
                               "homomorphism", "inverse")}
    inverses_checked = 0
    for _ in range(1000):
        N = int(rng.choice([4, 16, 256]))
        a, b, c = (_rand(rng, N, 1000) for _ in range(3))
        failures["commutative"] += mul(a, b) != mul(b, a)
        failures["associative"] += mul(mul(a, b), c) != mul(a, mul(b, c))
        failures["distributive"] += mul(a, add(b, c)) != add(mul(a, b), mul(a, c))
        k = int(rng.integers(0, N))
        failures["wraparound"] += mul(RingElement.monomial(N, k), RingElement.monomial(N, N - k)) != RingElement.one(N)
        m = int(rng.choice([3, 2048, 12289]))
        failures["homomorphism"] += reduce_mod(mul(a, b), m) != reduce_mod(mul(reduce_mod(a, m), reduce_mod(b, m)), m)
        while True:
            f = _rand(rng, N, 2)
            try:
                g = invert_mod(f, m)
            except NotInvertible:
                continue
            break
        inverses_checked += 1
        failures["inverse"] += reduce_mod(mul(f, g), m) != RingElement.one(N)
    total = sum(failures.values())
    report("C8 ring algebra", total == 0,
           f"1000 cases x 6 properties ({inverses_checked} inversions), failures: {failures}")


def _run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_c9_determinism(tmp_path, capsys):
    mismatches = []
    outputs = {}
    for rep in ("a", "b"):
        d = tmp_path / rep
        d.mkdir()
        res = {}
        res["sample"] = _run_cli(["sample", "--n", "128", "--sigma", "3.0", "--steps", "4000", "--seed", "5",
                                  "--out", str(d / "t.csv")], capsys)
        res["analyze"] = _run_cli(["analyze", "--trace", str(d / "t.csv"), "--window", "200"], capsys)
        res["table"] = _run_cli(["table", "--builtin-table1"], capsys)
        res["keygen"] = _run_cli(["keygen", "--n", "64", "--seed", "9", "--out-prefix", str(d / "k")], capsys)
        res["keygen"] = (res["keygen"][0], res["keygen"][1].replace(str(d), ""))
        res["roundtrip"] = _run_cli(["roundtrip", "--n", "64", "--trials", "50", "--seed", "9"], capsys)
        files = {p.name: p.read_bytes() for p in d.iterdir()}
        outputs[rep] = (res, files)
    for key in outputs["a"][0]:
        if outputs["a"][0][key] != outputs["b"][0][key]:
            mismatches.append(f"{key} stdout")
    if outputs["a"][1] != outputs["b"][1]:
        mismatches.append("written files")
    spec_lines = "dims=32,64\nsigmas=2.0,3.0\nseeds=1,2,3\nsteps=2000\n"
    sweeps = {}
    for jobs in (1, 3):
        out_dir = tmp_path / f"sweep{jobs}"
        spec = tmp_path / f"spec{jobs}.txt"
        spec.write_text(spec_lines + f"output_dir={out_dir}\n")
        _run_cli(["sweep", "--spec", str(spec), "--jobs", str(jobs)], capsys)
        sweeps[jobs] = {p.name: p.read_bytes() for p in out_dir.iterdir()}
    if sweeps[1] != sweeps[3]:
        mismatches.append("sweep --jobs 1 vs 3")
    with capsys.disabled():
        report("C9 determinism", not mismatches,
               "sample/analyze/table/keygen/roundtrip twice + sweep jobs 1 vs 3: "
               + ("byte-identical" if not mismatches else f"mismatch in {mismatches}"))
