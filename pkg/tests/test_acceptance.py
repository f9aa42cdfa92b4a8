"""Acceptance criteria 1-10, each with its tolerance and runtime budget.

Every test prints one line ``criterion N: PASS|FAIL (elapsed / budget) detail``.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import json
import math
import time

import numpy as np
import pytest

from ultraconv.cli import main as cli_main
from ultraconv.convolution import algebra_checks, criterion_iv, pair_value
from ultraconv.functions import Constant, Gaussian, HermiteGaussian, delta
from ultraconv.gs_spaces import normalized_gaussian, regularization_report
from ultraconv.parametrix import build_kernel, solve_weierstrass, verify_decay, verify_delta
from ultraconv.ultrapoly import build, inv_derivative, strip_check
from ultraconv.weights import RSequence, associated_detail, check_conditions, factorial, gevrey, subordinate


@pytest.fixture
def report(capsys):
    def emit(n, checks, elapsed, budget):
        ok = all(v for _, v in checks) and (budget is None or elapsed < budget)
        bad = [k for k, v in checks if not v]
        lim = "no limit" if budget is None else f"{budget:g}s"
        detail = "all checks hold" if not bad else "failed: " + ", ".join(bad)
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s / {lim}) {detail}")
        assert not bad, bad
        if budget is not None:
            assert elapsed < budget, f"runtime {elapsed:.2f}s exceeds {budget}s"
    return emit


def test_criterion_01_condition_suite(report):
    t0 = time.perf_counter()
    checks = []
    expected = {0.5: "quasianalytic", 1.0: "quasianalytic", 2.0: "non-quasianalytic"}
    for sigma, verdict in expected.items():
        M = gevrey(sigma, 256)
        rep = check_conditions(M)
        checks.append((f"M.1 sigma={sigma}", rep.m1))
        checks.append((f"M.2 fit sigma={sigma}", rep.m2.holds and rep.m2.c0 == 1.0
                       and abs(rep.m2.H - 2 ** sigma) <= 1e-12 * 2 ** sigma))
        # exhaustive: M_{p+q} <= H^{p+q} M_p M_q for p + q <= 60
        lv = M.log_values
        worst = max(lv[p + q] - (p + q) * math.log(rep.m2.H) - lv[p] - lv[q]
                    for p in range(61) for q in range(61 - p))
        checks.append((f"M.2 exhaustive sigma={sigma}", worst <= 1e-12))
        checks.append((f"quasianalyticity sigma={sigma}", rep.quasianalytic.verdict == verdict))
    report(1, checks, time.perf_counter() - t0, 1.0)


def test_criterion_02_associated_identity(report):
    t0 = time.perf_counter()
    checks = []
    for sigma in (0.5, 1.0, 2.0):
        # p_max = 4096 keeps the sup at rho = 50 away from the table end for sigma = 1/2
        M = gevrey(sigma, 4096)
        for q in (2, 3):
            Mq = M.power(q)
            for rho in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
                a, b = associated_detail(M, rho), associated_detail(Mq, rho ** q)
                checks.append((f"unsaturated sigma={sigma} q={q} rho={rho}", not (a.saturated or b.saturated)))
                checks.append((f"identity sigma={sigma} q={q} rho={rho}",
                               abs(b.value - q * a.value) <= 1e-10 * (1 + a.value)))
    report(2, checks, time.perf_counter() - t0, 1.0)


def _random_k(rng, n=64):
    kind = rng.integers(3)
    if kind == 0:
        steps = rng.uniform(0, 3, n)
    elif kind == 1:
        steps = rng.uniform(0, 1, n) * (rng.uniform(size=n) < 0.3) * 10  # plateaus and jumps
    else:
        steps = rng.exponential(1.0, n) * np.arange(n) / 8  # superlinear
    k = rng.uniform(0.1, 5) + np.cumsum(steps)
    k[-1] += 1.0
    return k


def test_criterion_03_subordinate(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260101)
    checks = []
    for i in range(20):
        k = _random_k(rng)
        kp = subordinate(RSequence(k)).values
        lp = np.concatenate([[0.0], np.cumsum(np.log(kp))])
        worst = max(lp[p + q] - (p + q) * math.log(2) - lp[p] - lp[q]
                    for p in range(61) for q in range(61 - p))
        checks.append((f"product inequality #{i}", worst <= 1e-12 * (1 + abs(lp[60]))))
        checks.append((f"k' <= k #{i}", bool(np.all(kp <= k))))
        checks.append((f"nondecreasing #{i}", bool(np.all(np.diff(kp) >= 0))))
    report(3, checks, time.perf_counter() - t0, 1.0)


def test_criterion_04_ultrapolynomial(report):
    t0 = time.perf_counter()
    P = build(factorial(), mode="relaxed", q=2, k=1.0, rprime=2.0)
    strip = strip_check(P, x_max=50.0)
    checks = [
        ("no real zero on [-50, 50]", strip.nonvanishing and strip.min_abs_real == 1.0),
        ("min |P| on the real grid attained at 0", strip.table[np.argmin(strip.table[:, 1]), 0] == 0.0),
        ("P(0) = 1", float(np.exp(P.log_abs_real(np.array([0.0])))[0]) == 1.0),
        ("fitted C' > 0", strip.C_prime > 0),
    ]
    ratios = [inv_derivative(P, float(x), n).bound_ratio for x in range(0, 11) for n in range(21)]
    checks.append(("bound_ratio finite for x <= 10, n <= 20", bool(np.all(np.isfinite(ratios)))))
    report(4, checks, time.perf_counter() - t0, 30.0)


@pytest.fixture(scope="module")
def P_default():
    return build(factorial())


def test_criterion_05_delta(report, P_default):
    t0 = time.perf_counter()
    P = P_default
    G = build_kernel(P, strip_check(P, x_max=20.0))
    checks = []
    for name, phi in (("centered", Gaussian(0.0, 1.0)), ("shifted", Gaussian(0.7, 1.0)),
                      ("odd-weighted", HermiteGaussian(1, 1.0))):
        r = verify_delta(G, P, phi, tol=1e-6)
        checks.append((f"residual {name}", r.residual <= 1e-6))
        checks.append((f"route agreement {name}", r.route_gap <= 1e-7))
    checks.append(("integral of G", abs(G.values.sum() * G.dx - 1.0) <= 1e-8))
    lhs = np.sum(G.values ** 2) * G.dx
    gh = np.exp(G.log_ghat)
    rhs = (gh[0] ** 2 + 2 * np.sum(gh[1:] ** 2)) * G.dxi / (2 * math.pi)
    checks.append(("Parseval", abs(lhs - rhs) <= 1e-8 * rhs))
    report(5, checks, time.perf_counter() - t0, 60.0)


def test_criterion_06_decay(report, P_default):
    t0 = time.perf_counter()
    P = P_default
    G = build_kernel(P, strip_check(P, x_max=20.0))
    fit = verify_decay(G, t=0.25, alpha_cap=6, beta_cap=6)
    checks = [
        ("C table complete", len(fit.table) == 49),
        ("C table finite", all(math.isfinite(c) for _, _, c in fit.table)),
        ("sigma_t finite", math.isfinite(fit.sigma_t)),
        ("not saturated", not fit.saturated),
    ]
    report(6, checks, time.perf_counter() - t0, 60.0)


def test_criterion_07_weierstrass(report, P_default):
    t0 = time.perf_counter()
    P = P_default
    G = build_kernel(P, strip_check(P, x_max=20.0))
    damped = solve_weierstrass(G, P, a=0.5, b=3, tau=1.0, N_terms=12, window=(-4.0, 4.0))
    eigen = solve_weierstrass(G, P, b=3, N_terms=0, undamped=True)
    checks = [("damped residual <= 1e-4", damped.residual <= 1e-4),
              ("eigenfunction residual <= 1e-10", eigen.residual <= 1e-10)]
    report(7, checks, time.perf_counter() - t0, 120.0)


def test_criterion_08_regularization(report):
    t0 = time.perf_counter()
    M = factorial()
    rep = regularization_report(Gaussian(), normalized_gaussian(), Gaussian(), M, M, h=0.25,
                                ladder=(1, 2, 4, 8, 16))
    checks = [("decreasing (factor-2 noise tolerance)", rep.monotone_within_2),
              ("distance shrinks along the ladder", rep.distances[-1] < rep.distances[0] / 100),
              ("strictly decreasing", rep.strictly_decreasing)]
    report(8, checks, time.perf_counter() - t0, 30.0)


def test_criterion_09_convolution(report, P_default):
    t0 = time.perf_counter()
    g, one = Gaussian(), Constant(1.0)
    checks = [
        ("(gaussian, gaussian) exists", criterion_iv(g, g).verdict == "exists"),
        ("(const 1, gaussian) exists", criterion_iv(one, g).verdict == "exists"),
        ("(const 1, const 1) fails", criterion_iv(one, one).verdict == "fails"),
        ("pair gaussians = pi/sqrt 3", abs(pair_value(g, g, g) - math.pi / math.sqrt(3)) <= 1e-8 * math.pi),
        ("pair const, gaussian = pi", abs(pair_value(one, g, g) - math.pi) <= 1e-8 * math.pi),
    ]
    for name, f1, f2 in (("gaussians", Gaussian(0.3, 1.0), Gaussian(-0.5, 0.7)), ("delta", delta(0.5), g)):
        rec = algebra_checks(f1, f2, P_default, g)
        checks.append((f"commutativity {name}", rec.commutativity <= 1e-5 * rec.scale))
        checks.append((f"P(D) interchange {name}", rec.interchange <= 1e-5 * rec.scale))
        checks.append((f"all algebra checks {name}", rec.passed(1e-5)))
    report(9, checks, time.perf_counter() - t0, 120.0)


def test_criterion_10_reproducible(report, tmp_path, monkeypatch):
    t0 = time.perf_counter()
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seq.generator=factorial\nseq.pmax=256\ngrid.x_max=32.0\ntol.delta=1e-6\nrun.seed=3\n")
    out = tmp_path / "results"
    monkeypatch.setenv("QK_OUTPUT_DIR", str(out))
    commands = [
        ["seq", "check", "--gevrey", "1", "--pmax", "256", "--q", "2"],
        ["seq", "subordinate", "--random", "64"],
        ["upoly", "strip"],
        ["param", "delta", "--phi", "gaussian(0,1)"],
        ["param", "build"],
        ["gs", "seminorm", "--phi", "gaussian(0,1)"],
        ["conv", "check", "--f1", "const(1)", "--f2", "const(1)"],
    ]

    def run_all():
        codes = [cli_main(c + ["--config", str(cfg)]) for c in commands]
        files = {p.name: p.read_bytes() for p in sorted(out.iterdir()) if not p.name.endswith(".meta.json")}
        return codes, files

    codes1, first = run_all()
    codes2, second = run_all()
    records = [n for n in first if n.endswith(".json")]
    embeds = all(json.loads(first[n])["config"]["seq"] == ["seq.generator=factorial", "seq.pmax=256"]
                 for n in records)
    checks = [
        ("exit status 0", codes1 == codes2 == [0] * len(commands)),
        ("one record per command", len(records) == len(commands)),
        ("records embed the resolved config", embeds),
        ("byte-identical outputs", first == second),
        ("timestamps only in sidecars", all(b"created" not in v for v in first.values())),
    ]
    report(10, checks, time.perf_counter() - t0, None)
