"""Convolution of concrete descriptors: quadrature, the product-integrability test, pairings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvolvablePairError, TruncationError
from .functions import Gaussian, HermiteGaussian, Reflect, TestFunction, describe
from .ultrapoly import multiplier_apply

DROP = 46.0  # integrand below e^-46 of its peak is ignored
R0 = 64.0
R_MAX = 2.0 ** 16
PAIR_FLOOR = 1e-12  # absolute rounding allowance for pairings whose true value is near 0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


# ---------------------------------------------------------------------------
# 1-D log-domain quadrature


def _gl_nodes(a: float, b: float, breaks, n_panels: int):
    """Composite Gauss-Legendre nodes on [a, b] with panel edges at the breakpoints."""
    edges = [a] + sorted(t for t in breaks if a < t < b) + [b]
    xs, ws = [], []
    total = b - a
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, int(math.ceil(n_panels * (hi - lo) / total)))
        e = np.linspace(lo, hi, k + 1)
        mid = 0.5 * (e[1:] + e[:-1])[:, None]
        half = 0.5 * (e[1:] - e[:-1])[:, None]
        xs.append((mid + half * _GL_X).ravel())
        ws.append((half * _GL_W).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def integrate_log(fn, breaks=(), center: float = 0.0, what: str = "integrand",
                  abs_floor: float | None = None, density: float = 16.0, panel: float = 0.25,
                  r_max: float = R_MAX):
    """(sign, log|int g|) over R, where fn(y) returns (log|g(y)|, sign g(y)).

    With ``abs_floor`` set, the rounding estimate 64 eps int |g| must stay below
    max(1e-6 |int g|, abs_floor), else cancellation has eaten the result (TruncationError).

    The support is found by scanning log_abs on [-R, R] around ``center``; R grows until the
    integrand has dropped DROP below its peak at both ends, else the integral is declared divergent.
    """
    R = R0
    while True:
        y = center + np.linspace(-R, R, int(density * R) + 1)
        L, _ = fn(y)
        L = np.where(np.isnan(L), -np.inf, L)
        peak = float(np.max(L))
        if peak == -math.inf:
            return 0.0, -math.inf
        if peak == math.inf:
            raise NonConvolvablePairError(f"{what} is infinite at y = {y[np.argmax(L)]:.4g}")
        live = np.nonzero(L > peak - DROP)[0]
        if live[0] > 0 and live[-1] < len(y) - 1:
            break
        R *= 4
        if R > r_max:
            raise NonConvolvablePairError(f"{what} does not decay: still within e^{DROP:.0f} of its peak at |y| = {R / 4:g}")
    h = y[1] - y[0]
    a, b = y[max(live[0] - 1, 0)] - h, y[min(live[-1] + 1, len(y) - 1)] + h
    n_panels = max(64, int(math.ceil((b - a) / panel)))
    xs, ws = _gl_nodes(a, b, breaks, n_panels)
    Lq, sq = fn(xs)
    Lq = np.where(np.isnan(Lq), -np.inf, Lq)
    top = max(peak, float(np.max(Lq)))
    terms = ws * np.exp(Lq - top)
    tot = float(np.sum(sq * terms))
    if abs_floor is not None:
        noise = 64 * np.finfo(float).eps * float(np.sum(terms))
        if noise * math.exp(min(top, 700.0)) > max(1e-6 * abs(tot) * math.exp(min(top, 700.0)), abs_floor):
            raise TruncationError(f"{what}: cancellation, rounding estimate e^{math.log(noise) + top:.1f}"
                                  f" against a result of size e^{math.log(abs(tot) + 1e-300) + top:.1f}")
    if tot == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, tot), math.log(abs(tot)) + top


def _sign(f: TestFunction):
    def s(y):
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.sign(f(y))
        return np.nan_to_num(v)
    return s


def convolve_log(f: TestFunction, g: TestFunction, x, abs_floor: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(sign, log|f * g|) at the points x; (f * g)(x) = int f(y) g(x - y) dy."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pf, pg = f.point_masses(), g.point_masses()
    if pf is not None and pg is not None:
        raise DomainError("a convolution of point masses is not a function")
    if pg is not None:
        f, g, pf, pg = g, f, pg, None
    sgn = np.zeros(len(x))
    lg = np.full(len(x), -math.inf)
    if pf is not None:
        vals = sum(w * g(x - x0) for x0, w in pf)
        with np.errstate(divide="ignore"):
            return np.sign(vals), np.log(np.abs(vals))
    sf, sg = _sign(f), _sign(g)
    kf, kg = f.kinks(), g.kinks()
    for i, xv in enumerate(x):
        fn = lambda y, xv=xv: (f.log_abs(y) + g.log_abs(xv - y), sf(y) * sg(xv - y))
        br = tuple(kf) + tuple(xv - k for k in kg)
        sgn[i], lg[i] = integrate_log(fn, br, center=0.5 * xv, what="convolution integrand",
                                      abs_floor=abs_floor)
    return sgn, lg


def convolve(f: TestFunction, g: TestFunction, x) -> np.ndarray:
    s, lg = convolve_log(f, g, x)
    with np.errstate(over="ignore"):
        return s * np.exp(lg)


# ---------------------------------------------------------------------------
# criterion (iv)


def default_probes() -> list:
    gs = [Gaussian(0.0, 1.0), Gaussian(1.0, 0.5), Gaussian(-1.0, 2.0), Gaussian(2.0, 0.7),
          Gaussian(-0.5, 1.5), Gaussian(0.3, 0.4)]
    pairs = [(gs[i], gs[(i + 1) % 6]) for i in range(6)]
    pairs += [(HermiteGaussian(1, 1.0), gs[0]), (gs[2], HermiteGaussian(2, 1.2))]
    return pairs


@dataclass(frozen=True)
class ProbeRecord:
    phi: str
    psi: str
    product_integral: float
    tail_exponent: float
    fit_residual: float
    integrable: bool | None  # None: inconclusive
    x_extent: float
    note: str = ""
    tail_rows: tuple = field(default=(), repr=False)  # (x, log|h|) on the fitted tail

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "tail_rows"}
        d["tail_csv"] = "x,log_abs_h\n" + "".join(f"{a!r},{b!r}\n" for a, b in self.tail_rows)
        return d


@dataclass(frozen=True)
class ConvolvabilityReport:
    f1: str
    f2: str
    probes: tuple
    verdict: str  # exists | fails | inconclusive
    witnesses: tuple

    def to_dict(self) -> dict:
        return {"f1": self.f1, "f2": self.f2, "verdict": self.verdict, "witnesses": list(self.witnesses),
                "probes": [p.to_dict() for p in self.probes]}


def _tail_fit(x, L):
    """Slope of log|h| against |x| on the outer quarter of each side; the worse side wins."""
    X = float(np.max(np.abs(x)))
    worst, res = -math.inf, 0.0
    rows = []
    for side in (-1, 1):
        m = (side * x >= 0.75 * X) & np.isfinite(L)
        if m.sum() < 4:
            continue  # log|h| = -inf: identically zero there
        t, v = np.abs(x[m]), L[m]
        A = np.vstack([t, np.ones_like(t)]).T
        coef, *_ = np.linalg.lstsq(A, v, rcond=None)
        r = float(np.sqrt(np.mean((A @ coef - v) ** 2)) / max(1.0, float(np.ptp(v)), abs(float(np.mean(v)))))
        if coef[0] > worst:
            worst, res = float(coef[0]), r
        rows += list(zip(x[m].tolist(), v.tolist()))
    return worst, res, tuple(rows)


def _probe(f1: TestFunction, f2: TestFunction, phi: TestFunction, psi: TestFunction, spacing: float,
           max_doublings: int = 8) -> ProbeRecord:
    f1r = Reflect(f1)
    cache: dict = {}

    def logh(xs):
        new = [v for v in xs if v not in cache]
        if new:
            a = np.array(new)
            s1, l1 = convolve_log(phi, f1r, a)
            s2, l2 = convolve_log(psi, f2, a)
            for v, s, lv in zip(new, s1 * s2, l1 + l2):
                cache[v] = (s, lv)
        return (np.array([cache[v][0] for v in xs]), np.array([cache[v][1] for v in xs]))

    X = 4.0
    prev = None
    tail, res, rows = math.nan, math.nan, ()
    for _ in range(max_doublings + 1):
        n = int(round(X / spacing))
        xs = np.arange(-n, n + 1) * spacing
        s, L = logh(xs.tolist())
        tail, res, rows = _tail_fit(xs, L)
        with np.errstate(over="ignore"):
            vals = s * np.exp(L)
        integral = float(np.trapezoid(vals, xs))
        if tail >= 0 and res < 0.05:
            return ProbeRecord(describe(phi), describe(psi), integral, tail, res, False, X,
                               "non-integrable tail", rows)
        if prev is not None and tail < -0.05 and abs(integral - prev) <= 0.01 * max(abs(integral), 1e-300):
            return ProbeRecord(describe(phi), describe(psi), integral, tail, res, True, X, "", rows)
        if prev is not None and tail == -math.inf and integral == prev:
            return ProbeRecord(describe(phi), describe(psi), integral, tail, res, True, X, "zero tail", rows)
        prev = integral
        X *= 2
    return ProbeRecord(describe(phi), describe(psi), integral, tail, res, None, X / 2,
                       "integral did not settle to 1% within the doubling budget", rows)


def criterion_iv(f1: TestFunction, f2: TestFunction, probes=None, spacing: float = 0.125) -> ConvolvabilityReport:
    """Probe (phi * f1 reflected)(psi * f2) in L^1 over a finite battery of (phi, psi)."""
    probes = default_probes() if probes is None else list(probes)
    if not probes:
        raise DomainError("empty probe set")
    recs = []
    for phi, psi in probes:
        try:
            recs.append(_probe(f1, f2, phi, psi, spacing))
        except NonConvolvablePairError as e:
            recs.append(ProbeRecord(describe(phi), describe(psi), math.nan, math.nan, math.nan, None, math.nan,
                                    f"not quadrature-computable: {e}"))
    bad = [r for r in recs if r.integrable is False]
    if bad:
        verdict = "fails"
    elif all(r.integrable for r in recs):
        verdict = "exists"
    else:
        verdict = "inconclusive"
    wit = tuple(f"({r.phi}, {r.psi})" for r in (bad or [r for r in recs if r.integrable is None]))
    return ConvolvabilityReport(describe(f1), describe(f2), tuple(recs), verdict, wit)


# ---------------------------------------------------------------------------
# pairings


def pair_value(f1: TestFunction, f2: TestFunction, phi: TestFunction, report: ConvolvabilityReport | None = None,
               acknowledge: bool = False) -> float:
    """<f1 * f2, phi> = iint f1(x) f2(y) phi(x + y) dx dy, point masses summed exactly.

    With ``report`` given its verdict must be "exists" unless ``acknowledge`` is set.
    """
    if report is not None and report.verdict != "exists" and not acknowledge:
        raise DomainError(f"criterion (iv) verdict is {report.verdict}; pass acknowledge=True to attempt anyway")
    phir = Reflect(phi)
    p1 = f1.point_masses()
    # inner(x) = int f2(y) phi(x + y) dy = (f2 * phi reflected)(-x)
    if p1 is not None:
        xs = np.array([x0 for x0, _ in p1])
        s, lg = convolve_log(f2, phir, -xs, abs_floor=PAIR_FLOOR)
        return float(sum(w * si * math.exp(li) for (_, w), si, li in zip(p1, s, lg) if li > -math.inf))

    def inner(x):
        return convolve_log(f2, phir, -np.atleast_1d(x), abs_floor=PAIR_FLOOR)

    s1 = _sign(f1)

    def fn(x):
        s, lg = inner(x)
        return f1.log_abs(x) + lg, s1(x) * s

    br = tuple(f1.kinks())
    # inner is a smoothed function: a coarser scan and wider panels suffice
    s, lg = integrate_log(fn, br, what="outer pairing integrand", abs_floor=PAIR_FLOOR, density=4.0, panel=0.5,
                          r_max=1024.0)
    return s * math.exp(lg) if lg > -math.inf else 0.0


def pair_value_spectral(f1: TestFunction, f2: TestFunction, phi: TestFunction, xi_max: float = 60.0,
                        n: int = 6001) -> float:
    """(2 pi)^-1 int f1^(xi) f2^(xi) phi^(-xi) d xi, assembled in the log domain."""
    for f in (f1, f2, phi):
        if not f.has_fourier():
            raise DomainError(f"{describe(f)} has no Fourier oracle")
    xi = np.linspace(-xi_max, xi_max, n)
    L = f1.log_abs_fourier(xi) + f2.log_abs_fourier(xi) + phi.log_abs_fourier(-xi)
    edge = max(L[0], L[-1])
    top = float(np.max(L))
    if edge > top - 40:
        raise DomainError("the spectral pairing integrand is not negligible at the band edge")
    ph = f1.fourier_phase(xi) * f2.fourier_phase(xi) * phi.fourier_phase(-xi)
    v = np.exp(L - top) * ph
    return float((np.trapezoid(v, xi) / (2 * math.pi)).real * math.exp(top))


@dataclass(frozen=True)
class AlgebraRecord:
    commutativity: float
    interchange: float  # spread of the three spectral expressions
    routes: float  # quadrature against spectral pairing, without P
    pointwise: float  # relative, max over x of |P(D)(f1 * f2) - f1 * P(D) f2|
    quadrature_interchange: float | None  # spatial <f1 * P(D) f2, phi> against <f1 * f2, P(-D) phi>
    scale: float
    values: dict

    def passed(self, rel: float = 1e-5) -> bool:
        worst = max(self.commutativity, self.interchange, self.routes)
        ok = worst <= rel * self.scale and self.pointwise <= rel  # NaN fails
        if self.quadrature_interchange is not None:
            ok = ok and self.quadrature_interchange <= rel * self.scale
        return bool(ok)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def algebra_checks(f1: TestFunction, f2: TestFunction, P, phi: TestFunction, x_probe=None) -> AlgebraRecord:
    """Commutativity and the P(D) interchange on one test function.

    P = None is the identity multiplier. The interchange compares <f1 * P(D) f2, phi>,
    <P(D) f1 * f2, phi> and <f1 * f2, P(-D) phi> through the spectral pairing. When f1 is a
    point mass the pointwise identity P(D)(f1 * f2) = f1 * P(D) f2 is checked at x_probe, and
    the pairings are also done by spatial quadrature if P(D) f2 stays inside double range.
    """
    from .functions import MultiplierApplied, Shift

    base = pair_value(f1, f2, phi)
    swapped = pair_value(f2, f1, phi)
    comm = abs(base - swapped)
    vals = {"pair": base, "pair_swapped": swapped}
    spectral_ok = all(f.has_fourier() for f in (f1, f2, phi))
    routes = abs(base - pair_value_spectral(f1, f2, phi)) if spectral_ok else 0.0
    if P is None:
        return AlgebraRecord(comm, 0.0, routes, 0.0, None, max(1.0, abs(base)),
                             {**vals, "a": base, "b": base, "c": base})
    a = pair_value_spectral(f1, MultiplierApplied(P, f2), phi)
    b = pair_value_spectral(MultiplierApplied(P, f1), f2, phi)
    # P is even, so P(-D) phi has transform P(xi) phi^(xi)
    c = pair_value_spectral(f1, f2, MultiplierApplied(P, phi))
    inter = max(abs(a - b), abs(a - c), abs(b - c))
    scale = max(1.0, abs(a), abs(b), abs(c))
    point, quad_inter = 0.0, None
    pm = f1.point_masses()
    if pm is not None:
        xp = np.linspace(-2, 2, 9) if x_probe is None else np.asarray(x_probe, dtype=float)
        lhs = sum(w * multiplier_apply(P, Shift(f2, x0), xp) for x0, w in pm)
        rhs = sum(w * multiplier_apply(P, f2, xp - x0) for x0, w in pm)
        point = float(np.max(np.abs(lhs - rhs))) / max(1e-300, float(np.max(np.abs(rhs))))
        try:
            qa = pair_value(f1, MultiplierApplied(P, f2), phi)
            qc = pair_value(f1, f2, MultiplierApplied(P, phi))
            quad_inter = max(abs(qa - a), abs(qc - a))
            vals.update(quad_a=qa, quad_c=qc)
        except TruncationError:
            quad_inter = None  # P(D) f2 leaves double range; only the spectral route is meaningful
    return AlgebraRecord(comm, inter, routes, point, quad_inter, scale, {**vals, "a": a, "b": b, "c": c})
