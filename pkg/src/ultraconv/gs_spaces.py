"""Gelfand-Shilov seminorms, the growth test for f * phi, and the regularising operators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .convolution import _gl_nodes, convolve_log
from .errors import DomainError, NonConvolvablePairError
from .functions import Dilate, Gaussian, HermiteGaussian, Product, TestFunction, describe
from .weights import RSequence, WeightSequence, associated, modulate

ALPHA_CAP = 60
BOX0 = 8.0
BOX_MAX = 1024.0
GROWTH = math.log(1.1)  # 10 % per expansion
EDGE = math.log(1e-3)


# ---------------------------------------------------------------------------
# seminorms


@dataclass(frozen=True)
class SeminormValue:
    value: float  # math.inf is the divergence marker
    attained_at: tuple  # (alpha, x)
    truncation: tuple  # (alpha_cap, x_box)
    saturated: bool
    expansions: int
    table: tuple = field(default=(), repr=False)  # (alpha, sup_x weighted value)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> dict:
        return {"value": self.value if self.finite else "inf", "attained_at": list(self.attained_at),
                "truncation": list(self.truncation), "saturated": self.saturated, "expansions": self.expansions}

    def csv_rows(self):
        yield ("alpha", "sup_x")
        for a, v in self.table:
            yield (a, v)


def _weights(M: WeightSequence, A: WeightSequence, h: float | None, r: RSequence | None, n: int):
    """(log coefficient per alpha, weight log-function of |x|)."""
    if (h is None) == (r is None):
        raise DomainError("give exactly one of h (Beurling) or r (Roumieu)")
    if n > M.p_max or n > A.p_max:
        raise DomainError(f"alpha_cap {n} exceeds the sequence tables")
    if h is not None:
        if not h > 0:
            raise DomainError("h must be positive")
        coef = np.arange(n + 1) * math.log(h) - M.log_values[: n + 1]
        return coef, lambda ax: associated(A, h * ax)
    if len(r) < n:
        raise DomainError("the sequence r is shorter than alpha_cap")
    logr = np.concatenate([[0.0], np.cumsum(np.log(r.values[:n]))])
    B = modulate(A, r.values[: A.p_max])
    return -M.log_values[: n + 1] - logr, lambda ax: associated(B, ax)


def _log_derivs(phi: TestFunction, x: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return phi.log_abs(x)[None, :]
    _, lv = phi.log_abs_derivatives(x, n)
    return lv


def _sup_on_box(phi, coef, weight, L: float, n: int, density: float):
    x = np.linspace(-L, L, int(2 * L * density) + 1)
    lv = _log_derivs(phi, x, n) + coef[: n + 1, None] + weight(np.abs(x))[None, :]
    lv = np.where(np.isnan(lv), -np.inf, lv)
    per_alpha = np.max(lv, axis=1)
    a = int(np.argmax(per_alpha))
    i = int(np.argmax(lv[a]))
    edge = float(max(np.max(lv[:, 0]), np.max(lv[:, -1])))
    return float(per_alpha[a]), (a, float(x[i])), edge, per_alpha


def seminorm(phi: TestFunction, M: WeightSequence, A: WeightSequence, h: float | None = None,
             r: RSequence | None = None, alpha_cap: int = ALPHA_CAP, density: float = 64.0,
             box0: float = BOX0, box_max: float = BOX_MAX) -> SeminormValue:
    """sup over alpha <= alpha_cap and an adaptive box of the weighted |D^alpha phi|.

    The box doubles until the weighted values at its edge are below 1e-3 of the running sup.
    Three consecutive doublings that each raise the sup by more than 10 % mark divergence.
    """
    coef, weight = _weights(M, A, h, r, alpha_cap)

    def run(n):
        L, hist, k = box0, [], 0
        while True:
            s, at, edge, per = _sup_on_box(phi, coef, weight, L, n, density if L <= 64 else 4096 / L)
            hist.append(s)
            grew = [b - a > GROWTH for a, b in zip(hist[-4:-1], hist[-3:])]
            if len(hist) >= 4 and all(grew):
                return math.inf, at, L, k, per, True
            if s == -math.inf or edge < s + EDGE:
                return s, at, L, k, per, False
            if 2 * L > box_max:
                return s, at, L, k, per, None
            L *= 2
            k += 1

    # alpha = 0 first: divergence there needs no derivative oracle
    s0, at0, L0, k0, per0, div0 = run(0)
    if div0:
        return SeminormValue(math.inf, at0, (0, L0), True, k0, ((0, math.inf),))
    if not phi.has_derivative(alpha_cap):
        raise DomainError(f"{describe(phi)} has no derivative oracle up to order {alpha_cap}")
    s, at, L, k, per, div = run(alpha_cap)
    table = tuple((a, float(math.exp(v)) if v < 709 else math.inf) for a, v in enumerate(per))
    if div:
        return SeminormValue(math.inf, at, (alpha_cap, L), True, k, table)
    saturated = at[0] == alpha_cap or div is None or abs(at[1]) >= L
    value = math.exp(s) if s < 709 else math.inf
    return SeminormValue(value, at, (alpha_cap, L), bool(saturated), k, table)


# ---------------------------------------------------------------------------
# growth of f * phi


@dataclass(frozen=True)
class GrowthFit:
    ok: bool
    t: float | None
    C: float | None
    table: tuple  # (t, C or inf)
    x_extent: float
    note: str = ""

    def to_dict(self) -> dict:
        return {"ok": self.ok, "t": self.t, "C": self.C, "x_extent": self.x_extent, "note": self.note,
                "table": [[t, c if math.isfinite(c) else "inf"] for t, c in self.table]}


def growth_fit(f: TestFunction, phi: TestFunction, A: WeightSequence, t_grid=(0.125, 0.25, 0.5, 1.0, 2.0),
               spacing: float = 0.125, box0: float = BOX0, box_max: float = 256.0) -> GrowthFit:
    """Smallest t with sup_x |f * phi| e^{-A(t|x|)} finite, decided with the box-expansion rule."""
    t_grid = sorted(float(t) for t in t_grid)
    cache: dict = {}

    def logconv(xs):
        new = [v for v in xs if v not in cache]
        if new:
            _, lg = convolve_log(f, phi, np.array(new))
            cache.update(zip(new, lg))
        return np.array([cache[v] for v in xs])

    table = []
    extent = box0
    for t in t_grid:
        L, hist = box0, []
        verdict = None
        while True:
            n = int(round(L / spacing))
            xs = np.arange(-n, n + 1) * spacing
            lv = logconv(xs.tolist()) - associated(A, t * np.abs(xs))
            s = float(np.max(lv))
            hist.append(s)
            edge = float(max(lv[0], lv[-1]))
            if len(hist) >= 4 and all(b - a > GROWTH for a, b in zip(hist[-4:-1], hist[-3:])):
                verdict = math.inf
                break
            if s == -math.inf or edge < s + EDGE:
                verdict = math.exp(s) if s < 709 else math.inf
                break
            if 2 * L > box_max:
                verdict = math.inf  # still growing at the cap: no bound established
                break
            L *= 2
        extent = max(extent, L)
        table.append((t, verdict))
        if math.isfinite(verdict):
            return GrowthFit(True, t, verdict, tuple(table), extent)
    return GrowthFit(False, None, None, tuple(table), extent, "no t on the grid bounds f * phi")


@dataclass(frozen=True)
class MembershipVerdict:
    verdict: str  # consistent-with-membership | fails
    t: float | None
    witness: str | None
    per_probe: tuple

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "t": self.t, "witness": self.witness,
                "per_probe": [dict(p) for p in self.per_probe]}


def default_gs_probes() -> list:
    return [Gaussian(0.0, 1.0), Gaussian(0.5, 0.5), HermiteGaussian(1, 0.7), Gaussian(-1.0, 0.3)]


def membership_test(f: TestFunction, A: WeightSequence, probes=None,
                    t_grid=(0.125, 0.25, 0.5, 1.0, 2.0)) -> MembershipVerdict:
    """Finite-probe test: a single t must bound e^{-A(t|x|)} |f * phi| for every probe.

    A probe that cannot be convolved with f is a witness against membership.
    """
    probes = default_gs_probes() if probes is None else list(probes)
    if not probes:
        raise DomainError("empty probe set")
    rows = []
    t_need = 0.0
    for phi in probes:
        try:
            g = growth_fit(f, phi, A, t_grid)
        except NonConvolvablePairError as e:
            rows.append((("probe", describe(phi)), ("ok", False), ("note", f"not convolvable: {e}")))
            return MembershipVerdict("fails", None, describe(phi), tuple(rows))
        rows.append((("probe", describe(phi)), ("ok", g.ok), ("t", g.t), ("C", g.C)))
        if not g.ok:
            return MembershipVerdict("fails", None, describe(phi), tuple(rows))
        t_need = max(t_need, g.t)
    return MembershipVerdict("consistent-with-membership", t_need, None, tuple(rows))


# ---------------------------------------------------------------------------
# regularisation  Q_n psi = chi_n * (phi_n psi)


@dataclass(frozen=True, eq=False)
class Regularized(TestFunction):
    """chi_n * (phi_n psi) with chi_n(x) = n chi(n x) and phi_n(x) = phi(x / n), by Gauss-Legendre."""

    psi: TestFunction
    chi: TestFunction
    phi: TestFunction
    n: int
    panels: int = 12

    @property
    def inner(self) -> TestFunction:
        return Product(Dilate(self.phi, 1.0 / self.n), self.psi)

    def _nodes(self):
        lo, hi = Dilate(self.chi, float(self.n), float(self.n)).window()
        y, w = _gl_nodes(lo, hi, (), self.panels)
        return y, w * self.n * self.chi(self.n * y)

    def has_derivative(self, k):
        return self.inner.has_derivative(k)

    def derivatives(self, x, k_max: int) -> np.ndarray:
        """D^k Q_n psi for k = 0..k_max at x (values, not logs)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y, w = self._nodes()
        out = np.zeros((k_max + 1, len(x)))
        g = self.inner
        for a in range(0, len(x), 256):
            xs = x[a:a + 256]
            pts = (xs[:, None] - y[None, :]).ravel()
            s, lv = g.log_abs_derivatives(pts, k_max)
            vals = (s * np.exp(lv)).reshape(k_max + 1, len(xs), len(y))
            out[:, a:a + 256] = vals @ w
        return out

    def __call__(self, x):
        return self.derivatives(x, 0)[0]

    def derivative(self, x, k):
        return self.derivatives(x, k)[k]

    def log_abs_derivatives(self, x, n_max):
        v = self.derivatives(x, n_max)
        with np.errstate(divide="ignore"):
            return np.sign(v), np.log(np.abs(v))

    def window(self):
        wp = self.psi.window()
        wc = Dilate(self.chi, float(self.n), float(self.n)).window()
        if wp is None or wc is None:
            return None
        return (wp[0] + wc[0], wp[1] + wc[1])


@dataclass(frozen=True, eq=False)
class _Difference(TestFunction):
    a: TestFunction
    b: TestFunction

    def __call__(self, x):
        return self.a(x) - self.b(x)

    def has_derivative(self, k):
        return self.a.has_derivative(k) and self.b.has_derivative(k)

    def log_abs_derivatives(self, x, n_max):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        va = self.a.derivatives(x, n_max) if hasattr(self.a, "derivatives") else np.array(
            [self.a.derivative(x, k) for k in range(n_max + 1)])
        sb, lb = self.b.log_abs_derivatives(x, n_max)
        v = va - sb * np.exp(lb)
        with np.errstate(divide="ignore"):
            return np.sign(v), np.log(np.abs(v))


def regularize(psi: TestFunction, chi: TestFunction, phi: TestFunction, n: int) -> Regularized:
    if n < 1:
        raise DomainError("n must be a positive integer")
    win = chi.window()
    if win is None:
        raise DomainError("chi needs a decay window")
    y, w = _gl_nodes(win[0], win[1], (), 64)
    mass = float(np.sum(w * chi(y)))
    if abs(mass - 1.0) > 1e-10:
        raise DomainError(f"int chi = {mass!r}, not 1")
    if float(phi(np.array([0.0]))[0]) != 1.0:
        raise DomainError("phi(0) must be exactly 1")
    return Regularized(psi, chi, phi, int(n))


@dataclass(frozen=True)
class RegularizationReport:
    ladder: tuple
    distances: tuple
    point_errors: tuple  # |Q_n psi(0) - psi(0)|
    strictly_decreasing: bool
    monotone_within_2: bool
    h: float
    alpha_cap: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def normalized_gaussian(scale: float = 1.0) -> TestFunction:
    """Gaussian with unit integral."""
    return Dilate(Gaussian(0.0, 1.0), 1.0 / scale, 1.0 / (math.sqrt(math.pi) * scale))


def regularization_report(psi: TestFunction, chi: TestFunction, phi: TestFunction, M: WeightSequence,
                          A: WeightSequence, h: float = 0.25, ladder=(1, 2, 4, 8, 16),
                          alpha_cap: int = 20) -> RegularizationReport:
    """sigma_h(Q_n psi - psi), truncated at alpha_cap, along the ladder of n."""
    dist, pts = [], []
    for n in ladder:
        Q = regularize(psi, chi, phi, n)
        sv = seminorm(_Difference(Q, psi), M, A, h=h, alpha_cap=alpha_cap, density=32.0)
        dist.append(sv.value)
        pts.append(abs(float(Q(np.array([0.0]))[0] - psi(np.array([0.0]))[0])))
    strict = all(b < a for a, b in zip(dist, dist[1:]))
    loose = all(b < 2 * a for a, b in zip(dist, dist[1:]))
    return RegularizationReport(tuple(int(n) for n in ladder), tuple(dist), tuple(pts), strict, loose, h, alpha_cap)
