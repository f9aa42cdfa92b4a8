"""Non-vanishing ultrapolynomials P(z) = prod_{j>=j0} (1 + (z / s_j)^{2q}).

Beurling: s_j = m_j / l with l = 2 H k sqrt(2d).  Roumieu: s_j = l_j m_j with
(l_j) subordinate to k_p / (4 H sqrt(2d)).  The infinite product is split into
explicit factors j0..J and a tail j > J summed in closed form with Hurwitz zeta
values, using log(1 + w) = sum_k (-1)^{k+1} w^k / k, which converges because
|w_j| <= 1/2 for j > J on the declared box |z| <= box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import ConstructionError, ConvergenceError, DomainError, TruncationError
from .functions import TestFunction
from .weights import (RSequence, SequenceSpec, WeightSequence, associated, check_conditions,
                      fit_m2, fit_m5, make_sequence, modulate, subordinate)

STRICT, RELAXED = "strict", "relaxed"
BEURLING, ROUMIEU = "beurling", "roumieu"
J_CAP = 2_000_000
TAIL_TERMS_MAX = 400


@dataclass(frozen=True)
class TailModel:
    """Beyond J, s_j = A j^g / c exactly (closed-form bases) or by extrapolation."""

    c: float
    log_A: float
    g: float
    certified: bool


@dataclass(frozen=True, eq=False)
class Ultrapolynomial:
    flavor: str
    q: int
    j0: int
    J: int
    d: int
    base: WeightSequence
    rprime: float
    k_param: float | RSequence
    mode: str
    H: float
    box: float
    l: float | None = None
    l_seq: RSequence | None = None
    tail: TailModel = field(default=None, repr=False)
    log_s: np.ndarray = field(default=None, repr=False)  # log s_j, j = j0..J
    tail_terms: int = 0
    tail_coef: np.ndarray = field(default=None, repr=False)  # (-1)^{k+1}/k zeta(s_k, J+1) (J+1)^{s_k}
    tail_bound: float = 0.0  # certified bound on |log P - computed log P| on the box

    # -- scales -------------------------------------------------------------
    def log_scale(self, j) -> np.ndarray:
        """log s_j for arbitrary j >= 1."""
        j = np.atleast_1d(np.asarray(j, dtype=int))
        lm = self.base.log_ratio(j) if np.all(j <= self.base.p_max) or self.base.extendable else None
        if lm is None:
            lm = np.where(j <= self.base.p_max, self.base.log_ratios[np.minimum(j, self.base.p_max)],
                          self.tail.log_A + self.tail.g * np.log(j.astype(float)))
        if self.flavor == BEURLING:
            return lm - math.log(self.l)
        L = len(self.l_seq)
        ll = np.log(self.l_seq.values[np.minimum(j, L) - 1])
        return lm + ll

    @property
    def zero_free_half_width(self) -> float:
        """Every zero of P has |Im z| >= this; it is s_{j0} sin(pi / 2q)."""
        return float(np.exp(np.min(self.log_scale(np.arange(self.j0, self.j0 + 1)))) * math.sin(math.pi / (2 * self.q)))

    # -- evaluation ----------------------------------------------------------
    def _check_box(self, z):
        r = np.max(np.abs(z)) if np.size(z) else 0.0
        if r > self.box * (1 + 1e-12):
            raise TruncationError(f"|z| = {r:.6g} outside the certified box {self.box:.6g}; rebuild with box >= {r:.6g}")

    def _tail_series(self, z):
        """sum_{j>J} log(1 + (z / s_j)^{2q}) for complex or real z."""
        t = self.tail
        out = np.zeros(np.shape(z), dtype=complex if np.iscomplexobj(z) else float)
        if self.tail_terms == 0:
            return out
        # v = (z / s_{J+1})^{2q}, |v| <= 1/2 on the box
        v = (t.c * z / math.exp(t.log_A + t.g * math.log(self.J + 1))) ** (2 * self.q)
        for c in self.tail_coef[::-1]:  # Horner in v, constant term zero
            out = (out + c) * v
        return out

    def log_eval(self, z):
        """Complex log P(z) (imaginary part only meaningful mod 2 pi)."""
        z = np.asarray(z, dtype=complex)
        self._check_box(z)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        two_q = 2 * self.q
        chunk = max(1, 4_000_000 // max(1, len(self.log_s)))
        for a in range(0, len(flat), chunk):
            zz = flat[a:a + chunk]
            nz = zz != 0
            with np.errstate(divide="ignore"):
                lz = np.log(np.where(nz, zz, 1.0))
            lw = two_q * (lz[:, None] - self.log_s[None, :])
            small = lw.real < 0
            term = np.where(small, np.log1p(np.exp(np.where(small, lw, 0.0))),
                            lw + np.log1p(np.exp(-np.where(small, 0.0, lw))))
            s = np.where(nz, term.sum(axis=1), 0.0)
            out[a:a + chunk] = s + self._tail_series(zz)
        return out.reshape(z.shape)

    def evaluate(self, z):
        lv = self.log_eval(z)
        return np.exp(lv)

    def log_abs_real(self, x):
        """log P(x) >= 0 on the real axis (P is real, even and >= 1 there)."""
        x = np.abs(np.asarray(x, dtype=float))
        self._check_box(x)
        flat = x.ravel()
        out = np.empty(flat.shape)
        two_q = 2 * self.q
        chunk = max(1, 4_000_000 // max(1, len(self.log_s)))
        for a in range(0, len(flat), chunk):
            xx = flat[a:a + chunk]
            nz = xx > 0
            with np.errstate(divide="ignore"):
                lx = np.log(np.where(nz, xx, 1.0))
            lw = two_q * (lx[:, None] - self.log_s[None, :])
            s = np.where(nz, np.logaddexp(0.0, lw).sum(axis=1), 0.0)
            out[a:a + chunk] = s + np.where(nz, self._tail_series(xx), 0.0)
        return out.reshape(x.shape)

    def log_abs_real_lower(self, x):
        """Lower bound for log P(x) valid on all of R: explicit factors only, no box."""
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            lx = np.log(x)
        lw = 2 * self.q * (lx[..., None] - self.log_s)
        return np.logaddexp(0.0, lw).sum(axis=-1)

    # -- persistence ---------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"flavor={self.flavor}", f"q={self.q}", f"j0={self.j0}", f"J={self.J}", f"d={self.d}",
                 f"mode={self.mode}", f"H={self.H!r}", f"rprime={self.rprime!r}", f"box={self.box!r}"]
        if self.flavor == BEURLING:
            lines.append(f"l={self.l!r}")
            lines.append(f"k={self.k_param!r}")
        else:
            lines.append("k_seq=" + ",".join(repr(float(v)) for v in self.k_param.values))
        lines.append(self.base.spec.to_text(self.base.p_max, prefix="base.").rstrip("\n"))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Ultrapolynomial":
        kv = {}
        base_lines = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise DomainError(f"malformed line {raw!r}")
            if key.startswith("base."):
                base_lines.append(line)
            else:
                kv[key.strip()] = val.strip()
        spec, pmax = SequenceSpec.from_text("\n".join(base_lines), prefix="base.")
        base = make_sequence(spec, pmax) if pmax else make_sequence(spec)
        if kv["flavor"] == BEURLING:
            k = float(kv["k"])
        else:
            k = RSequence(np.array([float(v) for v in kv["k_seq"].split(",")]))
        P = build(base, flavor=kv["flavor"], k=k, rprime=float(kv["rprime"]), d=int(kv["d"]),
                  mode=kv["mode"], q=int(kv["q"]), H=float(kv["H"]), box=float(kv["box"]))
        if P.j0 != int(kv["j0"]) or P.J != int(kv["J"]):
            raise DomainError("stored j0/J do not match the regenerated construction")
        if P.flavor == BEURLING and abs(P.l - float(kv["l"])) > 1e-12 * P.l:
            raise DomainError("stored l does not match the regenerated construction")
        return P


# ---------------------------------------------------------------------------
# construction


def _tail_model(base: WeightSequence, c: float) -> TailModel:
    if base.extendable:
        return TailModel(c, 0.0, base._sigma, True)
    pm = base.p_max
    p = np.arange(pm // 2, pm + 1, dtype=float)
    g, a = np.polyfit(np.log(p), base.log_ratios[pm // 2:], 1)
    return TailModel(c, float(a), float(g), False)


def _choose_J(j0: int, tail: TailModel, q: int, box: float, base: WeightSequence, min_J: int) -> int:
    # need |c box / (A j^g)|^{2q} <= 1/2 for all j > J
    need = (math.log(tail.c * box) + math.log(2.0) / (2 * q) - tail.log_A) / tail.g
    jstar = math.ceil(math.exp(need)) if need > 0 else 1
    J = max(j0 - 1, jstar - 1, min_J)
    if J > J_CAP:
        raise TruncationError(f"box {box} needs J = {J} explicit factors (cap {J_CAP})")
    if not base.extendable and J > base.p_max:
        raise TruncationError(f"box {box} needs m_j up to j = {J + 1}, table ends at p_max = {base.p_max}")
    return J


def _tail_terms(tail: TailModel, q: int, J: int, box: float, tol: float = 1e-17):
    """Series coefficients in v = (z / s_{J+1})^{2q} and a bound on the remainder."""
    two_q = 2 * q
    a = J + 1
    lv = two_q * (math.log(tail.c * box) - tail.log_A - tail.g * math.log(a)) if box > 0 else -math.inf
    if lv > math.log(0.5) + 1e-12:
        raise ConstructionError("tail series would not converge on the box")

    def scaled_zeta(k):
        s = two_q * tail.g * k
        if s <= 1:
            raise ConstructionError("m_j^{2q} is not summable; (M.5) fails for this q")
        return float(mpmath.zeta(s, a) * mpmath.power(a, s))

    def bound(k):
        s = two_q * tail.g * k
        # zeta(s, a) a^s <= 1 + a / (s - 1)
        return math.exp(k * lv) * (1 + a / (s - 1)) / k if s > 1 else math.inf

    coef = []
    k = 1
    while bound(k) > tol:
        coef.append((-1) ** (k + 1) / k * scaled_zeta(k))
        k += 1
        if k > TAIL_TERMS_MAX:
            raise ConstructionError("tail series needs too many terms")
    # the remainder is dominated by a geometric series with ratio <= 1/2
    return np.array(coef), 2 * bound(k)


def _j0_index(ok, base: WeightSequence, thr_desc: str) -> int:
    """Smallest j >= 2 with ok(j, log m_j)."""
    pm = base.p_max
    for j in range(2, pm + 1):
        if ok(j, float(base.log_ratios[j])):
            return j
    if base.extendable:
        test = lambda j: ok(j, float(base.log_ratio(np.array([j]))[0]))
    else:
        tm = _tail_model(base, 1.0)
        test = lambda j: ok(j, tm.log_A + tm.g * math.log(j))
    hi = pm + 1
    while not test(hi):
        hi *= 2
        if hi > 10 ** 12:
            raise ConstructionError(f"no j0 satisfies the {thr_desc} rule")
    lo = max(pm + 1, hi // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if test(mid):
            hi = mid
        else:
            lo = mid + 1
    if not base.extendable:
        raise ConstructionError(
            f"no j <= p_max = {pm} satisfies the {thr_desc} j0 rule; power-law extrapolation of m_j "
            f"suggests p_max >= {hi}")
    return hi


def build(base: WeightSequence, *, flavor: str = BEURLING, k: float | RSequence = 1.0, rprime: float = 2.0,
          d: int = 1, mode: str = RELAXED, q: int | None = None, H: float | None = None,
          box: float = 64.0, A: WeightSequence | None = None, min_J: int = 0) -> Ultrapolynomial:
    """Construct P from the base sequence.

    q defaults to the first q for which (M.5) holds for base^q; H defaults to
    the (M.2) fit.  ``box`` is the radius of the disc on which evaluation is
    certified; ``min_J`` forces at least that many explicit factors.
    """
    if d != 1:
        raise ConstructionError("only d = 1 is supported")
    if not rprime >= 1:
        raise ConstructionError(f"r' must be >= 1, got {rprime}")
    if mode not in (STRICT, RELAXED):
        raise ConstructionError(f"mode must be strict or relaxed, got {mode!r}")
    if flavor not in (BEURLING, ROUMIEU):
        raise ConstructionError(f"unknown flavor {flavor!r}")
    if not box > 0:
        raise ConstructionError("box must be positive")
    if q is None or H is None:
        report = check_conditions(base, A)
        if not report.m1:
            raise ConstructionError("base fails (M.1)")
        if q is None:
            if not report.m5.holds:
                raise ConstructionError("base fails (M.5) for every candidate q")
            q = report.m5.q
        if H is None:
            H = report.m2.H
    if not (isinstance(q, (int, np.integer)) and q >= 2):
        raise ConstructionError(f"q must be an integer >= 2, got {q!r}")
    q = int(q)
    if not fit_m5(base, q).holds:
        raise ConstructionError(f"(M.5) fails for q = {q}: m_p^q is not summable")
    thr = 0.5 if mode == RELAXED else 2.0 ** (-q - 5) * d ** (-q)
    log_thr = math.log(thr)
    sqrt2d = math.sqrt(2 * d)
    tol = 1e-12

    if flavor == BEURLING:
        if isinstance(k, RSequence) or not k > 0:
            raise ConstructionError("Beurling flavor needs a positive real k")
        l = 2 * H * k * sqrt2d
        lrl = math.log(rprime * l)

        def ok(j, log_m):
            return lrl - log_m <= log_thr + tol

        j0 = _j0_index(ok, base, mode)
        tail = _tail_model(base, l)
        J = _choose_J(j0, tail, q, box, base, min_J)
        P = Ultrapolynomial(BEURLING, q, j0, J, d, base, float(rprime), float(k), mode, float(H), float(box), l=l)
    else:
        if not isinstance(k, RSequence):
            raise ConstructionError("Roumieu flavor needs k as an RSequence")
        lprime = RSequence(k.values / (4 * H * sqrt2d))
        lseq = subordinate(lprime)
        L = len(lseq)
        log_l = np.log(lseq.values)

        def ok(j, log_m):
            lj = log_l[min(j, L) - 1]
            return math.log(rprime) - lj - log_m <= log_thr + tol

        j0 = _j0_index(ok, base, mode)
        tail = _tail_model(base, 1.0 / lseq.values[-1])
        J = _choose_J(j0, tail, q, box, base, max(L, min_J))
        P = Ultrapolynomial(ROUMIEU, q, j0, J, d, base, float(rprime), k, mode, float(H), float(box), l_seq=lseq)

    coef, bound = _tail_terms(tail, q, J, box)
    object.__setattr__(P, "tail", tail)
    log_s = P.log_scale(np.arange(j0, J + 1)) if J >= j0 else np.zeros(0)
    log_s.setflags(write=False)
    object.__setattr__(P, "log_s", log_s)
    object.__setattr__(P, "tail_terms", len(coef))
    object.__setattr__(P, "tail_coef", coef)
    object.__setattr__(P, "tail_bound", bound)
    return P


def from_scales(q: int, log_s, *, tail: TailModel | None = None, box: float = 2.0,
                base: WeightSequence | None = None) -> Ultrapolynomial:
    """Bare product prod (1 + (z/s_j)^{2q}) from explicit scales, bypassing the j0 rule.

    Meant for checks of the evaluation machinery.  The tail beyond the last
    scale follows ``tail`` (s_j = A j^g / c); its index offset is len(log_s).
    """
    log_s = np.asarray(log_s, dtype=float)
    J = len(log_s)
    base = base if base is not None else make_sequence(SequenceSpec("factorial"), max(J, 2))
    P = Ultrapolynomial(BEURLING, int(q), 1, J, 1, base, 1.0, 1.0, "custom", math.nan, float(box), l=1.0)
    tail = tail if tail is not None else TailModel(1.0, 0.0, 1.0, True)
    object.__setattr__(P, "tail", tail)
    object.__setattr__(P, "log_s", log_s)
    coef, b = _tail_terms(tail, q, J, box)
    object.__setattr__(P, "tail_terms", len(coef))
    object.__setattr__(P, "tail_coef", coef)
    object.__setattr__(P, "tail_bound", b)
    return P


# ---------------------------------------------------------------------------
# bounds on the real axis and the strip


def _growth_exponent(P: Ultrapolynomial, rho, factor: float):
    """M(factor * k * rho) (Beurling) or N_{k_p * factor}(rho) (Roumieu)."""
    rho = np.abs(np.asarray(rho, dtype=float))
    if P.flavor == BEURLING:
        return associated(P.base, factor * P.k_param * rho)
    kv = np.asarray(P.k_param.values, dtype=float) * factor
    pm = P.base.p_max
    if len(kv) < pm:
        kv = np.concatenate([kv, np.full(pm - len(kv), kv[-1])])
    return associated(modulate(P.base, kv[:pm]), rho)


@dataclass(frozen=True)
class StripReport:
    x_max: float
    y_max: float
    n_x: int
    n_y: int
    min_abs: float
    min_abs_real: float
    argmin: tuple
    min_abs_by_row: tuple  # (y, min |P| on the row)
    C_prime: float
    violations: tuple  # (x, y, |P|) with |P| < 1e-300
    zero_free_half_width: float
    zeros_in_region: tuple  # exact zeros of the explicit factors inside the scanned rectangle
    mode: str
    table: np.ndarray = field(repr=False)  # columns x, log|P(x)|, log(|P(x)| e^{-M(2k|x|)})

    @property
    def nonvanishing(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "x_max": self.x_max, "y_max": self.y_max, "n_x": self.n_x, "n_y": self.n_y,
            "min_abs": self.min_abs, "min_abs_real": self.min_abs_real, "argmin": list(self.argmin),
            "min_abs_by_row": [list(r) for r in self.min_abs_by_row], "C_prime": self.C_prime,
            "violations": [list(v) for v in self.violations],
            "zero_free_half_width": self.zero_free_half_width,
            "zeros_in_region": [[z.real, z.imag] for z in self.zeros_in_region],
            "mode": self.mode,
            "note": "relaxed j0: lower-bound constants are fitted" if self.mode == RELAXED else "",
        }

    def csv_rows(self):
        yield ("x", "abs_P", "lower_bound_ratio")
        for x, lp, lr in self.table:
            yield (repr(float(x)), fmt_exp(lp), fmt_exp(lr))


def fmt_exp(log_value: float) -> str:
    """Decimal rendering of exp(log_value) that survives beyond double range."""
    if not np.isfinite(log_value):
        return "0" if log_value < 0 else "inf"
    if abs(log_value) < 700:
        return repr(float(math.exp(log_value)))
    e10 = log_value / math.log(10.0)
    ex = math.floor(e10)
    return f"{10 ** (e10 - ex):.15g}e{ex:+d}"


def strip_check(P: Ultrapolynomial, x_max: float = 50.0, n_x: int = 1001, n_y: int = 9) -> StripReport:
    """Scan |P| on [-x_max, x_max] x [-2r', 2r'] and fit C' on the real axis."""
    y_max = 2 * P.rprime
    x = np.linspace(-x_max, x_max, n_x)
    y = np.linspace(-y_max, y_max, n_y)
    if 0.0 not in y:
        y = np.sort(np.concatenate([y, [0.0]]))
    Z = x[None, :] + 1j * y[:, None]
    logabs = P.log_eval(Z).real
    # real row computed through the real path to avoid phase noise
    i0 = int(np.argmin(np.abs(y)))
    lreal = P.log_abs_real(x)
    logabs[i0] = lreal
    floor = math.log(1e-300)
    viol = tuple((float(x[j]), float(y[i]), float(np.exp(logabs[i, j])))
                 for i, j in zip(*np.nonzero(logabs < floor)))
    im = np.unravel_index(int(np.argmin(logabs)), logabs.shape)
    by_row = tuple((float(y[i]), float(np.exp(np.min(logabs[i])))) for i in range(len(y)))
    growth = _growth_exponent(P, 2 * np.abs(x), 1.0) if P.flavor == BEURLING else _growth_exponent(P, x, 0.5)
    ratio = lreal - growth
    C_prime = float(np.exp(np.min(ratio)))
    # exact zeros of explicit factors: s_j exp(i pi (2m+1) / 2q)
    zeros = []
    sin0 = math.sin(math.pi / (2 * P.q))
    for ls in P.log_s:
        s = math.exp(ls)
        if s * sin0 > y_max:
            break
        for m in range(2 * P.q):
            z = s * np.exp(1j * math.pi * (2 * m + 1) / (2 * P.q))
            if abs(z.imag) <= y_max * (1 + 1e-12) and abs(z.real) <= x_max:
                zeros.append(complex(z))
    return StripReport(float(x_max), float(y_max), int(n_x), len(y), float(np.exp(logabs[im])),
                       float(np.exp(np.min(lreal))), (float(x[im[1]]), float(y[im[0]])), by_row, C_prime,
                       viol, P.zero_free_half_width, tuple(zeros), P.mode,
                       np.column_stack([x, lreal, ratio]))


# ---------------------------------------------------------------------------
# derivatives of 1/P


@dataclass(frozen=True)
class InvDerivative:
    value: float  # d^n/dx^n (1/P)(x); D^n differs by the factor (-i)^n
    bound_ratio: float  # |value| / (n! / r'^n * e^{-M(k|x|)})
    nodes: int


def inv_derivative(P: Ultrapolynomial, x: float, n: int, radius: float | None = None,
                   tol: float = 1e-10, max_nodes: int = 2 ** 16) -> InvDerivative:
    """n-th derivative of 1/P at real x from the Cauchy integral on |w - x| = radius."""
    radius = P.rprime if radius is None else float(radius)
    if not 0 < radius <= P.rprime:
        raise TruncationError(f"radius must lie in (0, r'] = (0, {P.rprime}]")
    if not 0 <= n <= 40:
        raise TruncationError("n must lie in [0, 40]")
    if abs(x) + radius > P.box:
        raise TruncationError(f"circle leaves the certified box {P.box}")
    log_pref = float(gammaln(n + 1)) - n * math.log(radius)
    prev = None
    N = 32
    while N <= max_nodes:
        th = 2 * math.pi * np.arange(N) / N
        w = x + radius * np.exp(1j * th)
        lf = -P.log_eval(w)
        top = float(np.max(lf.real))
        s = np.sum(np.exp(lf - top) * np.exp(-1j * n * th)) / N
        val = float((s * math.exp(log_pref + top)).real) if log_pref + top < 700 else math.inf
        noise = 1e3 * np.finfo(float).eps * math.exp(min(log_pref + top, 700))
        if prev is not None and abs(val - prev) <= max(tol * abs(val), noise):
            growth = float(_growth_exponent(P, np.array([x]), 1.0)[0])
            bound = float(gammaln(n + 1)) - n * math.log(P.rprime) - growth
            ratio = abs(val) * math.exp(-bound) if abs(val) > 0 else 0.0
            return InvDerivative(val, ratio, N)
        prev = val
        N *= 2
    raise ConvergenceError(f"Cauchy integral did not converge to {tol:g} within {max_nodes} nodes")


# ---------------------------------------------------------------------------
# P(D) as a Fourier multiplier


def multiplier_apply(P: Ultrapolynomial, f, x, *, dx: float | None = None, tol: float = 1e-8) -> np.ndarray:
    """Samples of P(D) f = F^{-1}[P(xi) f^(xi)] at the points ``x``.

    ``f`` is a TestFunction with a Fourier oracle and/or spectral lines, or a
    sampled array on the uniform grid ``x`` (then ``dx`` is inferred).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(f, TestFunction):
        return _apply_descriptor(P, f, x, tol)
    return _apply_samples(P, np.asarray(f, dtype=float), x, tol)


def _apply_descriptor(P, f: TestFunction, x, tol):
    if f.point_masses() is not None:
        raise DomainError("P(D) of point masses is not a function; pair it through the kernel instead")
    out = np.zeros(x.shape, dtype=complex)
    for w, a in f.spectral_lines():
        out += a * np.exp(P.log_abs_real(np.array([w]))[0]) * np.exp(1j * w * x)
    has_density = f.has_fourier() and not all(
        type(c).__name__ in ("Constant", "Cosine") for _, c in f.components())
    if has_density:
        win = f.window()
        if win is None:
            raise TruncationError("the density part needs a decay window to fix the frequency step")
        half = max(abs(win[0]), abs(win[1]))
        reach = float(np.max(np.abs(x))) + half if x.size else half
        dxi = math.pi / (2 * reach + 10.0)
        # band: where log|P f^| drops log(1/tol) + 10 below its peak
        xi_scan = np.linspace(0, P.box, 4097)
        lg = P.log_abs_real(xi_scan) + np.nan_to_num(f.log_abs_fourier(xi_scan), neginf=-np.inf)
        lg = np.maximum(lg, P.log_abs_real(xi_scan) + np.nan_to_num(f.log_abs_fourier(-xi_scan), neginf=-np.inf))
        peak = float(np.max(lg))
        if not np.isfinite(peak):  # identically zero spectrum
            return out.real
        above = np.nonzero(lg > peak - math.log(1 / tol) - 10)[0]
        if above[-1] >= len(xi_scan) - 1:
            raise TruncationError(f"P f^ is not negligible at the box edge {P.box}; rebuild with a larger box")
        Xi = xi_scan[min(above[-1] + 1, len(xi_scan) - 1)]
        if peak > 700:
            raise TruncationError(f"|P f^| reaches e^{peak:.0f}; outside double range")
        n = int(math.ceil(Xi / dxi))
        xi = np.arange(-n, n + 1) * dxi
        phase = f.fourier_phase(xi)
        spec = np.exp(P.log_abs_real(xi) + f.log_abs_fourier(xi)) * phase
        out += (dxi / (2 * math.pi)) * (np.exp(1j * np.outer(x, xi)) @ spec)
    return out.real


def _apply_samples(P, fs, x, tol):
    if fs.shape != x.shape or fs.ndim != 1 or len(x) < 8:
        raise DomainError("sampled input needs matching 1-D arrays of values and uniform points")
    h = np.diff(x)
    if np.max(np.abs(h - h[0])) > 1e-9 * abs(h[0]):
        raise DomainError("sampled input must be on a uniform grid")
    h = float(h[0])
    N = len(x)
    xi = 2 * math.pi * np.fft.fftfreq(N, h)
    if np.max(np.abs(xi)) > P.box:
        raise TruncationError(f"Nyquist {np.max(np.abs(xi)):.4g} exceeds the certified box {P.box}")
    F = np.fft.fft(fs)
    lp = P.log_abs_real(xi)
    mag = np.abs(F)
    edge = np.abs(xi) >= 0.9 * np.max(np.abs(xi))
    with np.errstate(divide="ignore"):
        lpf = lp + np.log(mag)
    peak = float(np.max(lpf))
    noise = math.log(np.finfo(float).eps * np.max(mag) * N) + float(np.max(lp))
    if peak > 700:
        raise TruncationError(f"|P f^| reaches e^{peak:.0f}; outside double range")
    if np.max(lpf[edge]) > peak + math.log(tol) or noise > peak + math.log(tol):
        raise TruncationError(
            f"spectral content of the samples is not resolved under P; need at least {2 * N} points "
            f"on a grid with spacing <= {h / 2:.4g}")
    return np.fft.ifft(np.exp(lp) * F).real
