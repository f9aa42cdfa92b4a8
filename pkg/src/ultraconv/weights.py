"""Weight sequences M_p in log domain, standing conditions, associated functions.

All arithmetic is on log M_p: p!^2 already overflows a double near p = 85.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .errors import InvalidSequenceError

DEFAULT_PMAX = 256
# log2 H is fitted on a 1/16 lattice; see fit_m2.
H_LATTICE = 16
H_LATTICE_MAX = 16 * H_LATTICE


@dataclass(frozen=True)
class SequenceSpec:
    """Generator tag plus parameters; enough to regenerate a WeightSequence."""

    generator: str  # gevrey | factorial | custom | modulated
    sigma: float | None = None
    values: tuple[float, ...] | None = None
    base: "SequenceSpec | None" = None
    lseq: tuple[float, ...] | None = None

    def to_text(self, p_max: int | None = None, prefix: str = "") -> str:
        lines = [f"{prefix}generator={self.generator}"]
        if self.sigma is not None:
            lines.append(f"{prefix}sigma={self.sigma!r}")
        if self.values is not None:
            lines.append(f"{prefix}values=" + ",".join(repr(float(v)) for v in self.values))
        if self.lseq is not None:
            lines.append(f"{prefix}lseq=" + ",".join(repr(float(v)) for v in self.lseq))
        if self.base is not None:
            lines.append(self.base.to_text(prefix=prefix + "base."))
        if p_max is not None:
            lines.append(f"{prefix}pmax={p_max}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, prefix: str = "") -> tuple["SequenceSpec", int | None]:
        kv = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidSequenceError(f"expected key=value, got {line!r}")
            k, v = line.split("=", 1)
            kv[k.strip()] = v.strip()
        return cls._from_kv(kv, prefix)

    @classmethod
    def _from_kv(cls, kv: dict, prefix: str):
        gen = kv.get(prefix + "generator")
        if gen is None:
            raise InvalidSequenceError(f"missing {prefix}generator")

        def floats(key):
            s = kv.get(prefix + key)
            return None if s is None else tuple(float(t) for t in s.split(",") if t.strip())

        sigma = kv.get(prefix + "sigma")
        base = None
        if any(k.startswith(prefix + "base.") for k in kv):
            base, _ = cls._from_kv(kv, prefix + "base.")
        pmax = kv.get(prefix + "pmax")
        spec = cls(gen, None if sigma is None else float(sigma), floats("values"), base, floats("lseq"))
        return spec, None if pmax is None else int(pmax)


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """log M_p for p = 0..p_max with cached log ratios log m_p = log M_p - log M_{p-1}."""

    log_values: np.ndarray
    spec: SequenceSpec
    log_ratios: np.ndarray = field(repr=False)  # index p, entry 0 unused (nan)

    @property
    def p_max(self) -> int:
        return len(self.log_values) - 1

    @property
    def generator(self) -> str:
        return self.spec.generator

    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    def ratios(self) -> np.ndarray:
        """m_p for p = 1..p_max."""
        return np.exp(self.log_ratios[1:])

    def log_ratio(self, j) -> np.ndarray:
        """log m_j, extended past p_max when the generator has a closed form."""
        j = np.asarray(j)
        if np.all(j <= self.p_max):
            return self.log_ratios[j]
        if self.spec.generator in ("gevrey", "factorial"):
            return self._sigma * np.log(j.astype(float))
        raise InvalidSequenceError(
            f"m_j needed up to j={int(np.max(j))} but table ends at p_max={self.p_max}")

    @property
    def extendable(self) -> bool:
        return self.spec.generator in ("gevrey", "factorial")

    @property
    def _sigma(self) -> float:
        return 1.0 if self.spec.generator == "factorial" else float(self.spec.sigma)

    def power(self, q: float) -> "WeightSequence":
        """M_p^q (the tilde sequence of the ultrapolynomial construction)."""
        if self.extendable:
            spec = SequenceSpec("gevrey", sigma=self._sigma * q)
        else:
            spec = SequenceSpec("custom", values=tuple(np.exp(q * self.log_values)))
        return _build(q * self.log_values, spec)

    def to_text(self) -> str:
        return self.spec.to_text(self.p_max)


def _build(log_values: np.ndarray, spec: SequenceSpec, log_ratios=None) -> WeightSequence:
    log_values = np.array(log_values, dtype=float)
    if log_ratios is None:
        log_ratios = np.concatenate([[np.nan], np.diff(log_values)])
    log_values.setflags(write=False)
    log_ratios = np.asarray(log_ratios, dtype=float)
    log_ratios.setflags(write=False)
    return WeightSequence(log_values, spec, log_ratios)


def make_sequence(spec: SequenceSpec, p_max: int = DEFAULT_PMAX) -> WeightSequence:
    if p_max < 2:
        raise InvalidSequenceError(f"p_max must be >= 2, got {p_max}")
    gen = spec.generator
    if gen in ("gevrey", "factorial"):
        sigma = 1.0 if gen == "factorial" else spec.sigma
        if sigma is None or not sigma > 0:
            raise InvalidSequenceError(f"Gevrey exponent must be > 0, got {sigma}")
        log_ratios = np.concatenate([[np.nan], sigma * np.log(np.arange(1, p_max + 1, dtype=float))])
        log_values = np.concatenate([[0.0], np.cumsum(log_ratios[1:])])
        return _build(log_values, spec, log_ratios)
    if gen == "custom":
        vals = np.asarray(spec.values, dtype=float)
        if len(vals) < p_max + 1:
            raise InvalidSequenceError(f"custom table has {len(vals)} entries, need {p_max + 1}")
        vals = vals[: p_max + 1]
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise InvalidSequenceError("custom table entries must be finite and positive")
        if vals[0] != 1.0 or vals[1] != 1.0:
            raise InvalidSequenceError("custom table must start with M_0 = M_1 = 1")
        return _build(np.log(vals), spec)
    if gen == "modulated":
        if spec.base is None or spec.lseq is None:
            raise InvalidSequenceError("modulated sequence needs base and lseq")
        base = make_sequence(spec.base, p_max)
        lseq = np.asarray(spec.lseq, dtype=float)
        if len(lseq) < p_max:
            raise InvalidSequenceError(f"lseq has {len(lseq)} entries, need {p_max}")
        if np.any(lseq[:p_max] <= 0):
            raise InvalidSequenceError("lseq entries must be positive")
        log_l = np.concatenate([[0.0], np.cumsum(np.log(lseq[:p_max]))])
        return _build(base.log_values + log_l, spec)
    raise InvalidSequenceError(f"unknown generator {gen!r}")


def gevrey(sigma: float, p_max: int = DEFAULT_PMAX) -> WeightSequence:
    return make_sequence(SequenceSpec("gevrey", sigma=float(sigma)), p_max)


def factorial(p_max: int = DEFAULT_PMAX) -> WeightSequence:
    return make_sequence(SequenceSpec("factorial"), p_max)


def custom(values: Sequence[float]) -> WeightSequence:
    return make_sequence(SequenceSpec("custom", values=tuple(float(v) for v in values)), len(values) - 1)


def modulate(M: WeightSequence, lseq) -> WeightSequence:
    """M_p * prod_{j<=p} l_j; its associated function is N_{l_p} (or B_{l_p} for A)."""
    lseq = tuple(float(v) for v in (lseq.values if isinstance(lseq, RSequence) else lseq))
    return make_sequence(SequenceSpec("modulated", base=M.spec, lseq=lseq), M.p_max)


# ---------------------------------------------------------------------------
# positive sequences increasing to infinity


@dataclass(frozen=True, eq=False)
class RSequence:
    """r_p for p = 1..P, nondecreasing, positive."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or len(v) < 2:
            raise InvalidSequenceError("RSequence needs at least two entries")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise InvalidSequenceError("RSequence entries must be finite and positive")
        if np.any(np.diff(v) < 0):
            raise InvalidSequenceError("RSequence must be nondecreasing")
        if not v[-1] > v[0]:
            raise InvalidSequenceError("RSequence must increase (r_P > r_1)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def log_products(self) -> np.ndarray:
        """log prod_{j<=p} r_j for p = 0..P."""
        return np.concatenate([[0.0], np.cumsum(np.log(self.values))])


def check_product_inequality(log_prod: np.ndarray, limit: int | None = None, slack: float = 1e-12) -> bool:
    """prod_{j<=p+q} k_j <= 2^{p+q} prod_{j<=p} k_j prod_{j<=q} k_j for all p+q <= limit."""
    n = len(log_prod) - 1 if limit is None else min(limit, len(log_prod) - 1)
    ln2 = math.log(2.0)
    for s in range(2, n + 1):
        p = np.arange(1, s)
        lhs = log_prod[s]
        rhs = s * ln2 + log_prod[p] + log_prod[s - p]
        if np.any(lhs > rhs + slack * (1 + abs(lhs))):
            return False
    return True


def subordinate(k: RSequence) -> RSequence:
    """k'_p = p * min_{j<=p} k_j / j.

    k'_p <= k_p, k' is nondecreasing, and because k'_p / p is nonincreasing,
    prod_{p<j<=p+q} k'_j / j <= prod_{j<=q} k'_j / j, which together with
    C(p+q, p) <= 2^{p+q} gives the doubling-type product inequality.
    """
    kv = np.asarray(k.values if isinstance(k, RSequence) else k, dtype=float)
    if np.any(np.diff(kv) < 0):
        raise InvalidSequenceError("subordinate requires a nondecreasing sequence")
    p = np.arange(1, len(kv) + 1, dtype=float)
    out = p * np.minimum.accumulate(kv / p)
    out = np.maximum.accumulate(out)  # p * (k/p) can lose an ulp against its neighbour
    out = np.minimum(out, kv)  # and gain one against k_p itself; k'_p <= k_p holds exactly
    result = RSequence(out)
    lp = result.log_products()
    if not (np.all(out <= kv) and check_product_inequality(lp)):
        raise AssertionError("subordinate produced a sequence violating its guarantees")
    return result


# ---------------------------------------------------------------------------
# associated functions and counting function


@dataclass(frozen=True)
class AssociatedValue:
    value: float
    argmax: int
    saturated: bool  # sup attained at p_max: raise p_max


def associated_detail(M: WeightSequence, rho: float) -> AssociatedValue:
    if not rho > 0:
        raise InvalidSequenceError(f"rho must be positive, got {rho}")
    p = np.arange(M.p_max + 1)
    terms = p * math.log(rho) - M.log_values
    i = int(np.argmax(terms))
    return AssociatedValue(float(max(terms[i], 0.0)), i, i == M.p_max)


def associated(M: WeightSequence, rho):
    """M(rho) = sup_p log(rho^p / M_p) over p <= p_max; vectorised over rho, M(0) = 0."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(np.isnan(rho)):
        raise InvalidSequenceError("rho must be nonnegative")
    p = np.arange(M.p_max + 1)
    with np.errstate(divide="ignore"):
        logr = np.log(np.where(rho > 0, rho, 1.0))
    terms = logr[..., None] * p - M.log_values
    out = np.where(rho > 0, np.maximum(terms.max(axis=-1), 0.0), 0.0)
    return float(out) if out.ndim == 0 else out


def counting(M: WeightSequence, rho: float) -> int:
    """m(rho) = #{p in [1, p_max] : m_p <= rho}."""
    if not rho > 0:
        raise InvalidSequenceError(f"rho must be positive, got {rho}")
    lr = M.log_ratios[1:]
    return int(np.count_nonzero(lr <= math.log(rho) + 4 * np.finfo(float).eps * max(1.0, abs(math.log(rho)))))


# ---------------------------------------------------------------------------
# condition checks


@dataclass(frozen=True)
class M2Fit:
    holds: bool
    c0: float
    H: float
    H_min: float  # smallest H with c0 = 1 before lattice rounding


@dataclass(frozen=True)
class M5Fit:
    q: int
    c0: float
    holds: bool
    tail_exponent: float  # q * growth exponent of m_p used for the tail beyond p_max


@dataclass(frozen=True)
class M6Fit:
    c0: float
    L0: float
    holds: bool


@dataclass(frozen=True)
class QuasiFit:
    verdict: str  # quasianalytic | non-quasianalytic | inconclusive
    partial_sum: float
    fit_exponent: float
    residual: float


@dataclass(frozen=True)
class ConditionReport:
    m1: bool
    m2: M2Fit
    m5: M5Fit
    m6: M6Fit
    quasianalytic: QuasiFit
    p_max: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        q = self.quasianalytic
        return "\n".join([
            f"(M.1) log-convexity: {'holds' if self.m1 else 'FAILS'}",
            f"(M.2) c0={self.m2.c0:.6g} H={self.m2.H:.6g} (raw minimum {self.m2.H_min:.6g}): "
            f"{'holds' if self.m2.holds else 'FAILS'}",
            f"(M.5) q={self.m5.q} c0={self.m5.c0:.6g}: {'holds' if self.m5.holds else 'FAILS'}",
            f"(M.6) c0={self.m6.c0:.6g} L0={self.m6.L0:.6g}: {'holds' if self.m6.holds else 'FAILS'}",
            f"quasianalyticity: {q.verdict} (beta={q.fit_exponent:.6g}, "
            f"partial sum={q.partial_sum:.6g}, residual={q.residual:.3g})",
            f"p_max={self.p_max}",
        ])


def check_m1(M: WeightSequence, tol: float = 1e-12) -> bool:
    lv = M.log_values
    second = lv[:-2] + lv[2:] - 2 * lv[1:-1]
    return bool(np.all(second >= -tol * (1 + np.abs(lv[1:-1]))))


def _m2_excess(M: WeightSequence) -> np.ndarray:
    """r_p = max_q log(M_p / (M_{p-q} M_q)), p = 0..p_max."""
    lv = M.log_values
    r = np.zeros(len(lv))
    for p in range(1, len(lv)):
        q = np.arange(p + 1)
        r[p] = np.max(lv[p] - lv[p - q] - lv[q])
    return r


def fit_m2(*seqs: WeightSequence) -> M2Fit:
    """Shared (c0, H) for (M.2).

    c0 = 1 is fixed first and log2 H is binary-searched on a 1/16 lattice; the
    finite-p minimum approaches the asymptotic constant from below, so the
    lattice step keeps fits like H = 2 for p! from depending on p_max.
    """
    p_max = min(s.p_max for s in seqs)
    r = np.max([_m2_excess(s)[: p_max + 1] for s in seqs], axis=0)
    p = np.arange(1, p_max + 1)
    h_min = float(np.exp(max(0.0, np.max(r[1:] / p))))

    def ok(k):
        return bool(np.all(r[1:] <= p * (k / H_LATTICE) * math.log(2) + 1e-12 * (1 + np.abs(r[1:]))))

    if ok(H_LATTICE_MAX):
        lo, hi = -1, H_LATTICE_MAX
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return M2Fit(True, 1.0, 2.0 ** (max(hi, 0) / H_LATTICE), h_min)
    H = 2.0 ** (H_LATTICE_MAX / H_LATTICE)
    c0 = float(np.exp(np.max(r[1:] - p * math.log(H))))
    return M2Fit(True, max(c0, 1.0), H, h_min)


def _power_fit(logp: np.ndarray, y: np.ndarray):
    """Least squares y ~ a + b log p; returns (b, a, rms residual)."""
    A = np.vstack([np.ones_like(logp), logp]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[1]), float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def fit_m5(M: WeightSequence, q: int) -> M5Fit:
    """Strong non-quasianalyticity of M_p^q on p < p_max.

    Tails beyond p_max are extrapolated from a power-law fit m_p ~ c p^g over the
    upper half of the table: sum_{j>p_max} (c j^g)^{-q} = c^{-q} zeta(q g, p_max + 1).
    """
    pm = M.p_max
    lr = M.log_ratios[1:] * q  # log m~_p, p = 1..pm
    p = np.arange(1, pm + 1, dtype=float)
    half = slice(pm // 2 - 1, pm)
    g, a, resid = _power_fit(np.log(p[half]), M.log_ratios[1:][half])
    expo = q * g
    if expo <= 1 + 1e-3 or resid > 0.1:
        return M5Fit(q, math.inf, False, expo)
    beyond = math.exp(-q * a) * float(zeta(expo, pm + 1))
    inv = np.exp(-lr)
    tails = np.cumsum(inv[::-1])[::-1]  # tails[i] = sum_{j >= i+1} 1/m~_j
    # T_p = sum_{j>p} 1/m~_j for p = 1..pm-1
    T = tails[1:] + beyond
    c0 = float(np.max(T * np.exp(lr[1:]) / p[:-1]))
    return M5Fit(q, max(c0, 1.0), True, expo)


def fit_m6(A: WeightSequence) -> M6Fit:
    """p! <= c0 L0^p A_p with c0 = 1; fails when the required L0 keeps growing with p."""
    pm = A.p_max
    p = np.arange(1, pm + 1, dtype=float)
    logfact = np.cumsum(np.log(p))
    s = (logfact - A.log_values[1:]) / p
    L0 = float(np.exp(max(0.0, np.max(s))))
    holds = bool(s[-1] - s[pm // 2 - 1] <= 1e-2)
    return M6Fit(1.0, L0, holds)


def classify_quasianalytic(M: WeightSequence, beta_slack: float = 1e-3) -> QuasiFit:
    pm = M.p_max
    inv = np.exp(-M.log_ratios[1:])
    partial = float(np.sum(inv))
    if pm < 10:
        return QuasiFit("inconclusive", partial, math.nan, math.nan)
    p = np.arange(1, pm + 1, dtype=float)
    sel = slice(pm // 4 - 1, pm)
    b, a, _ = _power_fit(np.log(p[sel]), -M.log_ratios[1:][sel])
    beta = -b
    pred = a + b * np.log(p[sel])
    rel = float(np.sqrt(np.mean(np.expm1(-M.log_ratios[1:][sel] - pred) ** 2)))
    if rel > 0.1:
        verdict = "inconclusive"
    elif beta <= 1 + beta_slack:
        verdict = "quasianalytic"
    else:
        verdict = "non-quasianalytic"
    return QuasiFit(verdict, partial, beta, rel)


def check_conditions(M: WeightSequence, A: WeightSequence | None = None,
                     q_candidates: Sequence[int] = (2, 3, 4)) -> ConditionReport:
    """Check (M.1), (M.2), (M.5), (M.6) and classify quasianalyticity of M."""
    A = M if A is None else A
    if A.p_max != M.p_max:
        raise InvalidSequenceError("M and A must share p_max")
    m1 = check_m1(M) and check_m1(A)
    if M.p_max < 10:
        nan = math.nan
        return ConditionReport(m1, fit_m2(M, A), M5Fit(0, nan, False, nan), M6Fit(nan, nan, False),
                               QuasiFit("inconclusive", float(np.sum(np.exp(-M.log_ratios[1:]))), nan, nan),
                               M.p_max)
    m5 = None
    for q in sorted(q_candidates):
        m5 = fit_m5(M, q)
        if m5.holds:
            break
    if m5 is None:
        m5 = M5Fit(0, math.inf, False, math.nan)
    return ConditionReport(m1, fit_m2(M, A), m5, fit_m6(A), classify_quasianalytic(M), M.p_max)
