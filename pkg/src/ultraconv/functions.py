"""Symbolic test functions and ultradistribution descriptors with exact oracles.

Fourier convention: F f(xi) = int f(x) exp(-i x xi) dx.  A descriptor's
transform may have a density part (``fourier``) and spectral lines
(``spectral_lines``: pairs (omega, a) standing for 2*pi*a*delta(xi - omega)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

SQRT_PI = math.sqrt(math.pi)
LOG_TINY = -1e300  # stands in for log 0 where -inf would poison arithmetic


def _arr(x):
    return np.asarray(x, dtype=float)


def hermite_gauss_log(u, n_max: int):
    """Sign and log|H_m(u) exp(-u^2)| for m = 0..n_max, shape (n_max+1,) + u.shape.

    Uses the normalised Hermite-function recurrence divided by h_0 so nothing
    under- or overflows for |u| up to a few hundred.
    """
    u = _arr(u)
    out = np.empty((n_max + 1,) + u.shape)
    prev = np.zeros_like(u)
    cur = np.ones_like(u)
    log_scale = np.zeros_like(u)  # h~_m = cur * exp(log_scale)
    out[0] = 0.0
    sign = np.empty_like(out)
    sign[0] = 1.0
    for m in range(1, n_max + 1):
        nxt = math.sqrt(2.0 / m) * u * cur - math.sqrt((m - 1) / m) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            cur = cur / s
            prev = prev / s
            log_scale = log_scale + np.log(s)
        with np.errstate(divide="ignore"):
            out[m] = np.log(np.abs(cur)) + log_scale
        sign[m] = np.sign(cur)
    m = np.arange(n_max + 1).reshape((-1,) + (1,) * u.ndim)
    # H_m e^{-u^2} = h_m sqrt(2^m m! sqrt(pi)) e^{-u^2/2}, and h_0 = pi^{-1/4} e^{-u^2/2}
    norm = 0.5 * (m * math.log(2.0) + gammaln(m + 1))
    out = out + norm - u * u
    return sign, out


class TestFunction:
    """Base class; subclasses override the oracles they can answer exactly."""

    __test__ = False  # not a pytest class

    def __call__(self, x):
        raise NotImplementedError(f"{self} has no pointwise values")

    def log_abs(self, x):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self(x)))

    def has_derivative(self, n: int) -> bool:
        return n == 0

    def derivative(self, x, n: int):
        if n == 0:
            return self(x)
        raise NotImplementedError(f"{self} has no derivative oracle of order {n}")

    def log_abs_derivatives(self, x, n_max: int):
        """(sign, log|D^k f|) for k = 0..n_max, stacked on a new leading axis."""
        vals = np.array([self.derivative(x, k) for k in range(n_max + 1)])
        with np.errstate(divide="ignore"):
            return np.sign(vals), np.log(np.abs(vals))

    def has_fourier(self) -> bool:
        return False

    def fourier(self, xi):
        raise NotImplementedError(f"{self} has no Fourier oracle")

    def log_abs_fourier(self, xi):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.fourier(xi)))

    def fourier_phase(self, xi):
        """Unit-modulus phase of the transform, valid where |f^| underflows."""
        return np.exp(1j * np.angle(self.fourier(xi)))

    def spectral_lines(self):
        return []

    def point_masses(self):
        return None

    def window(self):
        """Interval outside of which |f| < 1e-18 * sup|f|, or None."""
        return None

    def kinks(self):
        return ()

    def components(self):
        """Flatten sums into [(coefficient, descriptor)]."""
        return [(1.0, self)]

    def __add__(self, other):
        return Sum((self, other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Scaled(float(other), self)
        return Product(self, other)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True, eq=False)
class Gaussian(TestFunction):
    """exp(-((x - center) / scale)^2)."""

    center: float = 0.0
    scale: float = 1.0

    def _u(self, x):
        return (_arr(x) - self.center) / self.scale

    def __call__(self, x):
        u = self._u(x)
        return np.exp(-u * u)

    def log_abs(self, x):
        u = self._u(x)
        return -u * u

    def has_derivative(self, n):
        return True

    def log_abs_derivatives(self, x, n_max):
        sign, logv = hermite_gauss_log(self._u(x), n_max)
        k = np.arange(n_max + 1).reshape((-1,) + (1,) * (logv.ndim - 1))
        sign = sign * np.where(k % 2 == 1, -1.0, 1.0)
        return sign, logv - k * math.log(self.scale)

    def derivative(self, x, n):
        sign, logv = self.log_abs_derivatives(x, n)
        return sign[n] * np.exp(logv[n])

    def has_fourier(self):
        return True

    def fourier(self, xi):
        xi = _arr(xi)
        s = self.scale
        return SQRT_PI * s * np.exp(-(s * xi) ** 2 / 4 - 1j * self.center * xi)

    def log_abs_fourier(self, xi):
        s = self.scale
        return math.log(SQRT_PI * s) - (s * _arr(xi)) ** 2 / 4

    def fourier_phase(self, xi):
        return np.exp(-1j * self.center * _arr(xi))

    def window(self):
        w = 9.5 * self.scale
        return (self.center - w, self.center + w)

    def integral(self):
        return SQRT_PI * self.scale


@dataclass(frozen=True, eq=False)
class HermiteGaussian(TestFunction):
    """2^-n H_n(x/s) exp(-(x/s)^2); n = 1, s = 1 gives x exp(-x^2)."""

    n: int = 1
    scale: float = 1.0

    def _u(self, x):
        return _arr(x) / self.scale

    def __call__(self, x):
        return self.derivative(x, 0)

    def has_derivative(self, n):
        return True

    def log_abs_derivatives(self, x, n_max):
        sign, logv = hermite_gauss_log(self._u(x), self.n + n_max)
        sign, logv = sign[self.n:], logv[self.n:]
        k = np.arange(n_max + 1).reshape((-1,) + (1,) * (logv.ndim - 1))
        sign = sign * np.where(k % 2 == 1, -1.0, 1.0)
        return sign, logv - self.n * math.log(2.0) - k * math.log(self.scale)

    def derivative(self, x, n):
        sign, logv = self.log_abs_derivatives(x, n)
        return sign[n] * np.exp(logv[n])

    def log_abs(self, x):
        return self.log_abs_derivatives(x, 0)[1][0]

    def has_fourier(self):
        return True

    def fourier(self, xi):
        xi = _arr(xi)
        s = self.scale
        return (-0.5j * s * xi) ** self.n * SQRT_PI * s * np.exp(-(s * xi) ** 2 / 4)

    def log_abs_fourier(self, xi):
        xi = np.abs(_arr(xi))
        s = self.scale
        with np.errstate(divide="ignore"):
            return self.n * np.log(0.5 * s * xi) + math.log(SQRT_PI * s) - (s * xi) ** 2 / 4

    def fourier_phase(self, xi):
        return (-1j * np.sign(_arr(xi))) ** self.n

    def window(self):
        w = (10.0 + math.sqrt(2 * self.n)) * self.scale
        return (-w, w)

    def integral(self):
        return SQRT_PI * self.scale if self.n == 0 else 0.0


@dataclass(frozen=True, eq=False)
class ExpDecay(TestFunction):
    """exp(-tau |x|)."""

    tau: float = 1.0

    def __call__(self, x):
        return np.exp(-self.tau * np.abs(_arr(x)))

    def log_abs(self, x):
        return -self.tau * np.abs(_arr(x))

    def has_fourier(self):
        return True

    def fourier(self, xi):
        xi = _arr(xi)
        return (2 * self.tau / (self.tau ** 2 + xi * xi)).astype(complex)

    def window(self):
        w = 42.0 / self.tau
        return (-w, w)

    def kinks(self):
        return (0.0,)

    def integral(self):
        return 2.0 / self.tau


@dataclass(frozen=True, eq=False)
class ExpGrowth(TestFunction):
    """exp(a |x|)."""

    a: float = 1.0

    def __call__(self, x):
        return np.exp(self.a * np.abs(_arr(x)))

    def log_abs(self, x):
        return self.a * np.abs(_arr(x))

    def kinks(self):
        return (0.0,)


@dataclass(frozen=True, eq=False)
class GaussGrowth(TestFunction):
    """exp(a x^2)."""

    a: float = 1.0

    def __call__(self, x):
        x = _arr(x)
        return np.exp(self.a * x * x)

    def log_abs(self, x):
        x = _arr(x)
        return self.a * x * x


@dataclass(frozen=True, eq=False)
class Constant(TestFunction):
    c: float = 1.0

    def __call__(self, x):
        return np.full(np.shape(x), self.c, dtype=float)

    def log_abs(self, x):
        with np.errstate(divide="ignore"):
            return np.full(np.shape(x), math.log(abs(self.c)) if self.c else -np.inf)

    def has_derivative(self, n):
        return True

    def derivative(self, x, n):
        return self(x) if n == 0 else np.zeros(np.shape(x))

    def spectral_lines(self):
        return [(0.0, complex(self.c))]


@dataclass(frozen=True, eq=False)
class Cosine(TestFunction):
    """cos(omega x)."""

    omega: float = 1.0

    def __call__(self, x):
        return np.cos(self.omega * _arr(x))

    def has_derivative(self, n):
        return True

    def derivative(self, x, n):
        return self.omega ** n * np.cos(self.omega * _arr(x) + n * math.pi / 2)

    def spectral_lines(self):
        if self.omega == 0:
            return [(0.0, 1.0 + 0j)]
        return [(self.omega, 0.5 + 0j), (-self.omega, 0.5 + 0j)]


@dataclass(frozen=True, eq=False)
class DampedWeierstrass(TestFunction):
    """exp(-tau|x|) * sum_{n<=N} a^n cos(b^n pi x)."""

    a: float = 0.5
    b: int = 3
    tau: float = 1.0
    N: int = 12

    def frequencies(self):
        return np.array([self.b ** n * math.pi for n in range(self.N + 1)])

    def amplitudes(self):
        return np.array([self.a ** n for n in range(self.N + 1)])

    def __call__(self, x):
        x = _arr(x)
        s = np.zeros_like(x)
        for amp, w in zip(self.amplitudes(), self.frequencies()):
            s = s + amp * np.cos(w * x)
        return np.exp(-self.tau * np.abs(x)) * s

    def has_fourier(self):
        return True

    def fourier(self, xi):
        xi = _arr(xi)
        t = self.tau
        s = np.zeros_like(xi)
        for amp, w in zip(self.amplitudes(), self.frequencies()):
            s = s + amp * (t / (t * t + (xi - w) ** 2) + t / (t * t + (xi + w) ** 2))
        return s.astype(complex)

    def window(self):
        w = 42.0 / self.tau
        return (-w, w)

    def kinks(self):
        return (0.0,)


@dataclass(frozen=True, eq=False)
class PointMasses(TestFunction):
    """sum_k w_k delta(x - x_k)."""

    masses: tuple = ((0.0, 1.0),)

    def point_masses(self):
        return [(float(x0), float(w)) for x0, w in self.masses]

    def has_fourier(self):
        return True

    def fourier(self, xi):
        xi = _arr(xi)
        return sum(w * np.exp(-1j * x0 * xi) for x0, w in self.masses)


def delta(x0: float = 0.0, w: float = 1.0) -> PointMasses:
    return PointMasses(((float(x0), float(w)),))


# ---------------------------------------------------------------------------
# composites


@dataclass(frozen=True, eq=False)
class Scaled(TestFunction):
    c: float
    f: TestFunction

    def __call__(self, x):
        return self.c * self.f(x)

    def log_abs(self, x):
        with np.errstate(divide="ignore"):
            return math.log(abs(self.c)) + self.f.log_abs(x) if self.c else np.full(np.shape(x), -np.inf)

    def has_derivative(self, n):
        return self.f.has_derivative(n)

    def derivative(self, x, n):
        return self.c * self.f.derivative(x, n)

    def log_abs_derivatives(self, x, n_max):
        s, lv = self.f.log_abs_derivatives(x, n_max)
        with np.errstate(divide="ignore"):
            return s * math.copysign(1.0, self.c), lv + (math.log(abs(self.c)) if self.c else -np.inf)

    def has_fourier(self):
        return self.f.has_fourier()

    def fourier(self, xi):
        return self.c * self.f.fourier(xi)

    def log_abs_fourier(self, xi):
        with np.errstate(divide="ignore"):
            return math.log(abs(self.c)) + self.f.log_abs_fourier(xi)

    def fourier_phase(self, xi):
        return math.copysign(1.0, self.c) * self.f.fourier_phase(xi)

    def spectral_lines(self):
        return [(w, self.c * a) for w, a in self.f.spectral_lines()]

    def point_masses(self):
        pm = self.f.point_masses()
        return None if pm is None else [(x0, self.c * w) for x0, w in pm]

    def window(self):
        return self.f.window()

    def kinks(self):
        return self.f.kinks()

    def components(self):
        return [(self.c * c, g) for c, g in self.f.components()]


@dataclass(frozen=True, eq=False)
class Sum(TestFunction):
    terms: tuple

    def __call__(self, x):
        return sum(t(x) for t in self.terms)

    def log_abs(self, x):
        # log|sum s_k e^{l_k}| with the largest term factored out
        logs = np.array([t.log_abs(x) for t in self.terms])
        with np.errstate(over="ignore", invalid="ignore"):
            signs = np.nan_to_num(np.array([np.sign(t(x)) for t in self.terms]))
        top = np.max(logs, axis=0)
        safe = np.where(np.isfinite(top), top, 0.0)
        tot = np.sum(signs * np.exp(logs - safe), axis=0)
        with np.errstate(divide="ignore"):
            return np.where(np.isfinite(top), np.log(np.abs(tot)) + safe, top)

    def has_derivative(self, n):
        return all(t.has_derivative(n) for t in self.terms)

    def derivative(self, x, n):
        return sum(t.derivative(x, n) for t in self.terms)

    def has_fourier(self):
        return all(t.has_fourier() or (t.spectral_lines() and t.point_masses() is None
                                       and not _has_density(t)) for t in self.terms) and any(
            t.has_fourier() for t in self.terms)

    def fourier(self, xi):
        xi = _arr(xi)
        return sum((t.fourier(xi) for t in self.terms if t.has_fourier()), np.zeros(xi.shape, complex))

    def spectral_lines(self):
        return [ln for t in self.terms for ln in t.spectral_lines()]

    def point_masses(self):
        pms = [t.point_masses() for t in self.terms]
        if all(p is not None for p in pms):
            return [m for p in pms for m in p]
        return None

    def window(self):
        ws = [t.window() for t in self.terms]
        if any(w is None for w in ws):
            return None
        return (min(w[0] for w in ws), max(w[1] for w in ws))

    def kinks(self):
        return tuple(sorted({k for t in self.terms for k in t.kinks()}))

    def components(self):
        return [c for t in self.terms for c in t.components()]


def _has_density(f: TestFunction) -> bool:
    return not isinstance(f, (Constant, Cosine))


@dataclass(frozen=True, eq=False)
class Product(TestFunction):
    f: TestFunction
    g: TestFunction

    def __call__(self, x):
        return self.f(x) * self.g(x)

    def log_abs(self, x):
        return self.f.log_abs(x) + self.g.log_abs(x)

    def has_derivative(self, n):
        return self.f.has_derivative(n) and self.g.has_derivative(n)

    def derivative(self, x, n):
        return sum(math.comb(n, k) * self.f.derivative(x, k) * self.g.derivative(x, n - k)
                   for k in range(n + 1))

    def log_abs_derivatives(self, x, n_max):
        sf, lf = self.f.log_abs_derivatives(x, n_max)
        sg, lg = self.g.log_abs_derivatives(x, n_max)
        out_s, out_l = [], []
        for n in range(n_max + 1):
            k = np.arange(n + 1)
            logc = (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)).reshape((-1,) + (1,) * (lf.ndim - 1))
            terms_l = logc + lf[: n + 1] + lg[n::-1]
            terms_s = sf[: n + 1] * sg[n::-1]
            top = np.max(terms_l, axis=0)
            top_safe = np.where(np.isfinite(top), top, 0.0)
            tot = np.sum(terms_s * np.exp(terms_l - top_safe), axis=0)
            with np.errstate(divide="ignore"):
                out_l.append(np.where(np.isfinite(top), np.log(np.abs(tot)) + top_safe, -np.inf))
            out_s.append(np.sign(tot))
        return np.array(out_s), np.array(out_l)

    def window(self):
        wf, wg = self.f.window(), self.g.window()
        if wf is None:
            return wg
        if wg is None:
            return wf
        lo, hi = max(wf[0], wg[0]), min(wf[1], wg[1])
        return (lo, hi) if lo < hi else (0.0, 0.0)

    def kinks(self):
        return tuple(sorted(set(self.f.kinks()) | set(self.g.kinks())))


@dataclass(frozen=True, eq=False)
class Reflect(TestFunction):
    """x -> f(-x)."""

    f: TestFunction

    def __call__(self, x):
        return self.f(-_arr(x))

    def log_abs(self, x):
        return self.f.log_abs(-_arr(x))

    def has_derivative(self, n):
        return self.f.has_derivative(n)

    def derivative(self, x, n):
        return (-1) ** n * self.f.derivative(-_arr(x), n)

    def log_abs_derivatives(self, x, n_max):
        s, lv = self.f.log_abs_derivatives(-_arr(x), n_max)
        k = np.arange(n_max + 1).reshape((-1,) + (1,) * (lv.ndim - 1))
        return s * np.where(k % 2 == 1, -1.0, 1.0), lv

    def has_fourier(self):
        return self.f.has_fourier()

    def fourier(self, xi):
        return self.f.fourier(-_arr(xi))

    def log_abs_fourier(self, xi):
        return self.f.log_abs_fourier(-_arr(xi))

    def fourier_phase(self, xi):
        return self.f.fourier_phase(-_arr(xi))

    def spectral_lines(self):
        return [(-w, a) for w, a in self.f.spectral_lines()]

    def point_masses(self):
        pm = self.f.point_masses()
        return None if pm is None else [(-x0, w) for x0, w in pm]

    def window(self):
        w = self.f.window()
        return None if w is None else (-w[1], -w[0])

    def kinks(self):
        return tuple(sorted(-k for k in self.f.kinks()))

    def components(self):
        return [(c, Reflect(g)) for c, g in self.f.components()]


@dataclass(frozen=True, eq=False)
class Shift(TestFunction):
    """x -> f(x - x0)."""

    f: TestFunction
    x0: float

    def __call__(self, x):
        return self.f(_arr(x) - self.x0)

    def log_abs(self, x):
        return self.f.log_abs(_arr(x) - self.x0)

    def has_derivative(self, n):
        return self.f.has_derivative(n)

    def derivative(self, x, n):
        return self.f.derivative(_arr(x) - self.x0, n)

    def log_abs_derivatives(self, x, n_max):
        return self.f.log_abs_derivatives(_arr(x) - self.x0, n_max)

    def has_fourier(self):
        return self.f.has_fourier()

    def fourier(self, xi):
        xi = _arr(xi)
        return np.exp(-1j * self.x0 * xi) * self.f.fourier(xi)

    def log_abs_fourier(self, xi):
        return self.f.log_abs_fourier(xi)

    def fourier_phase(self, xi):
        return np.exp(-1j * self.x0 * _arr(xi)) * self.f.fourier_phase(xi)

    def spectral_lines(self):
        return [(w, a * np.exp(-1j * w * self.x0)) for w, a in self.f.spectral_lines()]

    def point_masses(self):
        pm = self.f.point_masses()
        return None if pm is None else [(x + self.x0, w) for x, w in pm]

    def window(self):
        w = self.f.window()
        return None if w is None else (w[0] + self.x0, w[1] + self.x0)

    def kinks(self):
        return tuple(k + self.x0 for k in self.f.kinks())

    def components(self):
        return [(c, Shift(g, self.x0)) for c, g in self.f.components()]


@dataclass(frozen=True, eq=False)
class Dilate(TestFunction):
    """x -> amp * f(lam * x)."""

    f: TestFunction
    lam: float
    amp: float = 1.0

    def __call__(self, x):
        return self.amp * self.f(self.lam * _arr(x))

    def log_abs(self, x):
        return math.log(abs(self.amp)) + self.f.log_abs(self.lam * _arr(x))

    def has_derivative(self, n):
        return self.f.has_derivative(n)

    def derivative(self, x, n):
        return self.amp * self.lam ** n * self.f.derivative(self.lam * _arr(x), n)

    def log_abs_derivatives(self, x, n_max):
        s, lv = self.f.log_abs_derivatives(self.lam * _arr(x), n_max)
        k = np.arange(n_max + 1).reshape((-1,) + (1,) * (lv.ndim - 1))
        return s * math.copysign(1.0, self.amp), lv + math.log(abs(self.amp)) + k * math.log(abs(self.lam))

    def has_fourier(self):
        return self.f.has_fourier()

    def fourier(self, xi):
        return self.amp / abs(self.lam) * self.f.fourier(_arr(xi) / self.lam)

    def window(self):
        w = self.f.window()
        if w is None:
            return None
        a, b = w[0] / self.lam, w[1] / self.lam
        return (min(a, b), max(a, b))

    def kinks(self):
        return tuple(k / self.lam for k in self.f.kinks())


@dataclass(frozen=True, eq=False)
class MultiplierApplied(TestFunction):
    """P(D) f for an even real multiplier; only spectral oracles are available.

    ``multiplier`` needs ``log_abs_real(xi)`` returning log P(xi) on the real axis.
    """

    multiplier: object
    f: TestFunction

    def __call__(self, x):
        from .ultrapoly import multiplier_apply  # deferred: ultrapoly imports this module

        x = _arr(x)
        return multiplier_apply(self.multiplier, self.f, x.ravel()).reshape(x.shape)

    def has_fourier(self):
        return self.f.has_fourier()

    def fourier(self, xi):
        xi = _arr(xi)
        return np.exp(self.multiplier.log_abs_real(xi)) * self.f.fourier(xi)

    def log_abs_fourier(self, xi):
        return self.multiplier.log_abs_real(_arr(xi)) + self.f.log_abs_fourier(xi)

    def fourier_phase(self, xi):
        return self.f.fourier_phase(xi)

    def spectral_lines(self):
        return [(w, a * math.exp(float(self.multiplier.log_abs_real(np.array([w]))[0])))
                for w, a in self.f.spectral_lines()]

    def point_masses(self):
        return None

    def components(self):
        return [(c, MultiplierApplied(self.multiplier, g)) for c, g in self.f.components()]


def describe(f: TestFunction) -> str:
    """Stable text form used in result records."""
    if isinstance(f, Gaussian):
        return f"gaussian({f.center!r},{f.scale!r})"
    if isinstance(f, HermiteGaussian):
        return f"hermite({f.n},{f.scale!r})"
    if isinstance(f, ExpDecay):
        return f"expdecay({f.tau!r})"
    if isinstance(f, ExpGrowth):
        return f"expgrow({f.a!r})"
    if isinstance(f, GaussGrowth):
        return f"gaussgrow({f.a!r})"
    if isinstance(f, Constant):
        return f"const({f.c!r})"
    if isinstance(f, Cosine):
        return f"cos({f.omega!r})"
    if isinstance(f, DampedWeierstrass):
        return f"weier({f.a!r},{f.b},{f.tau!r},{f.N})"
    if isinstance(f, PointMasses):
        return "+".join(f"delta({x0!r},{w!r})" for x0, w in f.masses)
    if isinstance(f, Scaled):
        return f"{f.c!r}*({describe(f.f)})"
    if isinstance(f, Sum):
        return "+".join(describe(t) for t in f.terms)
    if isinstance(f, Product):
        return f"({describe(f.f)})*({describe(f.g)})"
    if isinstance(f, Reflect):
        return f"reflect({describe(f.f)})"
    if isinstance(f, Shift):
        return f"shift({describe(f.f)},{f.x0!r})"
    if isinstance(f, Dilate):
        return f"dilate({describe(f.f)},{f.lam!r},{f.amp!r})"
    if isinstance(f, MultiplierApplied):
        return f"P(D)[{describe(f.f)}]"
    return repr(f)


def spot_check_derivative(f: TestFunction, n: int, points: Sequence[float], h: float = 1e-3) -> float:
    """Max relative mismatch between the n-th derivative oracle and central
    differences of the (n-1)-th oracle; n >= 1."""
    x = _arr(points)
    exact = f.derivative(x, n)
    lower = lambda t: f.derivative(t, n - 1)
    # 8th-order central difference
    c = [(1, 4 / 5), (2, -1 / 5), (3, 4 / 105), (4, -1 / 280)]
    fd = sum(w * (lower(x + k * h) - lower(x - k * h)) for k, w in c) / h
    scale = np.maximum(1.0, np.abs(exact))
    return float(np.max(np.abs(fd - exact) / scale))
