"""The kernel G = F^{-1}[1/P] and the checks P(D)G = delta, decay, Weierstrass data.

Grids: xi_k = k dxi with dxi = pi / x_max, x_j = j dx with dx = 2 x_max / N, so
dx * dxi = 2 pi / N and G on the x-grid is one inverse FFT of the samples 1/P(xi_k).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ConsistencyError, ConstructionError, DomainError, TruncationError
from .functions import DampedWeierstrass, TestFunction
from .ultrapoly import StripReport, Ultrapolynomial, multiplier_apply
from .weights import WeightSequence, associated

LOG_CUT = 800.0  # 1/P below e^-800 is stored as zero
EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# bounds


def _tail_integral_bound(log_s: np.ndarray, q: int, xi0: float, alpha: int = 0) -> float:
    """Bound on int_{xi0}^inf xi^alpha / P(xi) d xi from P >= prod_{j<=n} (xi/s_j)^{2q}.

    Uses the best n among the explicit factors with s_j < xi0.
    """
    best = math.inf
    acc = 0.0
    lx = math.log(xi0)
    for n, ls in enumerate(log_s, start=1):
        acc += 2 * q * ls
        e = 2 * q * n - alpha  # int xi^{alpha - 2qn} = xi0^{1-e} / (e - 1)
        if e <= 1:
            continue
        val = acc + (1 - e) * lx - math.log(e - 1)
        best = min(best, val)
    return math.exp(best) if best > -745 else 0.0


@dataclass(frozen=True)
class PartialProduct:
    """prod over a subset of the explicit factors; a multiplier on all of R."""

    q: int
    log_s: np.ndarray
    box: float

    def log_abs_real(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            lw = 2 * self.q * (np.log(x)[..., None] - self.log_s)
        return np.logaddexp(0.0, lw).sum(axis=-1)


# ---------------------------------------------------------------------------
# kernel


@dataclass(frozen=True, eq=False)
class KernelGrid:
    P: Ultrapolynomial = field(repr=False)
    x_max: float
    N: int
    dx: float
    dxi: float
    xi_cut: float  # 1/P samples beyond xi_cut are zero
    tail_bound: float
    truncation_bound: float
    alias_bound: float
    rounding_bound: float
    tol: float
    method: str
    imag_residue: float
    x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)  # nonnegative band samples 0, dxi, ..., xi_cut
    log_ghat: np.ndarray = field(repr=False)  # -log P(xi) on those samples

    def ghat(self, xi):
        """1/P at grid frequencies |xi| = k dxi (zero beyond xi_cut)."""
        k = np.rint(np.abs(np.asarray(xi, dtype=float)) / self.dxi).astype(int)
        out = np.zeros(k.shape)
        inside = k < len(self.xi)
        out[inside] = np.exp(self.log_ghat[k[inside]])
        return out

    def derivative(self, alpha: int) -> np.ndarray:
        """D^alpha G on the x-grid through the multiplier xi^alpha / P(xi) (complex)."""
        return _synth(self, lambda xi: xi ** alpha)

    def header(self) -> dict:
        return {
            "x_max": self.x_max, "N": self.N, "dx": self.dx, "dxi": self.dxi, "xi_cut": self.xi_cut,
            "tail_bound": self.tail_bound, "truncation_bound": self.truncation_bound,
            "alias_bound": self.alias_bound, "rounding_bound": self.rounding_bound, "tol": self.tol,
            "method": self.method, "imag_residue": self.imag_residue,
        }

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            for k, v in self.header().items():
                fh.write(f"# {k}={v}\n" if isinstance(v, (str, int)) else f"# {k}={float(v)!r}\n")
            for line in self.P.to_text().splitlines():
                fh.write(f"# P.{line}\n")
            fh.write("x,G\n")
            for a, b in zip(self.x, self.values):
                fh.write(f"{float(a)!r},{float(b)!r}\n")


def read_kernel_csv(path) -> tuple[dict, np.ndarray, np.ndarray]:
    """Header dict (strings), x, G from a kernel CSV."""
    head = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                head[k] = v
            elif line.startswith("x,"):
                continue
            elif line.strip():
                a, b = line.split(",")
                rows.append((float(a), float(b)))
    arr = np.array(rows)
    return head, arr[:, 0], arr[:, 1]


def _band(P: Ultrapolynomial, dxi: float, n_half: int):
    """Band samples of -log P and the cut frequency."""
    k_box = int(math.floor(P.box / dxi))
    k_max = min(n_half - 1, k_box)
    xi = np.arange(k_max + 1) * dxi
    lp = P.log_abs_real(xi)
    beyond = np.nonzero(lp > LOG_CUT)[0]
    if len(beyond):
        k_cut = int(beyond[0])
    else:
        k_cut = k_max + 1
    xi_band = xi[:k_cut]
    return xi_band, -lp[:k_cut]


def build_kernel(P: Ultrapolynomial, strip: StripReport | None, *, x_max: float = 32.0, N: int = 2 ** 14,
                 tol: float = 1e-10) -> KernelGrid:
    """G(x_j) = (2 pi)^-1 int e^{i x_j xi} / P(xi) d xi on x_j in [-x_max, x_max)."""
    if strip is None:
        raise ConstructionError("run strip_check first: the kernel needs a verified lower bound")
    if not strip.nonvanishing or not strip.C_prime > 0 or strip.min_abs_real < 1.0 - 1e-12:
        raise ConstructionError("strip check did not certify P on the real axis")
    if P.d != 1:
        raise ConstructionError("only d = 1 kernels")
    if N < 16 or N & (N - 1):
        raise ConstructionError("N must be a power of two >= 16")
    dxi = math.pi / x_max
    dx = 2 * x_max / N
    n_half = N // 2
    nyquist = n_half * dxi
    xi, log_g = _band(P, dxi, n_half)

    # keep every sample above e^-LOG_CUT; tol is a requirement on what remains
    def trunc(xi0):
        return _tail_integral_bound(P.log_s, P.q, xi0) / math.pi

    if len(xi) < 2 or trunc(xi[-1] + dxi) > tol:
        xi_req = xi[-1] if len(xi) else dxi
        while trunc(xi_req) > tol and xi_req < 1e6:
            xi_req *= 1.25
        budget = min(nyquist, P.box)
        raise TruncationError(
            f"tol {tol:g} needs Xi >= {xi_req:.4g} but the budget is {budget:.4g} "
            f"(Nyquist {nyquist:.4g}, box {P.box:.4g})")
    trunc_bound = trunc(xi[-1] + dxi) + math.exp(log_g[-1]) * dxi / math.pi
    # aliasing: |G(x)| <= B_y e^{-y|x|} with B_y = (2 pi)^-1 int |1/P(xi + i y)|
    y = 0.9 * P.zero_free_half_width
    alias = _alias_bound(P, y, x_max)
    ghat = np.exp(log_g)
    rounding = 8 * EPS * (ghat[0] + 2 * ghat[1:].sum()) * dxi / (2 * math.pi) * math.log2(N)
    # samples in FFT order, symmetric
    full = np.zeros(N)
    full[: len(ghat)] = ghat
    full[N - len(ghat) + 1:] = ghat[1:][::-1]
    g = np.fft.ifft(full) * (N * dxi / (2 * math.pi))
    g = np.fft.fftshift(g)
    x = (np.arange(N) - n_half) * dx
    imag = float(np.max(np.abs(g.imag)))
    if imag > 1e-12 * max(1.0, float(np.max(np.abs(g.real)))):
        raise ConsistencyError(f"kernel has imaginary residue {imag:.3g}")
    tb = trunc_bound + alias + rounding
    return KernelGrid(P, float(x_max), int(N), dx, dxi, float(xi[-1]), tb, trunc_bound, alias, rounding,
                      float(tol), "fft", imag, x, g.real.copy(), xi, log_g)


def _alias_bound(P: Ultrapolynomial, y: float, x_max: float) -> float:
    """sum_{m != 0} |G(x + 2 m x_max)| for |x| <= x_max from the shifted-contour bound."""
    if y <= 0:
        return math.inf
    xr = math.sqrt(max(P.box ** 2 - y ** 2, 0.0))
    xi = np.linspace(-xr, xr, 4001)
    lp = P.log_eval(xi + 1j * y).real
    integrand = np.exp(-lp)
    B = np.trapezoid(integrand, xi) / (2 * math.pi)
    B += 2 * _tail_integral_bound(P.log_s, P.q, xr) / (2 * math.pi) * 2  # |P(xi+iy)| >= |P(xi)|/2 far out
    # worst point |x| = x_max: neighbours at distance >= x_max, then 3 x_max, ...
    r = math.exp(-2 * y * x_max)
    return float(2 * B * math.exp(-y * x_max) / (1 - r))


def _synth(G: KernelGrid, mult) -> np.ndarray:
    """F^{-1}[mult(xi) / P(xi)] on the x-grid (complex)."""
    N = G.N
    k = np.fft.fftfreq(N, 1.0 / N)
    xi = k * G.dxi
    spec = mult(xi) * G.ghat(xi)
    out = np.fft.ifft(spec) * (N * G.dxi / (2 * math.pi))
    return np.fft.fftshift(out)


# ---------------------------------------------------------------------------
# decay


@dataclass(frozen=True)
class DecayFit:
    t: float
    table: tuple  # (alpha, beta, C)
    C_max: float
    sigma_t: float
    sigma_argmax: tuple  # (alpha, x)
    noise_floor: float
    passed: bool
    saturated: bool = False  # sup attained at alpha_cap or at the grid edge

    def to_dict(self) -> dict:
        return {"t": self.t, "table": [list(r) for r in self.table], "C_max": self.C_max,
                "sigma_t": self.sigma_t, "sigma_argmax": list(self.sigma_argmax),
                "noise_floor": self.noise_floor, "pass": self.passed, "saturated": self.saturated}


def verify_decay(G: KernelGrid, t: float = 0.25, alpha_cap: int = 6, beta_cap: int = 6,
                 A: WeightSequence | None = None) -> DecayFit:
    if G.tail_bound > 1e-10:
        raise TruncationError(f"kernel tail bound {G.tail_bound:.3g} exceeds 1e-10; rebuild with tighter tol")
    M = G.P.base
    A = M if A is None else A
    for a in range(alpha_cap + 1):
        tb = _tail_integral_bound(G.P.log_s, G.P.q, G.xi_cut + G.dxi, a)
        if tb > 1e-8:
            raise TruncationError(f"xi^{a}/P is not negligible past the band (tail {tb:.3g}); raise Xi")
    ax = np.abs(G.x)
    with np.errstate(divide="ignore"):
        logx = np.log(ax)
    logw = associated(A, t * ax)
    table = []
    sig, sig_at = 0.0, (0, 0.0)
    noise = 0.0
    for a in range(alpha_cap + 1):
        d = np.abs(G.derivative(a))
        floor = G.rounding_bound * max(1.0, G.xi_cut) ** a * 4
        noise = max(noise, floor)
        la = math.log(t) * a - M.log_values[a]
        with np.errstate(divide="ignore"):
            ld = np.log(d)
        for b in range(beta_cap + 1):
            lb = b * (math.log(t) + logx) if b else np.zeros_like(logx)
            C = float(np.exp(np.max(ld + lb) + la - A.log_values[b]))
            table.append((a, b, C))
        w = ld + logw + la
        i = int(np.argmax(w))
        if math.exp(w[i]) > sig:
            sig, sig_at = float(math.exp(w[i])), (a, float(G.x[i]))
    C_max = max(c for _, _, c in table)
    passed = bool(np.all(np.isfinite([c for _, _, c in table])) and math.isfinite(sig))
    saturated = sig_at[0] == alpha_cap or abs(sig_at[1]) >= G.x_max - G.dx
    return DecayFit(float(t), tuple(table), C_max, sig, sig_at, noise, passed, bool(saturated))


# ---------------------------------------------------------------------------
# P(D) G = delta


@dataclass(frozen=True)
class DeltaResult:
    spectral: float
    spatial: float
    target: float
    residual: float
    route_gap: float
    near_factors: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_delta(G: KernelGrid, P: Ultrapolynomial, phi: TestFunction, tol: float = 1e-6,
                 near_budget: float = 1e6) -> DeltaResult:
    """<G, P(-D) phi> two ways, against phi(0)."""
    if not phi.has_fourier():
        raise DomainError("phi needs an exact Fourier transform")
    target = float(phi(np.array([0.0]))[0])
    spectral = _delta_spectral(G, P, phi)
    spatial, m = _delta_spatial(G, P, phi, near_budget)
    gap = abs(spectral - spatial)
    if gap > 10 * tol:
        raise ConsistencyError(f"spectral and spatial pairings differ by {gap:.3g} (> 10 tol)")
    residual = max(abs(spectral - target), abs(spatial - target))
    return DeltaResult(spectral, spatial, target, residual, gap, m)


def _delta_spectral(G: KernelGrid, P: Ultrapolynomial, phi: TestFunction) -> float:
    # (2 pi)^-1 int G^(xi) P(xi) phi^(-xi) d xi; P re-evaluated through the complex path
    xi = G.xi
    lp = P.log_eval(xi + 0j).real
    full_xi = np.concatenate([-xi[1:][::-1], xi])
    log_gp = np.concatenate([(G.log_ghat + lp)[1:][::-1], G.log_ghat + lp])
    lphi = phi.log_abs_fourier(-full_xi)
    ph = phi.fourier_phase(-full_xi)
    vals = np.exp(log_gp + lphi) * ph
    return float((vals.sum() * G.dxi / (2 * math.pi)).real)


def _delta_spatial(G: KernelGrid, P: Ultrapolynomial, phi: TestFunction, budget: float):
    # split P = P_near P_far: <G, P(D) phi> = <P_far(D) G, P_near(D) phi>
    xi_s = np.linspace(0, min(P.box, G.xi_cut), 2049)
    lphi = np.maximum(phi.log_abs_fourier(xi_s), phi.log_abs_fourier(-xi_s))
    m = 1
    for cand in range(1, len(P.log_s) + 1):
        lpn = PartialProduct(P.q, P.log_s[:cand], P.box).log_abs_real(xi_s)
        mass = np.trapezoid(np.exp(np.minimum(lpn + lphi, 700)), xi_s) / math.pi
        if mass > budget:
            break
        m = cand
    near = PartialProduct(P.q, P.log_s[:m], P.box)
    # G_far = F^{-1}[1 / P_near] on the kernel grid
    N = G.N
    xi = np.fft.fftfreq(N, 1.0 / N) * G.dxi
    spec = np.exp(-near.log_abs_real(xi))
    g_far = (np.fft.fftshift(np.fft.ifft(spec)) * (N * G.dxi / (2 * math.pi))).real
    lo, hi = phi.window() if phi.window() is not None else (-G.x_max, G.x_max)
    psi = np.zeros(N)
    sel = (G.x >= lo - 30) & (G.x <= hi + 30)
    xs = G.x[sel]
    chunk = 2048
    vals = []
    for a in range(0, len(xs), chunk):
        vals.append(multiplier_apply(near, phi, xs[a:a + chunk]))
    psi[sel] = np.concatenate(vals)
    total = float(np.sum(g_far * psi) * G.dx)
    return total, m


# ---------------------------------------------------------------------------
# Weierstrass example


@dataclass(frozen=True)
class WeierstrassResult:
    x: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)
    residual: float
    decay_C: float
    decay_table: tuple  # (k, r^k ||e^{tau|x|} f^(k)|| / M_k)
    window: tuple
    mode: str  # damped | eigen

    def to_dict(self) -> dict:
        return {"residual": self.residual, "decay_C": self.decay_C,
                "decay_table": [list(r) for r in self.decay_table], "window": list(self.window),
                "mode": self.mode}


def solve_weierstrass(G: KernelGrid, P: Ultrapolynomial, a: float = 0.5, b: int = 3, tau: float = 1.0,
                      N_terms: int = 12, window=(-4.0, 4.0), r: float = 0.5, n_points: int = 161,
                      undamped: bool = False) -> WeierstrassResult:
    """f = G * g for the damped Weierstrass target g; residual sup |P(D) f - g| on the window.

    With ``undamped=True`` and N_terms = 0 the target is cos(b pi x) and f is the
    eigenfunction cos(b pi x) / P(b pi).
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise DomainError("window must be an interval")
    x = np.linspace(lo, hi, n_points)
    if undamped:
        if N_terms != 0:
            raise DomainError("the undamped case is a single cosine (N_terms = 0)")
        w = b * math.pi
        lg = _kernel_log_ghat(G, w)
        f = np.cos(w * x) * math.exp(lg)
        lp = float(P.log_eval(np.array([w + 0j]))[0].real)
        res = abs(math.expm1(lp + lg)) * float(np.max(np.abs(np.cos(w * x))))
        table = tuple((k, r ** k * w ** k * math.exp(lg) / math.exp(P.base.log_values[k])) for k in range(7))
        return WeierstrassResult(x, f, float(res), max(c for _, c in table), table, (lo, hi), "eigen")
    if not 0 < a < 1:
        raise DomainError("need 0 < a < 1")
    if b < 3 or b % 2 == 0:
        raise DomainError("b must be an odd integer >= 3")
    if a * b <= 1:
        raise DomainError("need a b > 1")
    if not tau > 0:
        raise DomainError("tau must be positive: an undamped target has no controlled convolution tail")
    # window against the kernel's mass
    absg = np.abs(G.values)
    out = (G.x < lo) | (G.x > hi)
    if absg[out].sum() > 0.01 * absg.sum():
        raise DomainError("more than 1% of |G| lies outside the window; widen it")
    g = DampedWeierstrass(a, b, tau, N_terms)
    xi = np.concatenate([-G.xi[1:][::-1], G.xi])
    lgh = np.concatenate([G.log_ghat[1:][::-1], G.log_ghat])
    ghat_g = g.fourier(xi).real
    E = np.exp(1j * np.outer(x, xi))
    wts = G.dxi / (2 * math.pi)
    f = (E @ (np.exp(lgh) * ghat_g)).real * wts
    # P(D) f - g over the band; the out-of-band parts cancel identically
    lp = P.log_eval(xi + 0j).real
    pdf_band = (E @ (np.exp(lgh + lp) * ghat_g)).real * wts
    g_band = _inband_exact(g, x, float(G.xi[-1] + G.dxi / 2))
    residual = float(np.max(np.abs(pdf_band - g_band)))
    # decay estimate on the window
    table = []
    ex = np.exp(tau * np.abs(x))
    for k in range(7):
        dk = (E @ ((1j * xi) ** k * np.exp(lgh) * ghat_g)).real * wts
        table.append((k, float(r ** k * np.max(ex * np.abs(dk)) / math.exp(P.base.log_values[k]))))
    return WeierstrassResult(x, f, residual, max(c for _, c in table), tuple(table), (lo, hi), "damped")


def _kernel_log_ghat(G: KernelGrid, w: float) -> float:
    k = w / G.dxi
    kr = int(round(k))
    if abs(k - kr) > 1e-9 * max(1.0, k) or kr >= len(G.xi):
        raise DomainError(f"frequency {w:g} is not a kernel grid frequency inside the band")
    return float(G.log_ghat[kr])


def _inband_exact(g: DampedWeierstrass, x: np.ndarray, cut: float) -> np.ndarray:
    """(2 pi)^-1 int_{-cut}^{cut} g^(xi) e^{i x xi} d xi by adaptive cosine-weighted quadrature."""
    t = g.tau
    out = np.zeros(len(x))
    with warnings.catch_warnings():
        # roundoff warnings at the 1e-14 absolute floor are expected here
        warnings.simplefilter("ignore")
        _inband_accumulate(g, x, cut, t, out)
    return out


def _inband_accumulate(g, x, cut, t, out):
    for amp, w in zip(g.amplitudes(), g.frequencies()):
        lor = lambda s: t / (t * t + (s - w) ** 2) + t / (t * t + (s + w) ** 2)
        brk = sorted({0.0, cut} | ({max(0.0, w - 10 * t), min(cut, w + 10 * t)} if w < cut else set()))
        for i, xv in enumerate(x):
            tot = 0.0
            for a0, a1 in zip(brk[:-1], brk[1:]):
                if a1 <= a0:
                    continue
                if xv == 0:
                    val, _ = quad(lor, a0, a1, epsabs=1e-14, epsrel=1e-12, limit=200)
                else:
                    val, _ = quad(lor, a0, a1, weight="cos", wvar=xv, epsabs=1e-14, epsrel=1e-12, limit=200)
                tot += val
            out[i] += amp * tot / math.pi
