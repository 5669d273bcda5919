"""Pointwise fractional Laplacian on radial power weights.

Everything is built around the kernel-normalized operator

    L u(x) = 2 P.V. integral of (u(x) - u(y)) |x-y|^(-N-2s) dy,

evaluated on radial functions through the spherical-mean identity

    L u(r e1) = 2 sigma_{N-1} * int_0^inf t^(-1-2s) (u(r) - S_u(r, t)) dt,

with S_u the average of u over the sphere of radius t around r e1.  The
t -> 0 singularity cancels to second order and is handled by an analytic
Taylor cap using the classical radial Laplacian of u; the angular mean uses
Gauss-Jacobi nodes with an adaptive algebraic-weight fallback when the
integrand develops a boundary layer (t close to r at large radii).

The constant A_mu with L |x|^(-mu) = 2 A_mu |x|^(-mu-2s) is evaluated from its
inversion-reduced form: an integral over |y| > 1 whose integrand vanishes
identically at the critical weight mu = N - 2s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import ToleranceError

# beyond this radius the asymptotic far field 2 A_mu r^(-mu-2s) replaces
# quadrature (mu < N only): avoids cancellation at extreme radii
FAR_FIELD_SWITCH_RADIUS = 1.0e4

_QUAD_LIMIT = 300


def sphere_area(m: int) -> float:
    """Surface measure of the unit sphere S^m (two points for m = 0)."""
    if m < 0:
        raise ValueError("sphere dimension must be >= 0")
    return 2.0 * math.pi ** ((m + 1) / 2.0) / special.gamma((m + 1) / 2.0)


@lru_cache(maxsize=64)
def _gauss_jacobi(N: int, order: int):
    """Nodes/weights on (-1,1) for weight (1-c^2)^((N-3)/2), weights normalized."""
    a = (N - 3) / 2.0
    c, w = special.roots_jacobi(order, a, a)
    return c, w / w.sum()


def sphere_mean(f, a: float, b: float, N: int, rel_tol: float = 1e-10,
                abs_tol: float = 0.0) -> float:
    """Average of f(|a e1 + b eta|) over unit directions eta in R^N.

    f must accept numpy arrays of radii.  The argument |a e1 + b eta| ranges
    over [|a-b|, a+b]; when f develops a boundary layer there (power weights
    at a ~ b >> 1) the fixed Gauss-Jacobi rule is cross-checked at two orders
    and an adaptive algebraic-weight quadrature in v = |..|^2 takes over.
    """
    if N == 1:
        return 0.5 * (float(f(a + b)) + float(f(abs(a - b))))
    if a == 0.0 or b == 0.0:
        return float(f(max(a, b)))
    c1, w1 = _gauss_jacobi(N, 48)
    c2, w2 = _gauss_jacobi(N, 96)
    ab2 = a * a + b * b
    m1 = float(w1 @ f(np.sqrt(ab2 + 2.0 * a * b * c1)))
    m2 = float(w2 @ f(np.sqrt(ab2 + 2.0 * a * b * c2)))
    if abs(m1 - m2) <= rel_tol * abs(m2) + abs_tol:
        return m2
    B, A = (a - b) ** 2, (a + b) ** 2
    mexp = (N - 3) / 2.0
    num, _ = integrate.quad(lambda v: float(f(math.sqrt(v))), B, A,
                            weight="alg", wvar=(mexp, mexp),
                            limit=_QUAD_LIMIT, epsabs=0.0, epsrel=max(rel_tol, 1e-11))
    den = (A - B) ** (N - 2) * special.beta((N - 1) / 2.0, (N - 1) / 2.0)
    return num / den


# ---------------------------------------------------------------------------
# power weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerWeight:
    """w_mu(x) = (1 + |x|^2)^(-mu/2), the universal comparison weight."""

    mu: float

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be > 0")

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = (1.0 + r * r) ** (-self.mu / 2.0)
        return float(out) if out.ndim == 0 else out

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        out = -self.mu * r * (1.0 + r * r) ** (-self.mu / 2.0 - 1.0)
        return float(out) if out.ndim == 0 else out

    def laplacian(self, r, N: int = 1):
        """Classical radial Laplacian u'' + (N-1) u'/r; finite at r = 0."""
        r = np.asarray(r, dtype=float)
        mu = self.mu
        out = -mu * (N + (N - mu - 2.0) * r * r) * (1.0 + r * r) ** (-mu / 2.0 - 2.0)
        return float(out) if out.ndim == 0 else out

    def laplacian_fn(self, N: int):
        return lambda r: self.laplacian(r, N)


# ---------------------------------------------------------------------------
# generic pointwise evaluator
# ---------------------------------------------------------------------------

def fraclap_radial(u, lap_u, N: int, s: float, r: float,
                   rel_tol: float = 1e-8) -> tuple[float, float]:
    """(value, error estimate) of the kernel-normalized operator at radius r.

    u: vectorized radial profile; lap_u: its classical radial Laplacian
    (used only for the analytic cap on [0, t_b], t_b = 1e-4 max(r, 1)).
    Raises ToleranceError when the requested relative tolerance is missed by
    more than a decade away from sign changes.
    """
    if r < 0:
        raise ValueError("radius must be >= 0")
    if not 0.0 < s < 1.0:
        raise ValueError("s must be in (0, 1)")
    sigma = sphere_area(N - 1)
    scale = max(r, 1.0)
    tb = 1e-4 * scale
    ur = float(u(r))
    core = -float(lap_u(r)) / (2.0 * N) * tb ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    # next Taylor order enters at t_b^2 relative to the cap
    core_err = abs(core) * tb * tb

    inner_rel = min(1e-10, rel_tol * 1e-2)
    inner_abs = 1e-13 * max(abs(ur), 1e-30)

    def f(t: float) -> float:
        S = sphere_mean(u, r, t, N, rel_tol=inner_rel, abs_tol=inner_abs)
        return (ur - S) * t ** (-1.0 - 2.0 * s)

    T = max(8.0 * scale, 40.0)
    pts = sorted({x for x in (0.5 * r, r, 2.0 * r) if tb < x < T})

    a1, e1 = integrate.quad(f, tb, T, points=pts or None, limit=_QUAD_LIMIT,
                            epsabs=0.0, epsrel=1e-6)
    a2, e2 = integrate.quad(f, T, np.inf, limit=_QUAD_LIMIT,
                            epsabs=0.0, epsrel=1e-6)
    magnitude = abs(core) + abs(a1) + abs(a2) + 1e-300
    target_abs = rel_tol * magnitude / 4.0
    if e1 > target_abs:
        a1, e1 = integrate.quad(f, tb, T, points=pts or None, limit=_QUAD_LIMIT,
                                epsabs=target_abs, epsrel=rel_tol / 4.0)
    if e2 > target_abs:
        a2, e2 = integrate.quad(f, T, np.inf, limit=_QUAD_LIMIT,
                                epsabs=target_abs, epsrel=rel_tol / 4.0)

    total = core + a1 + a2
    err = core_err + e1 + e2
    value = 2.0 * sigma * total
    err_value = 2.0 * sigma * err
    # err is compared against the un-cancelled magnitude: pointwise relative
    # accuracy is only promised away from the regime sign changes
    if err > 50.0 * rel_tol * magnitude:
        raise ToleranceError(
            f"pointwise quadrature missed rel_tol={rel_tol:g} at r={r:g}", err_value)
    return value, err_value


# ---------------------------------------------------------------------------
# the A_mu constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmuResult:
    value: float
    quadrature_error_estimate: float
    N: int
    s: float
    mu: float
    divergent: bool = False


def amu(N: int, s: float, mu: float, tol: float = 1e-10) -> AmuResult:
    """A_mu from the inversion-reduced integral over |y| > 1.

    Positive for mu in (0, N-2s), exactly zero at mu = N-2s (the integrand
    vanishes identically), negative on (N-2s, N); mu >= N is reported as
    divergent (value -inf) rather than integrated.
    """
    if mu <= 0:
        raise ValueError("mu must be > 0")
    if not 0.0 < s < 1.0 or N <= 2 * s:
        raise ValueError("need 0 < s < 1 and N > 2s")
    if mu >= N:
        return AmuResult(value=-math.inf, quadrature_error_estimate=0.0,
                         N=N, s=s, mu=mu, divergent=True)

    sigma = sphere_area(N - 1)
    nu = N + 2.0 * s

    def kernel(ell):
        return np.asarray(ell, dtype=float) ** (-nu)

    def radial(rho: float) -> float:
        base = (rho ** mu - 1.0) * (rho ** (-mu) - rho ** (2.0 * s - N))
        if N == 1:
            ker = (rho - 1.0) ** (-1.0 - 2.0 * s) + (rho + 1.0) ** (-1.0 - 2.0 * s)
            return base * ker
        km = sphere_mean(kernel, 1.0, rho, N, rel_tol=min(1e-10, tol * 1e-2),
                         abs_tol=0.0)
        return base * rho ** (N - 1) * sigma * km

    # integrand behaves like (rho-1)^(1-2s) at the inner endpoint
    i1, e1 = integrate.quad(radial, 1.0, 2.0, limit=_QUAD_LIMIT,
                            epsabs=tol / 4.0, epsrel=tol / 4.0)
    i2, e2 = integrate.quad(radial, 2.0, np.inf, limit=_QUAD_LIMIT,
                            epsabs=tol / 4.0, epsrel=tol / 4.0)
    return AmuResult(value=i1 + i2, quadrature_error_estimate=e1 + e2,
                     N=N, s=s, mu=mu)


@lru_cache(maxsize=256)
def _amu_value(N: int, s: float, mu: float) -> float:
    return amu(N, s, mu).value


# ---------------------------------------------------------------------------
# pointwise operator on w_mu and derived checks
# ---------------------------------------------------------------------------

def fraclap_w_pointwise(N: int, s: float, mu: float, r: float,
                        rel_tol: float = 1e-8) -> float:
    """Kernel-normalized fractional Laplacian of w_mu at radius r.

    Beyond FAR_FIELD_SWITCH_RADIUS (mu < N only) the asymptotic expansion
    2 A_mu r^(-mu-2s) is used instead of quadrature.
    """
    w = PowerWeight(mu)
    if r > FAR_FIELD_SWITCH_RADIUS and mu < N:
        return 2.0 * _amu_value(N, float(s), float(mu)) * r ** (-(mu + 2.0 * s))
    value, _ = fraclap_radial(w.value, w.laplacian_fn(N), N, s, r, rel_tol)
    return value


class Regime(Enum):
    POSITIVE_POWER = "positive_power"
    CRITICAL = "critical"
    NEGATIVE_POWER = "negative_power"
    NEGATIVE_LOG = "negative_log"
    NEGATIVE_CAPPED = "negative_capped"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    predicted_far_field: str
    onset_radius_estimate: float
    far_field_exponent: float
    far_field_sign: int
    has_log_factor: bool


def _classify(N: int, s: float, mu: float) -> Regime:
    crit = N - 2.0 * s
    tol = 1e-12 * max(1.0, N)
    if abs(mu - crit) <= tol:
        return Regime.CRITICAL
    if mu < crit:
        return Regime.POSITIVE_POWER
    if abs(mu - N) <= tol:
        return Regime.NEGATIVE_LOG
    if mu < N:
        return Regime.NEGATIVE_POWER
    return Regime.NEGATIVE_CAPPED


def regime_classify(N: int, s: float, mu: float,
                    scan: bool = True) -> RegimeReport:
    """Far-field regime of (-Lap)^s w_mu per the (N-2s, N) trichotomy.

    The onset radius is found by scanning the pointwise evaluator for stable
    sign plus the predicted log-log slope; pass scan=False to skip the scan
    (onset reported as nan).
    """
    if mu <= 0:
        raise ValueError("mu must be > 0")
    regime = _classify(N, s, mu)
    if regime is Regime.POSITIVE_POWER:
        expo, sign, logf = mu + 2.0 * s, +1, False
        desc = f"+C r^-{expo:g}"
    elif regime is Regime.CRITICAL:
        expo, sign, logf = N + 2.0 * s, +1, False
        desc = (f"C w_mu^(2_s^*-1) exactly at every radius "
                f"(far field +C r^-{expo:g})")
    elif regime is Regime.NEGATIVE_POWER:
        expo, sign, logf = mu + 2.0 * s, -1, False
        desc = f"-C r^-{expo:g}"
    elif regime is Regime.NEGATIVE_LOG:
        expo, sign, logf = N + 2.0 * s, -1, True
        desc = f"-C ln r / r^{expo:g}"
    else:
        expo, sign, logf = N + 2.0 * s, -1, False
        desc = f"-C r^-{expo:g}"

    onset = math.nan
    if scan:
        if regime is Regime.CRITICAL:
            onset = 0.0
        else:
            radii = np.geomspace(2.0, 4096.0, 12)
            vals = np.array([fraclap_w_pointwise(N, s, mu, float(r), rel_tol=1e-6)
                             for r in radii])
            good = np.zeros(len(radii), dtype=bool)
            slopes = np.diff(np.log(np.abs(vals) + 1e-300)) / np.diff(np.log(radii))
            for k in range(len(radii) - 1):
                sign_ok = np.all(np.sign(vals[k:]) == sign)
                band = 0.35 if logf else 0.15
                slope_ok = np.all(np.abs(slopes[k:] + expo) <= band)
                good[k] = sign_ok and slope_ok
            hits = np.flatnonzero(good)
            onset = float(radii[hits[0]]) if hits.size else math.inf
    return RegimeReport(regime=regime, predicted_far_field=desc,
                        onset_radius_estimate=onset, far_field_exponent=expo,
                        far_field_sign=sign, has_log_factor=logf)


def scaling_check(N: int, s: float, mu: float, lam: float, r: float,
                  rel_tol: float = 1e-9) -> tuple[float, float, float]:
    """Exact scaling law: L[w_mu(lam .)](r) vs lam^(2s) (L w_mu)(lam r).

    Both sides come from independent quadratures; returns (lhs, rhs, gap)
    with gap the relative difference.
    """
    if lam <= 0 or r <= 0:
        raise ValueError("lam and r must be > 0")
    w = PowerWeight(mu)

    def scaled(x):
        return w.value(lam * np.asarray(x, dtype=float))

    def scaled_lap(x):
        return lam * lam * w.laplacian(lam * np.asarray(x, dtype=float), N)

    lhs, _ = fraclap_radial(scaled, scaled_lap, N, s, r, rel_tol)
    rhs_val, _ = fraclap_radial(w.value, w.laplacian_fn(N), N, s, lam * r, rel_tol)
    rhs = lam ** (2.0 * s) * rhs_val
    gap = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return lhs, rhs, gap


# ---------------------------------------------------------------------------
# normalization multiplier (Fourier cross-check constant)
# ---------------------------------------------------------------------------

_norm_cache: dict[tuple[int, float], float] = {}


def fourier_gaussian_reference(N: int, s: float, r: float) -> float:
    """|xi|^(2s) symbol applied to exp(-|x|^2/2), evaluated at radius r.

    Closed Gamma form at r = 0; a Hankel-type integral otherwise.
    """
    if r == 0.0:
        return 2.0 ** s * special.gamma(N / 2.0 + s) / special.gamma(N / 2.0)
    nu = N / 2.0 - 1.0

    def f(rho):
        return rho ** (2.0 * s + N / 2.0) * math.exp(-rho * rho / 2.0) \
            * special.jv(nu, r * rho)

    val, _ = integrate.quad(f, 0.0, np.inf, limit=_QUAD_LIMIT,
                            epsabs=1e-13, epsrel=1e-12)
    return r ** (1.0 - N / 2.0) * val


def normalization_multiplier(N: int, s: float, rel_tol: float = 1e-9) -> float:
    """m > 0 with kernel-normalized operator = m |xi|^(2s) on the Fourier side.

    Computed once per (N, s) by applying the quadrature evaluator to a
    Gaussian and dividing by the exact Fourier-side value; cached (idempotent
    under concurrent initialization).
    """
    key = (N, float(s))
    cached = _norm_cache.get(key)
    if cached is not None:
        return cached

    def gauss(x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-x * x / 2.0)
        return float(out) if out.ndim == 0 else out

    def gauss_lap(x):
        x = np.asarray(x, dtype=float)
        out = (x * x - N) * np.exp(-x * x / 2.0)
        return float(out) if out.ndim == 0 else out

    num, _ = fraclap_radial(gauss, gauss_lap, N, s, 0.0, rel_tol)
    m = num / fourier_gaussian_reference(N, s, 0.0)
    _norm_cache[key] = m
    return m


def normalization_multiplier_at(N: int, s: float, r: float,
                                rel_tol: float = 1e-9) -> float:
    """Same ratio measured at radius r (consistency oracle for the cache)."""

    def gauss(x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-x * x / 2.0)
        return float(out) if out.ndim == 0 else out

    def gauss_lap(x):
        x = np.asarray(x, dtype=float)
        out = (x * x - N) * np.exp(-x * x / 2.0)
        return float(out) if out.ndim == 0 else out

    num, _ = fraclap_radial(gauss, gauss_lap, N, s, r, rel_tol)
    return num / fourier_gaussian_reference(N, s, r)


# ---------------------------------------------------------------------------
# Gagliardo tail decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GagliardoReport:
    partial: tuple[float, float, float]      # truncations at R, 2R, 4R
    near_increments: tuple[float, float]     # near-diagonal part of the shells
    far_increments: tuple[float, float]
    increment_ratio: float
    verdict: str                             # "convergent" | "divergent trend"
    membership_predicate: bool               # mu > (N-2s)/2

    @property
    def convergent(self) -> bool:
        return self.verdict == "convergent"


def _kernel_mean_full(N: int, s: float, a: float, b: float) -> float:
    nu = N + 2.0 * s

    def kern(ell):
        return np.asarray(ell, dtype=float) ** (-nu)

    return sphere_mean(kern, a, b, N, rel_tol=1e-8, abs_tol=0.0)


def _kernel_mean_near(N: int, s: float, r: float, rho: float) -> float:
    """Mean of |x-y|^(-N-2s) restricted to |x-y| <= r/2 (|x|=r, |y|=rho)."""
    nu = N + 2.0 * s
    if N == 1:
        out = 0.0
        if abs(r - rho) <= r / 2.0 and r != rho:
            out += 0.5 * abs(r - rho) ** (-nu)
        if r + rho <= r / 2.0:
            out += 0.5 * (r + rho) ** (-nu)
        return out
    B, A = (r - rho) ** 2, (r + rho) ** 2
    vc = r * r / 4.0
    if vc <= B:
        return 0.0
    if vc >= A:
        return _kernel_mean_full(N, s, r, rho)
    mexp = (N - 3) / 2.0

    def f(v):
        return v ** (-nu / 2.0) * (A - v) ** mexp

    num, _ = integrate.quad(f, B, vc, weight="alg", wvar=(mexp, 0.0),
                            limit=_QUAD_LIMIT, epsabs=0.0, epsrel=1e-9)
    den = (A - B) ** (N - 2) * special.beta((N - 1) / 2.0, (N - 1) / 2.0)
    return num / den


def _gagliardo_shell(N: int, s: float, w, a: float, b: float,
                     part: str) -> float:
    """Seminorm contribution of {a < |x| <= b, |y| < |x|} (doubled later).

    part: "full", "near" (|x-y| <= |x|/2) or "far".
    """
    sigma = sphere_area(N - 1)

    def inner(r: float) -> float:
        wr = float(w(r))

        def g(rho: float) -> float:
            if rho == r:
                return 0.0
            if part == "near":
                km = _kernel_mean_near(N, s, r, rho)
            elif part == "far":
                km = (_kernel_mean_full(N, s, r, rho)
                      - _kernel_mean_near(N, s, r, rho))
            else:
                km = _kernel_mean_full(N, s, r, rho)
            d = wr - float(w(rho))
            return d * d * rho ** (N - 1) * km

        lo = 0.0 if part != "near" else r / 2.0
        pts = [x for x in (0.5 * r, 0.9 * r, 0.99 * r) if lo < x < r]
        val, _ = integrate.quad(g, lo, r, points=pts or None,
                                limit=_QUAD_LIMIT, epsabs=0.0, epsrel=1e-7)
        return val * r ** (N - 1)

    out, _ = integrate.quad(inner, a, b, limit=100, epsabs=0.0, epsrel=1e-6)
    return 2.0 * sigma * sigma * out


def gagliardo_tail(N: int, s: float, mu: float, R: float) -> GagliardoReport:
    """Truncated Gagliardo seminorm of w_mu with a convergence verdict.

    Computes the near/far split of the seminorm over |x| <= R, 2R, 4R and
    declares "convergent" when the shell increments decay geometrically
    (ratio < 0.995); this matches the membership predicate mu > (N-2s)/2.
    """
    if R <= 1.0:
        raise ValueError("R must be > 1")
    w = PowerWeight(mu).value
    base = _gagliardo_shell(N, s, w, 0.0, R, "full")
    near1 = _gagliardo_shell(N, s, w, R, 2.0 * R, "near")
    near2 = _gagliardo_shell(N, s, w, 2.0 * R, 4.0 * R, "near")
    full1 = _gagliardo_shell(N, s, w, R, 2.0 * R, "full")
    full2 = _gagliardo_shell(N, s, w, 2.0 * R, 4.0 * R, "full")
    partial = (base, base + full1, base + full1 + full2)
    ratio = full2 / full1 if full1 > 0 else math.inf
    verdict = "convergent" if ratio < 0.995 else "divergent trend"
    return GagliardoReport(partial=partial,
                           near_increments=(near1, near2),
                           far_increments=(full1 - near1, full2 - near2),
                           increment_ratio=ratio, verdict=verdict,
                           membership_predicate=mu > (N - 2.0 * s) / 2.0)
