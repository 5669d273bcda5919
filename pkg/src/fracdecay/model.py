"""Problem definition: parameters, radial potential families, admissibility checks.

The equation under study is eps^(2s) (-Lap)^s u + V u = u^(p-1) on R^N with a
nonnegative continuous radial potential V that has a local well: the infimum of
V over the ball of radius ``well_radius`` is positive and strictly below the
boundary value.  Everything here is pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import AdmissibilityError

Number = float | int | Fraction


def as_float(x: Number) -> float:
    return float(x)


@dataclass(frozen=True)
class ProblemParams:
    """Dimension N, order s, nonlinearity exponent p, semiclassical eps."""

    N: int
    s: Number
    p: Number
    eps: Number

    def critical_p(self) -> float:
        return 2.0 * self.N / (self.N - 2.0 * as_float(self.s))

    def violations(self) -> list[str]:
        out = []
        N, s, p, eps = self.N, as_float(self.s), as_float(self.p), as_float(self.eps)
        if not (isinstance(self.N, int) and N >= 1):
            out.append(f"N must be an integer >= 1, got {self.N!r}")
            return out
        if not 0.0 < s < 1.0:
            out.append(f"0 < s < 1 fails (s = {s})")
        if N <= 2 * s:
            out.append(f"N > 2s fails ({N} <= {2 * s})")
        if p <= 2.0:
            out.append(f"p > 2 fails (p = {p})")
        if N > 2 * s and p >= self.critical_p():
            out.append(f"p < 2_s^* = {self.critical_p():.6g} fails (p = {p})")
        if eps <= 0.0:
            out.append(f"eps > 0 fails (eps = {eps})")
        return out

    def require_admissible(self) -> None:
        bad = self.violations()
        if bad:
            raise AdmissibilityError("; ".join(bad))


class PotentialKind(Enum):
    CONSTANT = "constant"
    POWER = "power-decay"
    LOG = "logarithmic-decay"
    COMPACT = "compact-support"
    TABULATED = "tabulated-radial"


# Fraction of the cutoff radius over which the compact-support family rolls off.
_CUTOFF_WIDTH = 0.1


def _smoothstep(x: np.ndarray) -> np.ndarray:
    """C^1 ramp from 1 at x<=0 to 0 at x>=1."""
    t = np.clip(x, 0.0, 1.0)
    return 1.0 - t * t * (3.0 - 2.0 * t)


@dataclass(frozen=True)
class PotentialSpec:
    """Radial potential with a declared decay class and a local well.

    ``omega`` is the tail decay rate ((1+r^omega) V(r) bounded above and below
    for the power family); ``math.inf`` for compact support.  The well lives in
    the ball of radius ``well_radius``.
    """

    kind: PotentialKind
    omega: float
    well_radius: float
    c_low: float
    c_high: float
    profile: Callable[[np.ndarray], np.ndarray]
    cutoff_radius: float | None = None
    table: tuple[np.ndarray, np.ndarray] | None = None
    label: str = ""

    # -- built-in families ---------------------------------------------------

    @staticmethod
    def power_decay(omega: float, delta: float = 1.5, well_radius: float = 1.0,
                    amplitude: float = 1.0) -> "PotentialSpec":
        """V(r) = amplitude*(1 + delta*min(r^2,1))*(1+r^2)^(-omega/2).

        delta > 2^(omega/2) - 1 guarantees the well condition for the unit ball.
        omega = 0 gives the no-decay member of the family.
        """
        if omega < 0:
            raise ValueError("omega must be >= 0")
        if delta <= 2.0 ** (omega / 2.0) - 1.0:
            raise ValueError("delta too small for the well condition: need "
                             f"delta > {2.0 ** (omega / 2.0) - 1.0:.6g}")

        def profile(r: np.ndarray) -> np.ndarray:
            r = np.asarray(r, dtype=float)
            well = 1.0 + delta * np.minimum(r * r, 1.0)
            return amplitude * well * (1.0 + r * r) ** (-omega / 2.0)

        return PotentialSpec(
            kind=PotentialKind.POWER, omega=float(omega), well_radius=well_radius,
            c_low=0.5 * amplitude, c_high=amplitude * (1.0 + delta) * 2.0,
            profile=profile, label=f"power(omega={omega:g}, delta={delta:g})")

    @staticmethod
    def constant(level: float = 1.0) -> "PotentialSpec":
        """V == level.  No well: the condition-(V) check reports False."""

        def profile(r: np.ndarray) -> np.ndarray:
            return np.full_like(np.asarray(r, dtype=float), level)

        return PotentialSpec(kind=PotentialKind.CONSTANT, omega=0.0,
                             well_radius=1.0, c_low=level, c_high=level,
                             profile=profile, label=f"constant({level:g})")

    @staticmethod
    def log_decay(delta: float = 1.5, well_radius: float = 1.0,
                  amplitude: float = 1.0) -> "PotentialSpec":
        """V(r) = amplitude*(1 + delta*min(r^2,1)) / log(e + r^2)."""

        def profile(r: np.ndarray) -> np.ndarray:
            r = np.asarray(r, dtype=float)
            well = 1.0 + delta * np.minimum(r * r, 1.0)
            return amplitude * well / np.log(math.e + r * r)

        return PotentialSpec(kind=PotentialKind.LOG, omega=0.0,
                             well_radius=well_radius, c_low=amplitude,
                             c_high=amplitude * (1.0 + delta), profile=profile,
                             label=f"log(delta={delta:g})")

    @staticmethod
    def compact_support(cutoff_radius: float = 5.0, delta: float = 1.5,
                        well_radius: float = 1.0, amplitude: float = 1.0) -> "PotentialSpec":
        """Well family hard-truncated to zero at cutoff_radius (C^1 rolloff)."""
        if cutoff_radius <= well_radius:
            raise ValueError("cutoff_radius must exceed well_radius")
        r_in = (1.0 - _CUTOFF_WIDTH) * cutoff_radius

        def profile(r: np.ndarray) -> np.ndarray:
            r = np.asarray(r, dtype=float)
            well = 1.0 + delta * np.minimum(r * r, 1.0)
            ramp = _smoothstep((r - r_in) / (cutoff_radius - r_in))
            return amplitude * well * ramp

        return PotentialSpec(kind=PotentialKind.COMPACT, omega=math.inf,
                             well_radius=well_radius, c_low=amplitude,
                             c_high=amplitude * (1.0 + delta), profile=profile,
                             cutoff_radius=cutoff_radius,
                             label=f"compact(R_cut={cutoff_radius:g})")

    @staticmethod
    def tabulated(radii: Sequence[float], values: Sequence[float], omega: float,
                  well_radius: float = 1.0) -> "PotentialSpec":
        """Two-column table (radius, value), strictly increasing radii.

        Beyond the table the declared omega power law extrapolates; callers can
        see when that happened through eval_potential_meta.
        """
        r = np.asarray(radii, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise ValueError("table needs matching 1-d radius/value columns, >= 2 rows")
        if not np.all(np.diff(r) > 0):
            raise ValueError("table radii must be strictly increasing")
        if r[0] > 0.0:
            r = np.concatenate([[0.0], r])
            v = np.concatenate([[v[0]], v])

        def profile(rr: np.ndarray) -> np.ndarray:
            rr = np.asarray(rr, dtype=float)
            inside = np.interp(rr, r, v)
            tail = v[-1] * ((1.0 + r[-1] ** 2) / (1.0 + rr * rr)) ** (omega / 2.0)
            return np.where(rr <= r[-1], inside, tail)

        pos = v[v > 0]
        return PotentialSpec(kind=PotentialKind.TABULATED, omega=float(omega),
                             well_radius=well_radius,
                             c_low=float(pos.min()) if pos.size else 0.0,
                             c_high=float(v.max()), profile=profile,
                             table=(r, v), label="tabulated")

    # -- evaluation ----------------------------------------------------------

    def eval(self, r):
        scalar = np.isscalar(r)
        out = self.profile(np.atleast_1d(np.asarray(r, dtype=float)))
        if not np.all(np.isfinite(out)):
            raise ValueError("potential evaluated to a non-finite value")
        if np.any(out < 0):
            raise ValueError("potential evaluated to a negative value")
        return float(out[0]) if scalar else out


def eval_potential(pot: PotentialSpec, r):
    """V(r) for scalar or array radius; r >= 0."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be >= 0")
    return pot.eval(r)


def eval_potential_meta(pot: PotentialSpec, r: float) -> tuple[float, bool]:
    """V(r) plus a flag marking tabulated-range extrapolation."""
    value = eval_potential(pot, r)
    extrapolated = (pot.kind is PotentialKind.TABULATED
                    and pot.table is not None and r > float(pot.table[0][-1]))
    return value, extrapolated


@dataclass(frozen=True)
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return not self.violations


def validate(params: ProblemParams, pot: PotentialSpec,
             sample_count: int = 256) -> ValidationReport:
    """Report every violated standing assumption; never raises."""
    violations = list(params.violations())
    try:
        ok, _ = verify_condition_V(pot, sample_count=max(16, sample_count))
        if not ok:
            violations.append("condition (V) fails: no strict well below the "
                              "boundary value of the potential")
    except ValueError as exc:
        violations.append(f"potential not evaluable: {exc}")
    if pot.kind is PotentialKind.POWER and math.isfinite(pot.omega):
        r = np.linspace(pot.well_radius, pot.well_radius + 200.0, 128)
        scaled = (1.0 + r ** pot.omega) * pot.eval(r)
        if scaled.min() < pot.c_low * (1 - 1e-9) or scaled.max() > pot.c_high * (1 + 1e-9):
            violations.append("power-decay envelope violated: (1+r^omega) V(r) "
                              f"ranges over [{scaled.min():.4g}, {scaled.max():.4g}] "
                              f"outside [{pot.c_low:.4g}, {pot.c_high:.4g}]")
    if pot.kind is PotentialKind.LOG:
        r = np.geomspace(1e-3, 1e6, 256)
        lower = (pot.eval(r) * np.log(math.e + r * r)).min()
        if lower <= 0:
            violations.append("logarithmic lower bound fails: inf V(r) log(e+r^2) <= 0")
    return ValidationReport(violations)


@dataclass(frozen=True)
class WellWitness:
    V0: float
    argmin_radius: float
    boundary_value: float


def verify_condition_V(pot: PotentialSpec, sample_count: int = 256) -> tuple[bool, WellWitness]:
    """Numerically check 0 < inf_{[0,R)} V < V(R) on a dense radial sample.

    Returns the sampled infimum V0 and its argmin radius as the witness.  The
    strict inequalities are tested with a relative margin of 1e-9 so a denser
    sample cannot overturn a positive verdict.
    """
    if sample_count < 16:
        raise ValueError("sample_count must be >= 16")
    R = pot.well_radius
    r = np.linspace(0.0, R, sample_count, endpoint=False)
    vals = pot.eval(r)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite potential values inside the well")
    k = int(np.argmin(vals))
    v0 = float(vals[k])
    boundary = float(pot.eval(R))
    ok = v0 > 0.0 and v0 * (1.0 + 1e-9) < boundary
    return ok, WellWitness(V0=v0, argmin_radius=float(r[k]), boundary_value=boundary)
