"""Exponent algebra: thresholds, Moser sequences, penalization parameters,
nonexistence certificates and decay predictions.

All comparisons run in exact rational arithmetic (floats are lifted to the
Fraction they represent bit-exactly), so strict threshold inequalities never
depend on rounding.  Results come back as Fractions when every input was
rational (int/Fraction) and as floats otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .errors import (AdmissibilityError, NonexistenceThresholdError,
                     OpenProblemBoundaryError)

Rational = int | Fraction
Number = float | Rational

_MAX_ITERATION_STEPS = 100_000


def _frac(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)  # exact for int and float alike


def _rational_inputs(*xs: Number) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def _emit(value: Fraction, rational: bool):
    return value if rational else float(value)


def _check_admissible(N: int, s: Fraction, p: Fraction | None = None) -> None:
    if not (isinstance(N, int) and N >= 1):
        raise AdmissibilityError(f"N must be an integer >= 1, got {N!r}")
    if not Fraction(0) < s < Fraction(1):
        raise AdmissibilityError(f"0 < s < 1 fails (s = {float(s)})")
    if N <= 2 * s:
        raise AdmissibilityError(f"N > 2s fails ({N} <= {float(2 * s)})")
    if p is not None:
        crit = Fraction(2 * N, 1) / (N - 2 * s)
        if not Fraction(2) < p < crit:
            raise AdmissibilityError(
                f"p in (2, 2_s^*) fails (p = {float(p)}, 2_s^* = {float(crit)})")


# ---------------------------------------------------------------------------
# decay classes and thresholds
# ---------------------------------------------------------------------------

class DecayTag(Enum):
    FAST = "fast"
    SLOW = "slow"
    UPPER_SLOW = "upper-slow"
    LOG = "log"


@dataclass(frozen=True)
class DecayClass:
    """Classification of the potential tail: fast / slow(omega) / upper-slow(omega) / log."""

    tag: DecayTag
    omega: Number | None = None

    def __post_init__(self):
        if self.tag in (DecayTag.FAST, DecayTag.LOG):
            if self.omega is not None:
                raise ValueError(f"{self.tag.value} class carries no omega")
        else:
            if self.omega is None or _frac(self.omega) < 0:
                raise ValueError(f"{self.tag.value} class needs omega >= 0")

    @staticmethod
    def fast() -> "DecayClass":
        return DecayClass(DecayTag.FAST)

    @staticmethod
    def slow(omega: Number) -> "DecayClass":
        return DecayClass(DecayTag.SLOW, omega)

    @staticmethod
    def upper_slow(omega: Number) -> "DecayClass":
        return DecayClass(DecayTag.UPPER_SLOW, omega)

    @staticmethod
    def log() -> "DecayClass":
        return DecayClass(DecayTag.LOG)


def critical_exponent(N: int, s: Number):
    """2_s^* = 2N/(N-2s); exact when s is rational."""
    sf = _frac(s)
    _check_admissible(N, sf)
    value = Fraction(2 * N, 1) / (N - 2 * sf)
    return _emit(value, _rational_inputs(s))


def threshold_p_star(N: int, s: Number, cls: DecayClass):
    """Existence threshold p_* for the given decay class.

    fast: 2 + 2s/(N-2s); slow(omega): 2 + omega/(N+2s-omega); log: 2.
    The slow formula only covers omega in [0, 2s]; larger omega belongs to the
    upper-slow classification, which has no existence threshold of its own.
    """
    sf = _frac(s)
    _check_admissible(N, sf)
    rational = _rational_inputs(s) and (cls.omega is None or _rational_inputs(cls.omega))
    if cls.tag is DecayTag.FAST:
        return _emit(2 + 2 * sf / (N - 2 * sf), rational)
    if cls.tag is DecayTag.LOG:
        return _emit(Fraction(2), rational)
    omega = _frac(cls.omega)
    if cls.tag is DecayTag.SLOW:
        if omega > 2 * sf:
            raise ValueError("use upper-slow classification; threshold formula "
                             "for existence only covers omega in [0, 2s]")
        return _emit(2 + omega / (N + 2 * sf - omega), rational)
    raise ValueError("upper-slow class has no existence threshold; "
                     "use nonexistence_certificate or the slow class")


def nonexistence_threshold(N: int, s: Number, cls: DecayClass):
    """Threshold below which the nonexistence machinery applies.

    fast: q_* = 2 + 2s/(N-2s); upper-slow(omega), omega in (0, 2s]:
    q_omega = 2 + omega/(N+2s-omega).
    """
    sf = _frac(s)
    _check_admissible(N, sf)
    rational = _rational_inputs(s) and (cls.omega is None or _rational_inputs(cls.omega))
    if cls.tag is DecayTag.FAST:
        return _emit(2 + 2 * sf / (N - 2 * sf), rational)
    if cls.tag is DecayTag.UPPER_SLOW:
        omega = _frac(cls.omega)
        if omega > 2 * sf:
            raise ValueError("upper-slow nonexistence covers omega in (0, 2s] only")
        return _emit(2 + omega / (N + 2 * sf - omega), rational)
    raise ValueError("nonexistence threshold applies to fast or upper-slow classes")


# ---------------------------------------------------------------------------
# Moser iteration bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MoserSequence:
    """Exponent sequence 2 beta_{i+1} + p - 2 = beta_i 2_s^*, beta_0 = 1."""

    d: Fraction
    ratio: Fraction           # 2_s^*/2
    betas: list[Fraction]

    def closed_form(self, i: int) -> Fraction:
        return self.ratio ** i * (1 + self.d) - self.d


def moser_sequence(N: int, s: Number, p: Number, i_max: int) -> MoserSequence:
    """Exact beta_i, cross-checked against the closed form at every step."""
    sf, pf = _frac(s), _frac(p)
    _check_admissible(N, sf, pf)
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    two_star = Fraction(2 * N, 1) / (N - 2 * sf)
    ratio = two_star / 2
    d = (pf - 2) / (2 - two_star)
    if d <= -1:
        raise AdmissibilityError("d = (p-2)/(2-2_s^*) <= -1: exponents not admissible")
    betas = [Fraction(1)]
    for i in range(i_max):
        nxt = (betas[-1] * two_star - pf + 2) / 2
        betas.append(nxt)
        closed = ratio ** (i + 1) * (1 + d) - d
        if nxt != closed:
            raise AssertionError(
                f"Moser recurrence and closed form disagree at i={i + 1}: "
                f"{nxt} != {closed}")
        if nxt <= betas[-2]:
            raise AssertionError("Moser sequence failed to increase strictly")
    return MoserSequence(d=d, ratio=ratio, betas=betas)


# ---------------------------------------------------------------------------
# penalization parameter selection
# ---------------------------------------------------------------------------

class PenalizationCase(Enum):
    Q1_FAST = "Q1_fast"
    Q2_SLOW_OMEGA_EQ_2S = "Q2_slow_omega_eq_2s"
    Q2_SLOW_OMEGA_LT_2S = "Q2_slow_omega_lt_2s"
    Q3_LOG = "Q3_log"


@dataclass(frozen=True)
class PenalizationPlan:
    """Penalization triple (theta, tau, mu) with its case tag.

    Valid plans come out of select_penalization, which enforces the case's
    inequality chain; the record itself does not re-validate (forced plans for
    nonexistence sweeps deliberately break the chain).
    """

    theta: float
    tau: float
    mu: float
    case_tag: PenalizationCase

    def chain_ok(self, N: int, s: float, p: float, omega: float | None = None,
                 margin: float = 0.0) -> bool:
        th, ta, mu = self.theta, self.tau, self.mu
        g = margin
        if self.case_tag is PenalizationCase.Q1_FAST:
            return (2 * s + g < ta and ta + g < th and th + g < mu * (p - 2)
                    and mu * (p - 2) + g < (N - 2 * s) * (p - 2)
                    and 0 < mu < N - 2 * s)
        if self.case_tag is PenalizationCase.Q2_SLOW_OMEGA_EQ_2S:
            return (2 * s + g < ta and ta + g < th and th + g < mu * (p - 2)
                    and mu * (p - 2) + g < N * (p - 2) and N - 2 * s < mu < N)
        if self.case_tag is PenalizationCase.Q2_SLOW_OMEGA_LT_2S:
            w = float(omega) if omega is not None else 0.0
            return (w + g < ta and ta + g < th and th + g < mu * (p - 2)
                    and mu * (p - 2) + g < (N + 2 * s - w) * (p - 2)
                    and N < mu < N + 2 * s - w)
        w_hi = N + 2 * s
        return (g < ta and ta + g < th and th + g < mu * (p - 2)
                and mu * (p - 2) + g < w_hi * (p - 2) and N < mu < w_hi)


@dataclass(frozen=True)
class Infeasible:
    """Negative result of select_penalization, carrying the violated comparison."""

    message: str
    p: float
    threshold: float

    def __bool__(self) -> bool:  # allows `if plan:` dispatch
        return False


def select_penalization(N: int, s: Number, p: Number,
                        cls: DecayClass) -> PenalizationPlan | Infeasible:
    """Pick (theta, tau, mu) strictly inside the proof's inequality chain.

    mu sits at the midpoint of the last admissible subinterval of its window;
    tau and theta split the remaining gap (low, mu(p-2)) in thirds.  Feasible
    exactly when p exceeds the class threshold.
    """
    sf, pf = _frac(s), _frac(p)
    _check_admissible(N, sf, pf)

    if cls.tag is DecayTag.FAST:
        case = PenalizationCase.Q1_FAST
        low, mu_lo, mu_hi = 2 * sf, Fraction(0), N - 2 * sf
        threshold = 2 + 2 * sf / (N - 2 * sf)
    elif cls.tag is DecayTag.SLOW:
        omega = _frac(cls.omega)
        if omega > 2 * sf:
            raise ValueError("slow class needs omega in [0, 2s]; "
                             "use upper-slow for larger omega")
        if omega == 2 * sf:
            case = PenalizationCase.Q2_SLOW_OMEGA_EQ_2S
            low, mu_lo, mu_hi = 2 * sf, N - 2 * sf, Fraction(N)
            threshold = 2 + 2 * sf / N
        else:
            case = PenalizationCase.Q2_SLOW_OMEGA_LT_2S
            low, mu_lo, mu_hi = omega, Fraction(N), N + 2 * sf - omega
            threshold = 2 + omega / (N + 2 * sf - omega)
    elif cls.tag is DecayTag.LOG:
        case = PenalizationCase.Q3_LOG
        low, mu_lo, mu_hi = Fraction(0), Fraction(N), N + 2 * sf
        threshold = Fraction(2)
    else:
        raise ValueError("penalization selection needs a fast, slow or log class")

    if pf <= threshold:
        rel = "=" if pf == threshold else "<"
        return Infeasible(
            message=f"p {rel} threshold: p = {float(pf):.6g} while the "
                    f"{case.value} chain needs p > {float(threshold):.6g}",
            p=float(pf), threshold=float(threshold))

    # last admissible subinterval: mu must also satisfy mu (p-2) > low
    mu_lo = max(mu_lo, low / (pf - 2))
    assert mu_lo < mu_hi, "feasible case must leave a nonempty mu window"
    mu = (mu_lo + mu_hi) / 2
    gap = mu * (pf - 2) - low
    tau = low + gap / 3
    theta = low + 2 * gap / 3
    plan = PenalizationPlan(theta=float(theta), tau=float(tau), mu=float(mu),
                            case_tag=case)
    omega_f = float(_frac(cls.omega)) if cls.omega is not None else None
    assert plan.chain_ok(N, float(sf), float(pf), omega_f, margin=1e-9), \
        "selected plan must satisfy its chain with margin"
    return plan


# ---------------------------------------------------------------------------
# nonexistence certificates
# ---------------------------------------------------------------------------

class CertificateRegime(Enum):
    FAST_Q1PRIME = "fast_Q1prime"
    SLOW_EQ_2S = "slow_eq_2s"
    SLOW_LT_2S = "slow_lt_2s"


@dataclass(frozen=True)
class NotApplicable:
    """p is not below the nonexistence threshold; carries the comparison."""

    message: str
    p: float
    threshold: float

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Certificate:
    """Iteration trace certifying nonexistence via the divergence witness.

    mu_trace descends by mu_{i+1} = mu_i (p-1) - step from recurrence_start on
    (the first step of the fast and omega<2s regimes is the constrained choice
    of the comparison argument, not the recurrence).  terminal_mu_star lies in
    (max((N-2s)/2, last mu), N/p), so the witness integral of w_{mu*}^p
    diverges while mu* p < N.
    """

    mu_trace: list[float]
    terminal_mu_star: float
    steps: int
    regime: CertificateRegime
    recurrence_start: int
    step_size: float

    def __bool__(self) -> bool:
        return True


def _seed_with_constraints(endpoint: Fraction, width: Fraction, p: Fraction,
                           cap: Fraction, step: Fraction) -> tuple[Fraction, Fraction]:
    """Seed mu_1 just inside (endpoint, endpoint+width) with mu_1 (p-1) < cap.

    Returns (mu_1, mu_2_low) where mu_2 must exceed mu_1(p-1) - step.  The
    offset starts at 1e-3 of the window and bisects toward the endpoint until
    the constraint holds (it always does in the limit, since p is below the
    relevant threshold).
    """
    offset = width / 1000
    for _ in range(200):
        mu1 = endpoint + offset
        if mu1 * (p - 1) < cap:
            return mu1, mu1 * (p - 1) - step
        offset /= 2
    raise AssertionError("seed bisection failed; p is not below the threshold")


def nonexistence_certificate(N: int, s: Number, p: Number,
                             cls: DecayClass) -> Certificate | NotApplicable:
    """Run the nonexistence iteration when p is strictly below its threshold.

    fast class: seed just above N-2s, one constrained step into
    ((N-2s)/2, N-2s), then mu_{i+1} = mu_i (p-1) - 2s.
    upper-slow omega = 2s: seed N, recurrence step 2s from the start.
    upper-slow omega in (0, 2s): seed just above N+2s-omega, constrained step
    into (N, N+2s-omega), then step omega.
    Stops at the first mu_i with mu_i p < N and reports mu* as the midpoint of
    (max((N-2s)/2, mu_i), N/p).
    """
    sf, pf = _frac(s), _frac(p)
    _check_admissible(N, sf, pf)
    if cls.tag not in (DecayTag.FAST, DecayTag.UPPER_SLOW):
        raise ValueError("nonexistence hypotheses cover fast or upper-slow classes")

    # exact-threshold comparison, matching select_penalization bit for bit
    if cls.tag is DecayTag.FAST:
        threshold = 2 + 2 * sf / (N - 2 * sf)
    else:
        omega = _frac(cls.omega)
        if omega > 2 * sf:
            raise ValueError("upper-slow nonexistence covers omega in (0, 2s] only")
        threshold = 2 + omega / (N + 2 * sf - omega)
    if pf >= threshold:
        rel = "=" if pf == threshold else ">"
        return NotApplicable(
            message=f"p {rel} threshold: p = {float(pf):.6g} vs "
                    f"q = {float(threshold):.6g}; nonexistence iteration needs p < q",
            p=float(pf), threshold=float(threshold))

    half = (N - 2 * sf) / 2
    stop = Fraction(N) / pf  # mu < N/p terminates

    if cls.tag is DecayTag.FAST:
        regime, step = CertificateRegime.FAST_Q1PRIME, 2 * sf
        mu1, mu2_low = _seed_with_constraints(N - 2 * sf, 2 * sf, pf, Fraction(N), step)
        trace = [mu1]
        if mu1 < stop:
            mu_window = (max(half, mu1), stop)
            rec_start = 1
        else:
            mu2 = (max(half, mu2_low) + (N - 2 * sf)) / 2
            trace.append(mu2)
            rec_start = 1
            mu_window = None
    elif _frac(cls.omega) == 2 * sf:
        regime, step = CertificateRegime.SLOW_EQ_2S, 2 * sf
        trace = [Fraction(N)]
        rec_start = 0
        mu_window = None
    else:
        omega = _frac(cls.omega)
        if omega == 0:
            return NotApplicable(   # q_0 = 2 and p > 2 always; unreachable via threshold
                message="omega = 0 gives threshold 2; no admissible p lies below it",
                p=float(pf), threshold=2.0)
        regime, step = CertificateRegime.SLOW_LT_2S, omega
        mu1, mu2_low = _seed_with_constraints(N + 2 * sf - omega, omega, pf,
                                              N + 2 * sf, step)
        trace = [mu1]
        mu2 = (max(Fraction(N), mu2_low) + (N + 2 * sf - omega)) / 2
        trace.append(mu2)
        rec_start = 1
        mu_window = None

    if mu_window is None:
        guard = 0
        while trace[-1] * pf >= N:
            trace.append(trace[-1] * (pf - 1) - step)
            guard += 1
            assert guard < _MAX_ITERATION_STEPS, \
                "nonexistence iteration failed to terminate"
        mu_window = (max(half, trace[-1]), stop)

    mu_star = (mu_window[0] + mu_window[1]) / 2
    assert mu_star * pf < N
    return Certificate(mu_trace=[float(m) for m in trace],
                       terminal_mu_star=float(mu_star),
                       steps=len(trace), regime=regime,
                       recurrence_start=rec_start, step_size=float(step))


# ---------------------------------------------------------------------------
# decay predictions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayPrediction:
    """Predicted tail exponents for a positive solution.

    lower_attained False means "any mu > lower_exponent" (infimum not
    attained); upper_strict True means "any gamma < upper_exponent".
    """

    lower_exponent: float
    upper_exponent: float
    lower_attained: bool
    upper_strict: bool
    case_label: str

    def describe(self) -> str:
        lo = (f"{self.lower_exponent:g}" if self.lower_attained
              else f"infimum-not-attained({self.lower_exponent:g})")
        hi = (f"any gamma below {self.upper_exponent:g}" if self.upper_strict
              else f"{self.upper_exponent:g}")
        return f"case ({self.case_label}): lower {lo}, upper {hi}"


def predict_decay(N: int, s: Number, p: Number, omega: Number) -> DecayPrediction:
    """Decay regime (cases i-iv) for potentials with tail rate omega.

    omega may be math.inf (compact support).  Requires p strictly above the
    applicable threshold; the boundary p = p_* is an open problem and refused.
    """
    sf, pf = _frac(s), _frac(p)
    _check_admissible(N, sf, pf)
    omega_inf = isinstance(omega, float) and math.isinf(omega)
    wf = None if omega_inf else _frac(omega)
    if wf is not None and wf < 0:
        raise ValueError("omega must be >= 0")

    if omega_inf or wf > 2 * sf:
        threshold = 2 + 2 * sf / (N - 2 * sf)
    else:
        threshold = 2 + wf / (N + 2 * sf - wf)
    if pf == threshold:
        raise OpenProblemBoundaryError(
            f"p = p_* = {float(threshold):.6g} is the open-problem boundary; "
            "existence/nonexistence undecided there")
    if pf < threshold:
        raise NonexistenceThresholdError(
            f"p = {float(pf):.6g} < p_* = {float(threshold):.6g}: no positive "
            "solution exists in this regime (see nonexistence_certificate)")

    n2s = N - 2 * sf
    if omega_inf or wf > n2s * (pf - 2):
        return DecayPrediction(lower_exponent=float(n2s), upper_exponent=float(n2s),
                               lower_attained=True, upper_strict=True, case_label="i")
    if wf > 2 * sf:  # includes the boundary omega = (N-2s)(p-2)
        return DecayPrediction(lower_exponent=float(n2s), upper_exponent=float(n2s),
                               lower_attained=False, upper_strict=False,
                               case_label="ii")
    if wf == 2 * sf:
        return DecayPrediction(lower_exponent=float(N), upper_exponent=float(N),
                               lower_attained=True, upper_strict=True,
                               case_label="iii")
    gamma = float(N + 2 * sf - wf)
    return DecayPrediction(lower_exponent=gamma, upper_exponent=gamma,
                           lower_attained=True, upper_strict=False,
                           case_label="iv")
