"""Fault-tolerant memory bounds and a repetition-code simulator.

One logical bit lives in n noisy physical bits; every interval each bit
flips independently with probability xi and an error-correction step
rewrites the array.  The relaxation time is the number of intervals over
which the bit stays delta-reliably decodable.  The contraction bound
yields a scheme-independent overhead lower bound / relaxation upper
bound; majority-vote repetition coding gives the matching achievable
side up to a factor of 2 in the exponent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import InfeasibleError, ValidationError
from .network import delta_capacity


@dataclass(frozen=True)
class MemorySpec:
    """Physical bits n, per-interval flip probability xi, failure budget
    delta, and the number of refresh intervals."""

    n: int
    xi: float
    delta: float
    intervals: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"bit count must be a positive integer, got {self.n}")
        if not 0.0 < self.xi < 0.5:
            raise ValidationError(f"flip probability must be in (0, 0.5), got {self.xi:.9g}")
        if not 0.0 < self.delta < 0.5:
            raise ValidationError(f"failure budget must be in (0, 0.5), got {self.delta:.9g}")
        if int(self.intervals) != self.intervals or self.intervals < 1:
            raise ValidationError(f"interval count must be a positive integer, got {self.intervals}")

    def to_dict(self) -> dict:
        return {"n": self.n, "xi": self.xi, "delta": self.delta, "intervals": self.intervals}


def _check_params(xi: float, delta: float) -> None:
    if not 0.0 < xi < 0.5:
        raise ValidationError(f"flip probability must be in (0, 0.5), got {xi:.9g}")
    if not 0.0 < delta < 0.5:
        raise ValidationError(f"failure budget must be in (0, 0.5), got {delta:.9g}")


def overhead_lower_bound(delta: float, intervals: int, xi: float) -> float:
    """Minimum physical bits log(1 - D^(1/T)) / log(4 xi - 4 xi^2) to hold one
    bit delta-reliably for T intervals, for any correction rule."""
    _check_params(xi, delta)
    if int(intervals) != intervals or intervals < 1:
        raise ValidationError(f"interval count must be a positive integer, got {intervals}")
    cap = delta_capacity(delta)
    a = 4.0 * xi - 4.0 * xi**2
    # 1 - cap^(1/T) via expm1 keeps precision for large T.
    return math.log(-math.expm1(math.log(cap) / intervals)) / math.log(a)


@dataclass(frozen=True)
class RelaxationBound:
    """Relaxation-time upper bound with its large-n exponential form."""

    time: float
    asymptotic: float


def relaxation_upper_bound(n: int, xi: float, delta: float) -> RelaxationBound:
    """No correction rule retains the bit past log(D) / log(1 - (4xi-4xi^2)^n)
    intervals; grows exponentially in n with rate log(1/(4xi-4xi^2))."""
    _check_params(xi, delta)
    if int(n) != n or n < 1:
        raise ValidationError(f"bit count must be a positive integer, got {n}")
    cap = delta_capacity(delta)
    a = 4.0 * xi - 4.0 * xi**2
    a_n = a**n
    asymptotic = math.inf if a_n == 0.0 else -math.log(cap) / a_n
    time = math.inf if a_n == 0.0 else math.log(cap) / math.log1p(-a_n)
    return RelaxationBound(time=time, asymptotic=asymptotic)


def _majority_fail_threshold(n: int) -> int:
    # Smallest flip count that defeats (or ties, for even n) the majority.
    return (n + 1) // 2


def catastrophic_prob_exact(n: int, xi: float) -> float:
    """Probability that one interval flips at least half the bits.

    Binomial tail P[Bin(n, xi) >= ceil((n+1)/2)] for odd n; even-n ties
    count as failure.  Summed in log space so tails below 1e-12 stay
    accurate.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"bit count must be a positive integer, got {n}")
    if not 0.0 <= xi <= 1.0:
        raise ValidationError(f"flip probability must be in [0, 1], got {xi:.9g}")
    if xi == 0.0:
        return 0.0
    if xi == 1.0:
        return 1.0
    k = np.arange(_majority_fail_threshold(n), n + 1)
    log_terms = (
        gammaln(n + 1)
        - gammaln(k + 1)
        - gammaln(n - k + 1)
        + k * math.log(xi)
        + (n - k) * math.log1p(-xi)
    )
    return float(np.clip(np.exp(logsumexp(log_terms)), 0.0, 1.0))


def catastrophic_prob_chernoff(n: int, xi: float) -> float:
    """Chernoff-Hoeffding upper bound (4 xi (1 - xi))^(n/2) on the tail."""
    if int(n) != n or n < 1:
        raise ValidationError(f"bit count must be a positive integer, got {n}")
    if not 0.0 <= xi <= 1.0:
        raise ValidationError(f"flip probability must be in [0, 1], got {xi:.9g}")
    return (4.0 * xi * (1.0 - xi)) ** (n / 2.0)


@dataclass(frozen=True)
class RepetitionRelaxation:
    """Relaxation time of majority-vote repetition coding.

    ``time`` uses the exact per-interval failure probability;
    ``chernoff_lower`` substitutes the Chernoff bound for it (a lower
    bound on the time, None when that bound is vacuous at 1/2 or more).
    """

    time: float
    chernoff_lower: float | None


def repetition_relaxation_time(n: int, xi: float, delta: float) -> RepetitionRelaxation:
    """log(1 - 2 delta) / log(1 - 2 p_e) intervals for repetition coding.

    The decoded bit is wrong after T intervals iff an odd number of
    catastrophic events occurred, so correct decoding has probability
    (1 + (1 - 2 p_e)^T)/2; solving for the delta level gives the formula.
    """
    _check_params(xi, delta)
    p_e = catastrophic_prob_exact(n, xi)
    if p_e >= 0.5:
        raise InfeasibleError(
            f"catastrophic probability {p_e:.9g} >= 1/2: majority vote retains nothing"
        )
    numer = math.log1p(-2.0 * delta)
    time = numer / math.log1p(-2.0 * p_e)
    p_c = catastrophic_prob_chernoff(n, xi)
    chernoff_lower = None if p_c >= 0.5 else numer / math.log1p(-2.0 * p_c)
    return RepetitionRelaxation(time=time, chernoff_lower=chernoff_lower)


@dataclass(frozen=True, eq=False)
class SimulationReport:
    """Per-interval empirical correct-decoding probabilities."""

    success_prob: np.ndarray
    estimated_relaxation: int | None
    trials: int
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.success_prob, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "success_prob", arr)

    def stderr(self) -> np.ndarray:
        p = self.success_prob
        return np.sqrt(p * (1.0 - p) / self.trials)


def simulate_memory(spec: MemorySpec, trials: int, seed: int, chunk: int = 4096) -> SimulationReport:
    """Monte Carlo repetition-code memory: flip bits, refresh to majority.

    All bits carry the logical value after each refresh, so an interval
    reduces to whether its flip count defeats the majority (even-n ties
    count as flipping to the wrong codeword).  Trial i consumes an
    (intervals x n) uniform block from its own RNG stream derived from
    (seed, i); aggregation uses integer counts, so the result is exactly
    reproducible and order-independent.  ``estimated_relaxation`` is the
    first interval at which the success probability drops below
    1 - delta, or None if it never does.
    """
    if trials < 1:
        raise ValidationError("trial count must be at least 1")
    steps, n = spec.intervals, spec.n
    threshold = _majority_fail_threshold(n)
    wrong_counts = np.zeros(steps, dtype=np.int64)
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        u = np.empty((size, steps, n))
        for i in range(size):
            u[i] = np.random.default_rng((seed, start + i)).random((steps, n))
        catastrophic = (u < spec.xi).sum(axis=2) >= threshold
        wrong = np.cumsum(catastrophic, axis=1) % 2
        wrong_counts += wrong.sum(axis=0)
    success = 1.0 - wrong_counts / trials
    below = np.nonzero(success < 1.0 - spec.delta)[0]
    estimated = int(below[0]) + 1 if below.size else None
    return SimulationReport(
        success_prob=success, estimated_relaxation=estimated, trials=trials, seed=seed
    )


def simulation_csv(report: SimulationReport, spec: MemorySpec) -> str:
    """CSV with columns t, success_prob, stderr and a JSON header line."""
    header = dict(spec.to_dict(), trials=report.trials, seed=report.seed)
    lines = ["# " + json.dumps(header, sort_keys=True), "t,success_prob,stderr"]
    errs = report.stderr()
    for t, (p, se) in enumerate(zip(report.success_prob, errs), start=1):
        lines.append(f"{t},{p:.9g},{se:.9g}")
    return "\n".join(lines) + "\n"
