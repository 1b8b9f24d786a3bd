"""Mutual-information contraction bounds for discrete channels.

The central quantity is the pairwise Bhattacharyya bound: for a channel
with row-stochastic matrix A,

    eta = 1 - min_{k != l} ( sum_j sqrt(a_kj * a_lj) )^2

upper-bounds I(X;Z)/I(X;Y) over every Markov chain X -> Y -> Z whose
second step is the channel.  The module also provides the noisy-layer
specializations (independent and weakly-correlated per-neuron noise),
a brute-force search oracle for the bound, and the Hessian /
quadratic-form machinery that verifies the bound's derivation
numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .info import Channel, Distribution, compose, joint, mutual_information

# Hessian-based operations require p bounded away from the simplex
# boundary; degenerate p corresponds to a smaller alphabet and callers
# should reduce it explicitly.
INTERIOR_MIN = 1e-9

# Ratios with I(X;Y) below this are undefined and skipped by the search
# oracle.
DEGENERATE_MI = 1e-10

# Default memory guard for materialized 2^n x 2^n layer channels.
MAX_LAYER_NEURONS = 12


@dataclass(frozen=True)
class ContractionBound:
    """Contraction coefficient bound with the row pair attaining it."""

    eta: float
    witness_pair: tuple[int, int]
    method: str = "pair-scan"

    def to_json(self) -> dict:
        return {"eta": self.eta, "witness": list(self.witness_pair), "method": self.method}


def contraction_bound(c: Channel) -> ContractionBound:
    """Bhattacharyya pair bound on the contraction of mutual information.

    Scans all unordered row pairs of the transition matrix, O(n^2 m);
    ties are broken by the lexicographically smallest (k, l).
    """
    if c.n_inputs < 2:
        raise ValidationError("contraction bound needs at least 2 channel inputs")
    s = np.sqrt(c.matrix)
    gram = s @ s.T
    n = c.n_inputs
    upper = np.where(np.triu(np.ones((n, n), dtype=bool), k=1), gram, np.inf)
    flat = int(np.argmin(upper))
    k, l = divmod(flat, n)
    eta = 1.0 - gram[k, l] ** 2
    return ContractionBound(eta=float(min(max(eta, 0.0), 1.0)), witness_pair=(k, l))


@dataclass(frozen=True)
class LayerNoiseSpec:
    """A layer of n components whose outputs flip independently with probability xi."""

    xi: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.xi < 0.5:
            raise ValidationError(f"flip probability must be in [0, 0.5), got {self.xi:.9g}")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"layer width must be a positive integer, got {self.n}")


@dataclass(frozen=True)
class CorrelatedNoiseSpec:
    """Layer noise with a shared all-flip probability xi1 on top of independent xi2.

    A biased coin first decides (probability xi1) whether every component
    in the layer flips together; each component then flips again
    independently with probability xi2.  Intended regime: xi1 << 1 and
    xi1 << xi2.
    """

    xi1: float
    xi2: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.xi1 <= 1.0:
            raise ValidationError(f"shared flip probability must be in [0, 1], got {self.xi1:.9g}")
        if not 0.0 <= self.xi2 < 0.5:
            raise ValidationError(
                f"independent flip probability must be in [0, 0.5), got {self.xi2:.9g}"
            )
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"layer width must be a positive integer, got {self.n}")


def independent_layer_bound(spec: LayerNoiseSpec) -> float:
    """Closed-form contraction bound 1 - (4 xi - 4 xi^2)^n for independent noise."""
    return 1.0 - (4.0 * spec.xi - 4.0 * spec.xi**2) ** spec.n


def _hamming_grid(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.uint64)
    return np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.int64)


def independent_layer_channel(spec: LayerNoiseSpec, max_neurons: int = MAX_LAYER_NEURONS) -> Channel:
    """The 2^n x 2^n channel of n independent bit flips.

    Entry (r, s) is xi^d (1-xi)^(n-d) where d is the Hamming distance
    between the states; equal to the n-fold tensor power of bsc(xi).
    """
    if spec.n > max_neurons:
        raise ValidationError(
            f"layer width {spec.n} exceeds the materialization cap {max_neurons} "
            f"(2^{spec.n} states); raise max_neurons explicitly if intended"
        )
    d = _hamming_grid(spec.n)
    return Channel(spec.xi**d * (1.0 - spec.xi) ** (spec.n - d))


def _correlated_weights(spec: CorrelatedNoiseSpec) -> np.ndarray:
    """Transition probability to a state at Hamming distance d, for d = 0..n."""
    d = np.arange(spec.n + 1, dtype=float)
    xi1, xi2, n = spec.xi1, spec.xi2, spec.n
    return (1.0 - xi1) * (1.0 - xi2) ** (n - d) * xi2**d + xi1 * xi2 ** (n - d) * (1.0 - xi2) ** d


def correlated_layer_channel(spec: CorrelatedNoiseSpec, max_neurons: int = MAX_LAYER_NEURONS) -> Channel:
    """The 2^n x 2^n channel of shared-plus-independent bit flips."""
    if spec.n > max_neurons:
        raise ValidationError(
            f"layer width {spec.n} exceeds the materialization cap {max_neurons} "
            f"(2^{spec.n} states); raise max_neurons explicitly if intended"
        )
    w = _correlated_weights(spec)
    return Channel(w[_hamming_grid(spec.n)])


def _distance_class_sums(weights: np.ndarray, n: int) -> np.ndarray:
    """Bhattacharyya sums between row pairs of a Hamming-structured channel.

    For a 2^n x 2^n matrix whose entry (r, s) depends only on the Hamming
    distance |r xor s| (value ``weights[d]``), the sum over outputs j of
    sqrt(a_kj * a_lj) depends only on e = |k xor l|.  Fixing e bits where
    the rows differ, an output at distance d1 from row k sits at distance
    d2 = e + d1 - 2i from row l, where i counts the flipped coordinates
    inside the differing set; there are C(e, i) * C(n-e, d1-i) such
    outputs.  Returns the sums indexed by e = 0..n; O(n^3) instead of
    O(4^n).
    """
    sums = np.zeros(n + 1)
    for e in range(n + 1):
        total = 0.0
        for d1 in range(n + 1):
            for i in range(max(0, d1 - (n - e)), min(e, d1) + 1):
                d2 = e + d1 - 2 * i
                if 0 <= d2 <= n:
                    total += comb(e, i) * comb(n - e, d1 - i) * sqrt(weights[d1] * weights[d2])
        sums[e] = total
    return sums


def correlated_layer_bound_exact(spec: CorrelatedNoiseSpec) -> ContractionBound:
    """Exact pair-scan bound for the correlated layer channel.

    Uses the distance-class reduction, so it never materializes the
    2^n x 2^n matrix and stays exact for widths beyond the cap.  The
    witness is the lexicographically smallest pair in the best class.
    """
    sums = _distance_class_sums(_correlated_weights(spec), spec.n)
    e_star = int(np.argmin(sums[1:])) + 1
    eta = 1.0 - float(sums[e_star]) ** 2
    return ContractionBound(
        eta=float(min(max(eta, 0.0), 1.0)),
        witness_pair=(0, (1 << e_star) - 1),
        method="distance-classes",
    )


def shared_noise_ordering_holds(spec: CorrelatedNoiseSpec) -> bool:
    """Whether the transition weights are still strictly decreasing in distance.

    The leading-order approximation rests on the weights keeping the
    ordering they have without shared noise; this checks the condition
    directly for the given parameters instead of guessing a general
    threshold in xi1.  ``correlated_layer_bound_exact`` does not depend
    on it (it scans every distance class).
    """
    w = _correlated_weights(spec)
    return bool(np.all(np.diff(w) < 0.0))


def shared_noise_slope(xi2: float, n: int) -> float:
    """First-order drop of the correlated-layer bound per unit of shared noise.

    Equals 2[(4 xi2^2 - 4 xi2 + 2)^n - (4 xi2 - 4 xi2^2)^n].
    """
    if not 0.0 <= xi2 <= 0.5:
        raise ValidationError(f"independent flip probability must be in [0, 0.5], got {xi2:.9g}")
    if n < 1:
        raise ValidationError("layer width must be at least 1")
    return 2.0 * ((4.0 * xi2**2 - 4.0 * xi2 + 2.0) ** n - (4.0 * xi2 - 4.0 * xi2**2) ** n)


def shared_noise_slope_factored(xi2: float, n: int) -> float:
    """Cross-check form 4(4 xi2^2 - 4 xi2 + 1) sum_i u^(n-i) v^(i-1) of the slope."""
    if not 0.0 <= xi2 <= 0.5:
        raise ValidationError(f"independent flip probability must be in [0, 0.5], got {xi2:.9g}")
    if n < 1:
        raise ValidationError("layer width must be at least 1")
    u = 4.0 * xi2**2 - 4.0 * xi2 + 2.0
    v = 4.0 * xi2 - 4.0 * xi2**2
    series = sum(u ** (n - i) * v ** (i - 1) for i in range(1, n + 1))
    return 4.0 * (4.0 * xi2**2 - 4.0 * xi2 + 1.0) * series


def matched_noise_slope(xi2: float, n: int) -> float:
    """Slope 4n(2 xi2 - 1)^2 (4 xi2 - 4 xi2^2)^(n-1) of the independent bound
    at the matched per-component noise level; never exceeds
    ``shared_noise_slope``."""
    if not 0.0 <= xi2 <= 0.5:
        raise ValidationError(f"independent flip probability must be in [0, 0.5], got {xi2:.9g}")
    if n < 1:
        raise ValidationError("layer width must be at least 1")
    return 4.0 * n * (2.0 * xi2 - 1.0) ** 2 * (4.0 * xi2 - 4.0 * xi2**2) ** (n - 1)


def correlated_layer_bound_leading(spec: CorrelatedNoiseSpec) -> float:
    """Leading-order (in xi1) contraction bound for weakly-correlated noise.

    1 - [(4 xi2 - 4 xi2^2)^n + slope * xi1]; the remainder is O(xi1^2),
    so this is an approximation of ``correlated_layer_bound_exact`` valid
    for small shared-noise probability.
    """
    base = (4.0 * spec.xi2 - 4.0 * spec.xi2**2) ** spec.n
    return 1.0 - (base + shared_noise_slope(spec.xi2, spec.n) * spec.xi1)


def evans_schulman_raw(eta_single: float, n: int) -> float:
    """Per-component accounting bound n * eta, unclamped (can exceed 1)."""
    if not 0.0 <= eta_single <= 1.0:
        raise ValidationError(f"single-component eta must be in [0, 1], got {eta_single:.9g}")
    if n < 1:
        raise ValidationError("component count must be at least 1")
    return n * eta_single

def evans_schulman_bound(eta_single: float, n: int) -> float:
    """Evans-Schulman style bound min(n * eta, 1); an MI ratio cannot exceed 1."""
    return min(evans_schulman_raw(eta_single, n), 1.0)


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of the random contraction search."""

    alphabet_x: int = 2
    samples: int = 1000
    seed: int = 0
    refine_steps: int = 200

    def __post_init__(self):
        if not 2 <= self.alphabet_x <= 4:
            raise ValidationError(f"search alphabet size must be in [2, 4], got {self.alphabet_x}")
        if self.samples < 1:
            raise ValidationError("sample count must be at least 1")
        if self.refine_steps < 0:
            raise ValidationError("refine step count must be non-negative")


@dataclass(frozen=True)
class EmpiricalContraction:
    """Best observed I(X;Z)/I(X;Y) ratio from the random search."""

    achieved_ratio: float
    best_px: Distribution | None
    best_channel_xy: Channel | None
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {
            "achieved_ratio": self.achieved_ratio,
            "samples": self.samples,
            "seed": self.seed,
            "best_px": None if self.best_px is None else self.best_px.probs.tolist(),
            "best_channel_xy": (
                None if self.best_channel_xy is None else self.best_channel_xy.matrix.tolist()
            ),
        }


def _simplex_point(rng: np.random.Generator, size: int) -> np.ndarray:
    # Independent exponentials normalized to sum 1 (flat Dirichlet):
    # full-support coverage without boundary degeneracy.
    v = rng.standard_exponential(size)
    return v / v.sum()


def _chain_ratio(px: Distribution, cxy: Channel, cyz: Channel) -> float | None:
    i_xy = mutual_information(joint(px, cxy))
    if i_xy < DEGENERATE_MI:
        return None
    i_xz = mutual_information(joint(px, compose(cxy, cyz)))
    return i_xz / i_xy


def empirical_contraction(c_yz: Channel, config: SearchConfig = SearchConfig()) -> EmpiricalContraction:
    """Random search maximizing I(X;Z)/I(X;Y) over (p_X, X -> Y channel).

    Samples each candidate from its own RNG stream derived from
    (seed, sample index), so the reported maximum is order-independent
    and re-running with the same seed reproduces the identical result.
    Samples with I(X;Y) below ``DEGENERATE_MI`` have an undefined ratio
    and are skipped.  The best candidate is optionally refined by seeded
    coordinate perturbation.
    """
    nx, ny = config.alphabet_x, c_yz.n_inputs
    best_ratio = -1.0
    best_px = best_cxy = None
    used = 0
    for i in range(config.samples):
        rng = np.random.default_rng((config.seed, i))
        px = Distribution(_simplex_point(rng, nx))
        cxy = Channel(np.vstack([_simplex_point(rng, ny) for _ in range(nx)]))
        ratio = _chain_ratio(px, cxy, c_yz)
        if ratio is None:
            continue
        used += 1
        if ratio > best_ratio:
            best_ratio, best_px, best_cxy = ratio, px, cxy

    if best_px is None:
        return EmpiricalContraction(0.0, None, None, 0, config.seed)

    rng = np.random.default_rng((config.seed, config.samples))
    scale = 0.5
    p, m = best_px.probs, best_cxy.matrix
    for _ in range(config.refine_steps):
        p2 = np.abs(p + scale * rng.normal(size=nx) * p.mean())
        m2 = np.abs(m + scale * rng.normal(size=m.shape) * m.mean(axis=1, keepdims=True))
        cand_px = Distribution(p2 / p2.sum())
        cand_cxy = Channel(m2 / m2.sum(axis=1, keepdims=True))
        ratio = _chain_ratio(cand_px, cand_cxy, c_yz)
        if ratio is not None and ratio > best_ratio:
            best_ratio, best_px, best_cxy = ratio, cand_px, cand_cxy
            p, m = best_px.probs, best_cxy.matrix
        scale *= 0.99

    return EmpiricalContraction(
        achieved_ratio=float(min(max(best_ratio, 0.0), 1.0)),
        best_px=best_px,
        best_channel_xy=best_cxy,
        samples=used,
        seed=config.seed,
    )


def _interior_probs(p: Distribution) -> np.ndarray:
    if p.alphabet_size < 2:
        raise ValidationError("Hessian operations need an alphabet of at least 2")
    if p.probs.min() < INTERIOR_MIN:
        raise ValidationError(
            f"distribution must be interior (min entry >= {INTERIOR_MIN:g}); "
            "degenerate entries correspond to a smaller alphabet"
        )
    return p.probs


def entropy_hessian(p: Distribution) -> np.ndarray:
    """Hessian of the entropy map in simplex coordinates (p_1 .. p_{n-1}).

    With p_n the dependent coordinate, the entries are -1/p_n off the
    diagonal and -(p_i + p_n)/(p_i p_n) on it; negative definite.
    """
    probs = _interior_probs(p)
    head, pn = probs[:-1], probs[-1]
    h = np.full((head.size, head.size), -1.0 / pn)
    np.fill_diagonal(h, -(head + pn) / (head * pn))
    return h


def pushforward_entropy_hessian(c: Channel, p: Distribution) -> np.ndarray:
    """Hessian of p -> entropy(p @ A) in the same simplex coordinates.

    Entry (k, l) is -sum_j (a_kj - a_nj)(a_lj - a_nj) / (p @ A)_j; all-zero
    output columns contribute nothing and are dropped.  Negative
    semidefinite.
    """
    probs = _interior_probs(p)
    if p.alphabet_size != c.n_inputs:
        raise ValidationError(
            f"distribution size {p.alphabet_size} does not match channel inputs {c.n_inputs}"
        )
    a = c.matrix
    q = probs @ a
    diff = a[:-1] - a[-1]
    dead = q <= 0.0
    if np.any(dead):
        if np.any(np.abs(diff[:, dead]) > 0.0):
            raise ValidationError("zero-probability output column with a nonzero row difference")
        diff, q = diff[:, ~dead], q[~dead]
    return -(diff / q) @ diff.T


def rayleigh_supremum(c: Channel, p: Distribution) -> float:
    """Largest generalized Rayleigh quotient of the two entropy Hessians.

    sup over nonzero coefficient vectors of (c' H_f c)/(c' H_g c), computed
    as the top eigenvalue of the symmetric-definite pencil (-H_f, -H_g)
    via Cholesky whitening; always within [0, 1] and at most the pair
    bound ``contraction_bound(c).eta``.
    """
    h_f = pushforward_entropy_hessian(c, p)
    h_g = entropy_hessian(p)
    try:
        top = scipy.linalg.eigh(-h_f, -h_g, eigvals_only=True)[-1]
    except np.linalg.LinAlgError as exc:
        raise ValidationError(f"ill-conditioned Hessian pencil: {exc}") from None
    return float(min(max(top, 0.0), 1.0))


@dataclass(frozen=True)
class DecompositionReport:
    """Residuals of the quadratic-form split of the entropy Hessian forms.

    ``identity_residual``: |Q_g - Q_f - sum Q_st * w_st| for the given
    channel, where w_st is the Bhattacharyya-type column sum.
    ``min_square_term``: smallest Q_st (each is a literal square).
    ``sum_residual``: |Q_g - sum Q_st|; this split is channel-independent
    and is the identity the all-rows-equal case reduces to.
    """

    identity_residual: float
    min_square_term: float
    sum_residual: float


def _square_terms(probs: np.ndarray, coeffs: np.ndarray) -> dict[tuple[int, int], float]:
    n = probs.size
    c_total = float(coeffs.sum())
    out: dict[tuple[int, int], float] = {}
    for s in range(1, n):
        ps, cs = probs[s - 1], coeffs[s - 1]
        for t in range(s + 1, n):
            pt, ct = probs[t - 1], coeffs[t - 1]
            out[(s, t)] = (sqrt(pt / ps) * cs - sqrt(ps / pt) * ct) ** 2
        pn = probs[-1]
        out[(s, n)] = (cs * (sqrt(ps / pn) + sqrt(pn / ps)) + sqrt(ps / pn) * (c_total - cs)) ** 2
    return out


def quadratic_decomposition_check(c: Channel, p: Distribution, coeffs) -> DecompositionReport:
    """Verify the square-term decomposition behind the pair bound.

    For an interior p and coefficient vector c of length n-1, checks that
    Q_g(c) = Q_f(c) + sum_{s<t} Q_st(c) * sum_j a_sj a_tj / (p @ A)_j
    holds to float accuracy, where Q_g, Q_f are the negated Hessian
    quadratic forms and each Q_st is an explicit square.
    """
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    if coeffs.size != c.n_inputs - 1:
        raise ValidationError(
            f"coefficient vector must have length {c.n_inputs - 1}, got {coeffs.size}"
        )
    probs = _interior_probs(p)
    if p.alphabet_size != c.n_inputs:
        raise ValidationError(
            f"distribution size {p.alphabet_size} does not match channel inputs {c.n_inputs}"
        )
    q_g = -coeffs @ entropy_hessian(p) @ coeffs
    q_f = -coeffs @ pushforward_entropy_hessian(c, p) @ coeffs
    squares = _square_terms(probs, coeffs)

    a = c.matrix
    col = probs @ a
    live = col > 0.0
    weighted = 0.0
    for (s, t), sq in squares.items():
        w = float(np.sum(a[s - 1, live] * a[t - 1, live] / col[live]))
        weighted += sq * w

    return DecompositionReport(
        identity_residual=abs(q_g - q_f - weighted),
        min_square_term=min(squares.values()),
        sum_residual=abs(q_g - sum(squares.values())),
    )
