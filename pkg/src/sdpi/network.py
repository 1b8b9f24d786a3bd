"""Noisy binary threshold networks and their size/information bounds.

A network is simply layered: every synaptic connection joins adjacent
layers and inputs enter only at layer 0.  Each neuron computes
sgn(w . x + bias) with sgn(0) = 1, and its output is then flipped
independently with probability xi, so a layer is a deterministic 0/1 map
followed by independent bit-flip noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import InfeasibleError, ValidationError
from .contraction import LayerNoiseSpec, independent_layer_channel
from .info import (
    Channel,
    Distribution,
    LogBase,
    _as_base,
    _entropy_nats,
    compose,
    joint,
    mutual_information,
)

# Exact propagation materializes 2^width states per layer; widths beyond
# this need the Monte Carlo estimator instead.
MAX_EXACT_WIDTH = 14


@dataclass(frozen=True, eq=False)
class ThresholdNeuron:
    """Binary threshold gate with real weights and bias."""

    weights: np.ndarray
    bias: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or not np.all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise ValidationError("neuron needs finite weights (at least one) and a finite bias")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def fan_in(self) -> int:
        return int(self.weights.size)


def neuron_fire(neuron: ThresholdNeuron, x) -> int:
    """Pre-noise output sgn(w . x + bias), with sgn(0) = 1."""
    bits = np.asarray(x, dtype=float).reshape(-1)
    if bits.size != neuron.fan_in:
        raise ValidationError(f"input has {bits.size} bits, neuron fan-in is {neuron.fan_in}")
    return 1 if float(neuron.weights @ bits) + neuron.bias >= 0.0 else 0


@dataclass(frozen=True, eq=False)
class NoisyNetwork:
    """Simply layered network of threshold neurons with flip probability xi."""

    layers: tuple[tuple[ThresholdNeuron, ...], ...]
    xi: float
    input_width: int

    def __post_init__(self):
        if not 0.0 <= self.xi < 0.5:
            raise ValidationError(f"flip probability must be in [0, 0.5), got {self.xi:.9g}")
        if self.input_width < 1:
            raise ValidationError("input width must be positive")
        layers = tuple(tuple(layer) for layer in self.layers)
        if not layers or any(not layer for layer in layers):
            raise ValidationError("network needs at least one non-empty layer")
        fan_in = self.input_width
        for idx, layer in enumerate(layers):
            for neuron in layer:
                if neuron.fan_in != fan_in:
                    raise ValidationError(
                        f"layer {idx} neuron fan-in {neuron.fan_in} != previous width {fan_in}; "
                        "the network must be simply layered"
                    )
            fan_in = len(layer)
        object.__setattr__(self, "layers", layers)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self.layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "input_width": self.input_width,
            "layers": [
                {"neurons": [{"weights": n.weights.tolist(), "bias": n.bias} for n in layer]}
                for layer in self.layers
            ],
        }

    @staticmethod
    def from_dict(data: dict) -> "NoisyNetwork":
        try:
            layers = tuple(
                tuple(ThresholdNeuron(n["weights"], n["bias"]) for n in layer["neurons"])
                for layer in data["layers"]
            )
            return NoisyNetwork(layers=layers, xi=data["xi"], input_width=data["input_width"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed network description: missing {exc}") from None


def save_network(net: NoisyNetwork, path) -> None:
    Path(path).write_text(json.dumps(net.to_dict(), indent=2) + "\n")


def load_network(path) -> NoisyNetwork:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return NoisyNetwork.from_dict(data)


def layer_channel(layer: Sequence[ThresholdNeuron], xi: float, max_width: int = MAX_EXACT_WIDTH) -> Channel:
    """Channel of one noisy layer: threshold map followed by bit-flip noise.

    Rows index the 2^fan_in input states, columns the 2^width output
    states, both little-endian (neuron i is bit i).
    """
    neurons = tuple(layer)
    if not neurons:
        raise ValidationError("layer must contain at least one neuron")
    fan_in = neurons[0].fan_in
    if any(n.fan_in != fan_in for n in neurons):
        raise ValidationError("all neurons in a layer must share the same fan-in")
    width = len(neurons)
    if fan_in > max_width or width > max_width:
        raise ValidationError(
            f"layer size {max(fan_in, width)} exceeds the exact-propagation cap {max_width}"
        )
    states = np.arange(1 << fan_in)
    bits = (states[:, None] >> np.arange(fan_in)) & 1
    w = np.vstack([n.weights for n in neurons])
    b = np.array([n.bias for n in neurons])
    fired = (bits @ w.T + b >= 0.0).astype(np.int64)
    out_states = fired @ (1 << np.arange(width))
    noise = independent_layer_channel(LayerNoiseSpec(xi=xi, n=width), max_neurons=max_width)
    return Channel(noise.matrix[out_states])


def network_channel(net: NoisyNetwork, max_width: int = MAX_EXACT_WIDTH) -> Channel:
    """End-to-end channel from input states to last-layer output states."""
    if net.input_width > max_width:
        raise ValidationError(
            f"input width {net.input_width} exceeds the exact-propagation cap {max_width}"
        )
    chan = layer_channel(net.layers[0], net.xi, max_width)
    for layer in net.layers[1:]:
        chan = compose(chan, layer_channel(layer, net.xi, max_width))
    return chan


def exact_io_mutual_information(
    net: NoisyNetwork,
    p_x: Distribution | None = None,
    base: LogBase = "nats",
    max_width: int = MAX_EXACT_WIDTH,
) -> float:
    """Exact I(input; output) of the network under input law p_x.

    Composes the per-layer channels into one transition matrix and
    evaluates the mutual information of the resulting joint; p_x defaults
    to uniform over the 2^input_width states.
    """
    if p_x is None:
        p_x = Distribution.uniform(1 << net.input_width)
    chan = network_channel(net, max_width)
    if p_x.alphabet_size != chan.n_inputs:
        raise ValidationError(
            f"input law has {p_x.alphabet_size} states, network expects {chan.n_inputs}"
        )
    return mutual_information(joint(p_x, chan), base)


def information_decay_bound(widths: Sequence[int], xi: float, h_x: float) -> float:
    """Upper bound h_x * prod_l (1 - (4 xi - 4 xi^2)^(n_l)) on end-to-end
    mutual information through layers of the given widths."""
    widths = tuple(int(w) for w in widths)
    if not widths or any(w < 1 for w in widths):
        raise ValidationError("layer widths must be a non-empty list of positive integers")
    if not 0.0 <= xi < 0.5:
        raise ValidationError(f"flip probability must be in [0, 0.5), got {xi:.9g}")
    if h_x < 0.0:
        raise ValidationError("input entropy must be non-negative")
    a = 4.0 * xi - 4.0 * xi**2
    factor = 1.0
    for w in widths:
        factor *= 1.0 - a**w
    return h_x * factor


def delta_capacity(delta: float) -> float:
    """Minimum mutual information (bits) to decode one bit delta-reliably.

    1 + delta log2 delta + (1 - delta) log2(1 - delta); equals 1 at
    delta = 0 and decreases to 0 as delta -> 1/2.
    """
    if not 0.0 <= delta < 0.5:
        raise ValidationError(f"reliability level must be in [0, 0.5), got {delta:.9g}")
    if delta == 0.0:
        return 1.0
    return 1.0 + delta * math.log2(delta) + (1.0 - delta) * math.log2(1.0 - delta)


@dataclass(frozen=True)
class ReliabilitySpec:
    """Reliability level delta with its decoding-information threshold."""

    delta: float
    capacity_delta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "capacity_delta", delta_capacity(self.delta))


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    margin: float
    lhs: float
    threshold: float


def feasibility_check(
    widths: Sequence[int], xi: float, delta: float, feature_extractor: bool = False
) -> FeasibilityResult:
    """Whether the decay bound leaves enough information for delta-reliable output.

    By default ``widths`` are the hidden-layer widths and the single
    output neuron contributes a final (1 - (4 xi - 4 xi^2)) factor; with
    ``feature_extractor`` the product runs over the given widths only
    (noiseless read-out of the whole last layer).
    """
    threshold = delta_capacity(delta)
    lhs = information_decay_bound(widths, xi, 1.0)
    if not feature_extractor:
        lhs *= 1.0 - (4.0 * xi - 4.0 * xi**2)
    return FeasibilityResult(
        feasible=lhs >= threshold, margin=lhs - threshold, lhs=lhs, threshold=threshold
    )


def min_neurons_lower_bound(xi: float, delta: float, layers: int) -> float:
    """Lower bound on total hidden neurons for delta-reliable computation.

    (L-1) log(1 - (D/(1-a))^(1/(L-1))) / log(a) with a = 4 xi - 4 xi^2 and
    D the delta threshold; diverges (returns inf) once D/(1-a) >= 1, where
    the last output neuron alone caps the information flow.  L = 1 has no
    hidden neurons: returns 0 when feasible (1 - a >= D), inf otherwise.
    """
    if int(layers) != layers or layers < 1:
        raise ValidationError(f"layer count must be a positive integer, got {layers}")
    if not 0.0 <= xi < 0.5:
        raise ValidationError(f"flip probability must be in [0, 0.5), got {xi:.9g}")
    if not 0.0 < delta < 0.5:
        raise ValidationError(f"reliability level must be in (0, 0.5), got {delta:.9g}")
    a = 4.0 * xi - 4.0 * xi**2
    if a == 0.0:
        return 0.0
    ratio = delta_capacity(delta) / (1.0 - a)
    if layers == 1:
        return 0.0 if ratio <= 1.0 else math.inf
    if ratio >= 1.0:
        return math.inf
    return (layers - 1) * math.log(1.0 - ratio ** (1.0 / (layers - 1))) / math.log(a)


@dataclass(frozen=True)
class AmGmBound:
    """Product of (1 - a^w) terms against its equal-split upper bound."""

    product: float
    bound: float
    tight: bool


def amgm_product_bound(a: float, widths: Sequence[int]) -> AmGmBound:
    """prod_l (1 - a^(n_l)) <= (1 - a^mean)^L, with equality for equal widths."""
    if not 0.0 <= a <= 1.0:
        raise ValidationError(f"base must be in [0, 1], got {a:.9g}")
    widths = tuple(int(w) for w in widths)
    if not widths or any(w < 1 for w in widths):
        raise ValidationError("widths must be a non-empty list of positive integers")
    product = 1.0
    for w in widths:
        product *= 1.0 - a**w
    mean = sum(widths) / len(widths)
    bound = (1.0 - a**mean) ** len(widths)
    assert product <= bound + 1e-12
    return AmGmBound(product=product, bound=bound, tight=len(set(widths)) == 1)


def parity_size_complexity(n: int, d: int) -> float:
    """Gate-count lower bound (n/2)^(1/(2(d-1))) for depth-d threshold
    circuits computing the n-bit parity (Impagliazzo-Paturi-Saks)."""
    if n < 2:
        raise ValidationError(f"input count must be at least 2, got {n}")
    if d < 2:
        raise ValidationError(f"depth must be at least 2, got {d}")
    return (n / 2.0) ** (1.0 / (2.0 * (d - 1)))


@dataclass(frozen=True)
class SizeBoundResult:
    """Both size requirements at one depth; the larger one binds."""

    depth: int
    expressibility_bound: float
    noise_bound: float
    binding: Literal["expressibility", "noise"]

    @property
    def minimum_neurons(self) -> float:
        return max(self.expressibility_bound, self.noise_bound)


@dataclass(frozen=True)
class DepthTradeoff:
    per_depth: tuple[SizeBoundResult, ...]
    best: SizeBoundResult


def optimal_depth_tradeoff(n: int, xi: float, delta: float, max_depth: int) -> DepthTradeoff:
    """Size requirement max(expressibility, noise robustness) per depth.

    The expressibility bound is the parity gate-count lower bound and
    decreases with depth; the noise bound is the hidden-neuron lower
    bound plus the output neuron and increases with depth.  Returns all
    depths 2..max_depth and the one minimizing the max (ties go to the
    smaller depth).
    """
    if max_depth < 2:
        raise ValidationError(f"max depth must be at least 2, got {max_depth}")
    results = []
    for d in range(2, max_depth + 1):
        omega = parity_size_complexity(n, d)
        noise = min_neurons_lower_bound(xi, delta, d) + 1.0
        binding = "expressibility" if omega >= noise else "noise"
        results.append(
            SizeBoundResult(
                depth=d, expressibility_bound=omega, noise_bound=noise, binding=binding
            )
        )
    best = None
    for r in results:
        if math.isinf(r.minimum_neurons):
            continue
        if best is None or r.minimum_neurons < best.minimum_neurons:
            best = r
    if best is None:
        raise InfeasibleError(
            "every depth up to the cap is infeasible at this noise level; "
            "the output neuron alone loses too much information"
        )
    return DepthTradeoff(per_depth=tuple(results), best=best)


@dataclass(frozen=True)
class MiEstimate:
    """Plug-in mutual-information estimate from sampled forward passes.

    The plug-in estimator is biased upward by roughly (cells - 1)/(2 trials);
    the bias is documented, not corrected.
    """

    estimate: float
    stderr: float
    trials: int
    seed: int


def monte_carlo_io_mi(
    net: NoisyNetwork,
    p_x: Distribution | None = None,
    trials: int = 10000,
    seed: int = 0,
    base: LogBase = "nats",
) -> MiEstimate:
    """Estimate I(input; output) by sampling noisy forward passes.

    Each trial draws from its own RNG stream derived from (seed, trial
    index): one uniform selects the input state from p_x, then one
    uniform per neuron (layer by layer, neuron order within a layer)
    decides its flip.  Counts accumulate into an empirical joint table,
    so the result is reproducible and order-independent.
    """
    if trials < 1:
        raise ValidationError("trial count must be at least 1")
    n_in = 1 << net.input_width
    if p_x is None:
        p_x = Distribution.uniform(n_in)
    if p_x.alphabet_size != n_in:
        raise ValidationError(f"input law has {p_x.alphabet_size} states, expected {n_in}")

    total_neurons = sum(net.widths)
    draws = np.empty((trials, 1 + total_neurons))
    for i in range(trials):
        draws[i] = np.random.default_rng((seed, i)).random(1 + total_neurons)

    cum = np.cumsum(p_x.probs)
    x_states = np.minimum(np.searchsorted(cum, draws[:, 0], side="right"), n_in - 1)
    bits = (x_states[:, None] >> np.arange(net.input_width)) & 1
    offset = 1
    for layer in net.layers:
        w = np.vstack([n.weights for n in layer])
        b = np.array([n.bias for n in layer])
        fired = bits @ w.T + b >= 0.0
        flips = draws[:, offset : offset + len(layer)] < net.xi
        bits = (fired ^ flips).astype(np.int64)
        offset += len(layer)
    y_states = bits @ (1 << np.arange(len(net.layers[-1])))

    n_out = 1 << len(net.layers[-1])
    counts = np.bincount(x_states * n_out + y_states, minlength=n_in * n_out)
    p_hat = (counts / trials).reshape(n_in, n_out)

    px_hat = p_hat.sum(axis=1)
    py_hat = p_hat.sum(axis=0)
    mi = _entropy_nats(px_hat) + _entropy_nats(py_hat) - _entropy_nats(p_hat.ravel())
    mi = max(mi, 0.0)
    # Asymptotic (delta-method) variance of the plug-in estimate.
    nz = p_hat > 0.0
    log_ratio = np.zeros_like(p_hat)
    log_ratio[nz] = np.log(p_hat[nz] / (px_hat[:, None] * py_hat[None, :])[nz])
    var = float(np.sum(p_hat * log_ratio**2) - mi**2)
    stderr = math.sqrt(max(var, 0.0) / trials)
    return MiEstimate(
        estimate=_as_base(mi, base), stderr=_as_base(stderr, base), trials=trials, seed=seed
    )


def random_network(
    input_width: int, widths: Sequence[int], xi: float, seed: int = 0
) -> NoisyNetwork:
    """Seeded random network: weights uniform in [-1, 1], biases uniform in
    [-fan_in/2, fan_in/2].  The bounds hold for all weights, so randomized
    networks are the adversarial test case."""
    rng = np.random.default_rng(seed)
    layers = []
    fan_in = input_width
    for width in widths:
        layer = tuple(
            ThresholdNeuron(
                weights=rng.uniform(-1.0, 1.0, size=fan_in),
                bias=rng.uniform(-fan_in / 2.0, fan_in / 2.0),
            )
            for _ in range(width)
        )
        layers.append(layer)
        fan_in = width
    return NoisyNetwork(layers=tuple(layers), xi=xi, input_width=input_width)
