"""Exact probability machinery for finite alphabets.

Distributions are row vectors and channels are row-stochastic matrices
acting on the right: the output law of a channel with matrix A on input
law p is ``p @ A``.  All computations are done in nats internally; bits
are a presentation choice.

State indexing for bit-string alphabets is little-endian throughout the
package: bit ``i`` of a state is binary digit ``i`` of its integer index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import ValidationError

# Entries below this are treated as exact zeros inside logarithms
# (0 * log 0 = 0 convention).
LOG_ZERO_CUTOFF = 1e-15

# Constructors renormalize vectors whose sum is within this of 1 and
# reject anything further off; tolerates text round-trips without
# masking malformed input.
NORMALIZE_TOLERANCE = 1e-9

_LN2 = float(np.log(2.0))

LogBase = Literal["nats", "bits"]


def _as_base(value_nats: float, base: LogBase) -> float:
    if base == "nats":
        return value_nats
    if base == "bits":
        return value_nats / _LN2
    raise ValidationError(f"unknown log base {base!r}; expected 'nats' or 'bits'")


def _validated_pmf(values, what: str) -> np.ndarray:
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValidationError(f"{what} must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{what} contains non-finite entries")
    if v.min() < -NORMALIZE_TOLERANCE:
        raise ValidationError(f"{what} has a negative entry ({v.min():.9g})")
    v = np.maximum(v, 0.0)
    total = v.sum()
    if abs(total - 1.0) > NORMALIZE_TOLERANCE:
        raise ValidationError(
            f"{what} sums to {total:.9g}; expected 1 within {NORMALIZE_TOLERANCE:g}"
        )
    v = v / total
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _validated_pmf(self.probs, "distribution"))

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.size)

    @staticmethod
    def uniform(n: int) -> "Distribution":
        if n < 1:
            raise ValidationError("alphabet size must be positive")
        return Distribution(np.full(n, 1.0 / n))

    @staticmethod
    def point_mass(index: int, n: int) -> "Distribution":
        if not 0 <= index < n:
            raise ValidationError(f"point mass index {index} outside alphabet of size {n}")
        v = np.zeros(n)
        v[index] = 1.0
        return Distribution(v)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic transition matrix; row i is the output law given input i."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise ValidationError("channel matrix must be a non-empty 2-d array")
        rows = []
        for i, row in enumerate(m):
            try:
                rows.append(_validated_pmf(row, f"channel row {i}"))
            except ValidationError as exc:
                raise ValidationError(str(exc)) from None
        m = np.vstack(rows)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_inputs(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def m_outputs(self) -> int:
        return int(self.matrix.shape[1])

    @staticmethod
    def identity(n: int) -> "Channel":
        return Channel(np.eye(n))

    @staticmethod
    def bsc(p: float) -> "Channel":
        """Binary symmetric channel flipping a bit with probability p."""
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"flip probability must be in [0, 1], got {p:.9g}")
        return Channel(np.array([[1.0 - p, p], [p, 1.0 - p]]))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint table p(x, y) with its two marginals."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2 or t.size == 0:
            raise ValidationError("joint table must be a non-empty 2-d array")
        if not np.all(np.isfinite(t)):
            raise ValidationError("joint table contains non-finite entries")
        if t.min() < -NORMALIZE_TOLERANCE:
            raise ValidationError(f"joint table has a negative entry ({t.min():.9g})")
        t = np.maximum(t, 0.0)
        total = t.sum()
        if abs(total - 1.0) > NORMALIZE_TOLERANCE:
            raise ValidationError(
                f"joint table sums to {total:.9g}; expected 1 within {NORMALIZE_TOLERANCE:g}"
            )
        t = t / total
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def marginal_x(self) -> Distribution:
        return Distribution(self.table.sum(axis=1))

    @property
    def marginal_y(self) -> Distribution:
        return Distribution(self.table.sum(axis=0))


def _entropy_nats(values: np.ndarray) -> float:
    nz = values[values > LOG_ZERO_CUTOFF]
    return float(-np.sum(nz * np.log(nz)))


def entropy(d: Distribution, base: LogBase = "nats") -> float:
    """Shannon entropy -sum p_i log p_i with the 0 log 0 = 0 convention."""
    return _as_base(_entropy_nats(d.probs), base)


def push_forward(d: Distribution, c: Channel) -> Distribution:
    """Output law of channel c on input law d (row vector times matrix)."""
    if d.alphabet_size != c.n_inputs:
        raise ValidationError(
            f"distribution size {d.alphabet_size} does not match channel inputs {c.n_inputs}"
        )
    return Distribution(d.probs @ c.matrix)


def joint(d: Distribution, c: Channel) -> JointDistribution:
    """Joint law p(x, y) = d(x) * c(y | x)."""
    if d.alphabet_size != c.n_inputs:
        raise ValidationError(
            f"distribution size {d.alphabet_size} does not match channel inputs {c.n_inputs}"
        )
    return JointDistribution(d.probs[:, None] * c.matrix)


def mutual_information(j: JointDistribution, base: LogBase = "nats") -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y), clamped at 0 for float rounding."""
    t = j.table
    mi = _entropy_nats(t.sum(axis=1)) + _entropy_nats(t.sum(axis=0)) - _entropy_nats(t.ravel())
    if -1e-12 < mi < 0.0:
        mi = 0.0
    return _as_base(mi, base)


def compose(c1: Channel, c2: Channel) -> Channel:
    """Channel of the two-step chain: first c1, then c2."""
    if c1.m_outputs != c2.n_inputs:
        raise ValidationError(
            f"cannot compose: first channel has {c1.m_outputs} outputs, "
            f"second expects {c2.n_inputs} inputs"
        )
    return Channel(c1.matrix @ c2.matrix)


def tensor(c1: Channel, c2: Channel) -> Channel:
    """Product channel acting on pairs of independent symbols.

    The symbol of c1 is the lower-order digit of the combined index, so
    iterating ``tensor(acc, extra)`` keeps earlier factors in the low bits
    (the little-endian state convention).
    """
    return Channel(np.kron(c2.matrix, c1.matrix))


def state_bits(state: int, width: int) -> np.ndarray:
    """Little-endian bit vector of an integer state."""
    return (state >> np.arange(width)) & 1


def bits_state(bits) -> int:
    """Integer state of a little-endian bit vector."""
    b = np.asarray(bits, dtype=np.int64)
    return int(b @ (1 << np.arange(b.size)))


def load_channel(path) -> Channel:
    """Read a channel file: JSON ``{"rows": [[...], ...]}`` or CSV, one row per line."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict) or "rows" not in data:
            raise ValidationError(f'{path}: JSON channel must be an object with a "rows" key')
        rows = data["rows"]
    else:
        rows = _parse_csv_rows(text, path)
    try:
        matrix = np.array(rows, dtype=float)
    except ValueError:
        raise ValidationError(f"{path}: rows have inconsistent lengths") from None
    if matrix.ndim != 2:
        raise ValidationError(f"{path}: rows have inconsistent lengths")
    return Channel(matrix)


def load_distribution(path) -> Distribution:
    """Read a distribution file: JSON ``{"probs": [...]}`` or a single CSV line."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict) or "probs" not in data:
            raise ValidationError(f'{path}: JSON distribution must be an object with a "probs" key')
        return Distribution(np.asarray(data["probs"], dtype=float))
    rows = _parse_csv_rows(text, path)
    if len(rows) != 1:
        raise ValidationError(f"{path}: expected a single CSV line, found {len(rows)}")
    return Distribution(np.asarray(rows[0], dtype=float))


def _parse_csv_rows(text: str, path) -> list:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError:
            raise ValidationError(f"{path}: line {lineno} is not comma-separated decimals") from None
    if not rows:
        raise ValidationError(f"{path}: no data rows found")
    return rows
