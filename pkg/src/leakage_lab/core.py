"""Finite alphabets, distributions, channels, joints and event masks.

All probability data lives in read-only ``float64`` arrays, so every
object is immutable after construction and safe to share across threads.
Input data is accepted when normalized within ``NORMALIZATION_TOL``
(1e-9); internal identities (marginalization, factorization) are held to
1e-12 by the test suite.

Product alphabets enumerate length-n tuples in lexicographic order and
expose the Hamming-neighbor relation used by empirical differential
privacy. Exhaustive enumerations refuse to build more than
``enumeration_cap()`` states; the default of 10^6 can be overridden with
the ``LEAKAGE_LAB_CAP`` environment variable.
"""

from __future__ import annotations

import itertools
import os
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import jsonio
from .errors import (
    AlphabetMismatch,
    CapExceeded,
    EmptySupport,
    LeakageLabError,
    NegativeMass,
    NotNormalized,
)

__all__ = [
    "NORMALIZATION_TOL",
    "DEFAULT_ENUMERATION_CAP",
    "enumeration_cap",
    "Alphabet",
    "ProductAlphabet",
    "DiscreteDistribution",
    "Channel",
    "JointDistribution",
    "EventMask",
    "validate_distribution",
    "joint_from",
    "compose_channels",
    "iid_prior",
    "fiber_max_prob",
]

NORMALIZATION_TOL = 1e-9
DEFAULT_ENUMERATION_CAP = 10**6
_CAP_ENV = "LEAKAGE_LAB_CAP"


def enumeration_cap() -> int:
    """Current cap on exhaustively enumerated state spaces."""
    raw = os.environ.get(_CAP_ENV)
    if raw is None:
        return DEFAULT_ENUMERATION_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise LeakageLabError(f"{_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise LeakageLabError(f"{_CAP_ENV} must be positive, got {cap}")
    return cap


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class Alphabet:
    """Ordered collection of distinct symbol labels."""

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(str(label) for label in labels)
        if not labels:
            raise EmptySupport("an alphabet needs at least one symbol")
        index = {label: i for i, label in enumerate(labels)}
        if len(index) != len(labels):
            raise LeakageLabError("alphabet labels must be distinct")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LeakageLabError(f"unknown symbol {label!r}") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        if len(self.labels) <= 6:
            return f"Alphabet({list(self.labels)!r})"
        return f"Alphabet(<{len(self.labels)} symbols>)"


class ProductAlphabet(Alphabet):
    """All length-``n`` tuples over a base alphabet, lexicographically ordered.

    Labels join the component labels with commas. Two tuples are Hamming
    neighbors when they differ in exactly one position, so every symbol
    has exactly ``n * (|base| - 1)`` neighbors.
    """

    __slots__ = ("base", "n", "_strides")

    SEPARATOR = ","

    def __init__(self, base: Alphabet, n: int, cap: int | None = None):
        if n < 1:
            raise LeakageLabError(f"product power must be >= 1, got {n}")
        cap = enumeration_cap() if cap is None else cap
        size = len(base) ** n
        if size > cap:
            raise CapExceeded(f"{len(base)}^{n} = {size} states exceed the enumeration cap {cap}")
        labels = (self.SEPARATOR.join(t) for t in itertools.product(base.labels, repeat=n))
        super().__init__(labels)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(
            self, "_strides", tuple(len(base) ** (n - 1 - pos) for pos in range(n))
        )

    def digits(self, index: int) -> tuple[int, ...]:
        """Base-alphabet indices of the tuple at ``index``."""
        if not 0 <= index < len(self):
            raise LeakageLabError(f"tuple index {index} out of range")
        return tuple((index // stride) % len(self.base) for stride in self._strides)

    def tuple_at(self, index: int) -> tuple[str, ...]:
        return tuple(self.base.labels[d] for d in self.digits(index))

    def digit_matrix(self) -> np.ndarray:
        """(len(self), n) matrix of base indices, row i = digits(i)."""
        idx = np.arange(len(self), dtype=np.int64)
        out = np.empty((len(self), self.n), dtype=np.int64)
        for pos, stride in enumerate(self._strides):
            out[:, pos] = (idx // stride) % len(self.base)
        return out

    def neighbors(self, index: int) -> Iterator[int]:
        """Indices of all tuples at Hamming distance one from ``index``."""
        digits = self.digits(index)
        for pos, stride in enumerate(self._strides):
            for value in range(len(self.base)):
                if value != digits[pos]:
                    yield index + (value - digits[pos]) * stride

    def strides(self) -> tuple[int, ...]:
        return self._strides


def _check_prob_vector(probs: np.ndarray, what: str) -> None:
    total = float(probs.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(total - 1.0, what)
    if np.any(probs < 0.0):
        worst = float(probs.min())
        raise NegativeMass(f"{what} has a negative entry ({worst:.3g})")
    if not np.any(probs > 0.0):
        raise EmptySupport(f"{what} has empty support")


class DiscreteDistribution:
    """Probability vector over an alphabet."""

    __slots__ = ("alphabet", "probs")

    def __init__(self, alphabet: Alphabet, probs: Iterable[float]):
        vec = np.array(probs, dtype=np.float64)
        if vec.shape != (len(alphabet),):
            raise AlphabetMismatch(
                f"expected {len(alphabet)} probabilities, got shape {vec.shape}"
            )
        _check_prob_vector(vec, "distribution")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "probs", _readonly(vec))

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteDistribution is immutable")

    def prob(self, label: str) -> float:
        return float(self.probs[self.alphabet.index(label)])

    def support(self) -> np.ndarray:
        """Indices with strictly positive mass."""
        return np.flatnonzero(self.probs > 0.0)

    def support_labels(self) -> tuple[str, ...]:
        return tuple(self.alphabet.labels[i] for i in self.support())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DiscreteDistribution)
            and self.alphabet == other.alphabet
            and np.array_equal(self.probs, other.probs)
        )

    def __hash__(self):
        return hash((self.alphabet, self.probs.tobytes()))

    def to_json(self) -> dict:
        return {"labels": list(self.alphabet.labels), "probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, payload: Mapping) -> "DiscreteDistribution":
        return cls(Alphabet(payload["labels"]), payload["probs"])


def validate_distribution(dist: DiscreteDistribution) -> None:
    """Re-check the invariants; raises on the first violated one."""
    if dist.probs.shape != (len(dist.alphabet),):
        raise AlphabetMismatch("probability vector length differs from alphabet size")
    _check_prob_vector(np.asarray(dist.probs), "distribution")


class Channel:
    """Row-stochastic conditional distribution from one alphabet to another."""

    __slots__ = ("input", "output", "rows")

    def __init__(self, input: Alphabet, output: Alphabet, rows: Iterable[Iterable[float]]):
        matrix = np.array(rows, dtype=np.float64)
        if matrix.shape != (len(input), len(output)):
            raise AlphabetMismatch(
                f"expected a {len(input)}x{len(output)} matrix, got shape {matrix.shape}"
            )
        if np.any(matrix < 0.0):
            raise NegativeMass("channel rows must be nonnegative")
        sums = matrix.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > NORMALIZATION_TOL)
        if bad.size:
            row = int(bad[0])
            raise NotNormalized(float(sums[row] - 1.0), f"channel row {row}")
        object.__setattr__(self, "input", input)
        object.__setattr__(self, "output", output)
        object.__setattr__(self, "rows", _readonly(matrix))

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    def row(self, label: str) -> np.ndarray:
        return self.rows[self.input.index(label)]

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Channel":
        return cls(alphabet, alphabet, np.eye(len(alphabet)))

    @classmethod
    def deterministic(
        cls, input: Alphabet, output: Alphabet, mapping: Mapping[str, str]
    ) -> "Channel":
        rows = np.zeros((len(input), len(output)))
        for label in input.labels:
            rows[input.index(label), output.index(mapping[label])] = 1.0
        return cls(input, output, rows)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Channel)
            and self.input == other.input
            and self.output == other.output
            and np.array_equal(self.rows, other.rows)
        )

    def __hash__(self):
        return hash((self.input, self.output, self.rows.tobytes()))

    def to_json(self) -> dict:
        return {
            "input_labels": list(self.input.labels),
            "output_labels": list(self.output.labels),
            "rows": self.rows.tolist(),
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "Channel":
        return cls(
            Alphabet(payload["input_labels"]),
            Alphabet(payload["output_labels"]),
            payload["rows"],
        )


class JointDistribution:
    """Joint probability mass over an input and an output alphabet."""

    __slots__ = ("input", "output", "mass")

    def __init__(self, input: Alphabet, output: Alphabet, mass: Iterable[Iterable[float]]):
        matrix = np.array(mass, dtype=np.float64)
        if matrix.shape != (len(input), len(output)):
            raise AlphabetMismatch(
                f"expected a {len(input)}x{len(output)} matrix, got shape {matrix.shape}"
            )
        if np.any(matrix < 0.0):
            raise NegativeMass("joint mass must be nonnegative")
        total = float(matrix.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(total - 1.0, "joint mass")
        object.__setattr__(self, "input", input)
        object.__setattr__(self, "output", output)
        object.__setattr__(self, "mass", _readonly(matrix))

    def __setattr__(self, name, value):
        raise AttributeError("JointDistribution is immutable")

    def marginal_input(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.input, self.mass.sum(axis=1))

    def marginal_output(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.output, self.mass.sum(axis=0))

    def channel(self) -> Channel:
        """Conditional rows mass(x, .) / mass(x).

        Rows with zero marginal are outside the support; they are filled
        uniformly so the result is a valid channel, and no measure ever
        reads them.
        """
        row_sums = self.mass.sum(axis=1, keepdims=True)
        uniform = np.full((1, len(self.output)), 1.0 / len(self.output))
        with np.errstate(invalid="ignore", divide="ignore"):
            rows = np.where(row_sums > 0.0, self.mass / row_sums, uniform)
        return Channel(self.input, self.output, rows)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, JointDistribution)
            and self.input == other.input
            and self.output == other.output
            and np.array_equal(self.mass, other.mass)
        )

    def __hash__(self):
        return hash((self.input, self.output, self.mass.tobytes()))

    def to_json(self) -> dict:
        return {
            "input_labels": list(self.input.labels),
            "output_labels": list(self.output.labels),
            "mass": self.mass.tolist(),
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "JointDistribution":
        return cls(
            Alphabet(payload["input_labels"]),
            Alphabet(payload["output_labels"]),
            payload["mass"],
        )


class EventMask:
    """Boolean subset of an input x output rectangle."""

    __slots__ = ("input", "output", "mask")

    def __init__(self, input: Alphabet, output: Alphabet, mask: Iterable[Iterable[bool]]):
        matrix = np.array(mask, dtype=bool)
        if matrix.shape != (len(input), len(output)):
            raise AlphabetMismatch(
                f"expected a {len(input)}x{len(output)} mask, got shape {matrix.shape}"
            )
        object.__setattr__(self, "input", input)
        object.__setattr__(self, "output", output)
        object.__setattr__(self, "mask", _readonly(matrix))

    def __setattr__(self, name, value):
        raise AttributeError("EventMask is immutable")

    def fiber(self, y: int | str) -> np.ndarray:
        """Input indices belonging to the event at output ``y``."""
        col = self.output.index(y) if isinstance(y, str) else int(y)
        return np.flatnonzero(self.mask[:, col])

    @classmethod
    def diagonal(cls, alphabet: Alphabet) -> "EventMask":
        return cls(alphabet, alphabet, np.eye(len(alphabet), dtype=bool))

    @classmethod
    def full(cls, input: Alphabet, output: Alphabet) -> "EventMask":
        return cls(input, output, np.ones((len(input), len(output)), dtype=bool))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, EventMask)
            and self.input == other.input
            and self.output == other.output
            and np.array_equal(self.mask, other.mask)
        )

    def __hash__(self):
        return hash((self.input, self.output, self.mask.tobytes()))

    def to_json(self) -> dict:
        return {
            "input_labels": list(self.input.labels),
            "output_labels": list(self.output.labels),
            "mask": [[bool(v) for v in row] for row in self.mask],
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "EventMask":
        return cls(
            Alphabet(payload["input_labels"]),
            Alphabet(payload["output_labels"]),
            payload["mask"],
        )


def joint_from(prior: DiscreteDistribution, channel: Channel) -> JointDistribution:
    """Joint mass prior(x) * channel(y|x)."""
    if prior.alphabet != channel.input:
        raise AlphabetMismatch("prior alphabet differs from channel input")
    return JointDistribution(channel.input, channel.output, prior.probs[:, None] * channel.rows)


def compose_channels(first: Channel, second: Channel) -> Channel:
    """Cascade two channels; output of ``first`` feeds ``second``."""
    if first.output != second.input:
        raise AlphabetMismatch("inner alphabets do not match")
    return Channel(first.input, second.output, first.rows @ second.rows)


def iid_prior(base: DiscreteDistribution, n: int, cap: int | None = None) -> DiscreteDistribution:
    """Product distribution of ``n`` independent copies of ``base``."""
    alphabet = ProductAlphabet(base.alphabet, n, cap=cap)
    probs = np.ones(1)
    for _ in range(n):
        probs = np.multiply.outer(probs, base.probs).reshape(-1)
    return DiscreteDistribution(alphabet, probs)


def fiber_max_prob(event: EventMask, prior: DiscreteDistribution) -> float:
    """max over outputs y of the prior mass of the event's fiber at y."""
    if prior.alphabet != event.input:
        raise AlphabetMismatch("prior alphabet differs from event input")
    fibers = event.mask.T @ prior.probs
    # the sum of a subset of the masses can overshoot 1 by an ulp
    return float(min(fibers.max(), 1.0))


def dumps(obj) -> str:
    """Serialize any of the core types (or a plain JSON tree) to text."""
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    return jsonio.dumps(obj)
