import numpy as np
import pytest

from leakage_lab import Alphabet, Channel, DiscreteDistribution, joint_from


def bec_channel(alpha: float) -> Channel:
    """Binary symbols through an erasure channel with erasure rate alpha."""
    return Channel(
        Alphabet(["0", "1"]),
        Alphabet(["0", "1", "e"]),
        [[1.0 - alpha, 0.0, alpha], [0.0, 1.0 - alpha, alpha]],
    )


def uniform(labels) -> DiscreteDistribution:
    labels = list(labels)
    return DiscreteDistribution(Alphabet(labels), np.full(len(labels), 1.0 / len(labels)))


def bernoulli_identity_joint(p: float):
    """Joint of (X, X) for X ~ Bernoulli(p); diagonal mass (1 - p, p)."""
    alphabet = Alphabet(["0", "1"])
    return joint_from(
        DiscreteDistribution(alphabet, [1.0 - p, p]),
        Channel.identity(alphabet),
    )


@pytest.fixture
def bec05() -> Channel:
    return bec_channel(0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)
