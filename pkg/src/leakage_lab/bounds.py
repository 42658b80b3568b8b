"""Tail and error bounds driven by leakage, DP, or mutual information.

Each bound returns a :class:`BoundReport` carrying the computed value,
the named inputs, and a ``trivial`` flag set when a probability bound is
>= 1 (the value is reported as computed, never clamped). The core
inequalities:

* adaptive event bound      P(E) <= exp(L) * max_y P_X(E_y);
* one-sided McDiarmid tail  exp(-2 t^2 / (n c^2)) for c-sensitive maps;
* generalization error      P(|true - empirical| > eta)
                              <= 2 exp(L - 2 n eta^2)        (c = 1/n)
                              <= 2 exp(L - 2 eta^2 / (c^2 n)) (general c);
* post-selection testing    P(false discovery) <= exp(L) * sigma, with
  the significance adjustment sigma = delta * exp(-L);
* a DP-only reference bound 3 sqrt(beta), valid while
  epsilon <= sqrt(ln(1/beta) / (2 n));
* a mutual-information bound (I + log 2) / (2 n eta^2 - log 2);
* sample-complexity estimates for both leakage and MI accounting.

Comparison helpers report both sides and the algebraic crossover
condition; they never declare a universal winner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .core import EventMask, JointDistribution
from .errors import (
    AlphabetMismatch,
    DenominatorNonPositive,
    LeakageLabError,
    NegativeEpsilon,
    NonPositiveSensitivity,
)

__all__ = [
    "BoundReport",
    "adaptive_event_bound",
    "exact_event_probability",
    "exact_event_probability_by_fibers",
    "mcdiarmid_tail",
    "gen_error_bound",
    "gen_error_bound_sensitivity",
    "dp_sensitivity_reference_bound",
    "compare_sensitivity_bounds",
    "adjusted_significance",
    "fdr_bound",
    "dwork_dp_bound",
    "mi_gen_bound",
    "sample_complexity",
]


@dataclass(frozen=True)
class BoundReport:
    """A named bound value with its inputs; probability bounds >= 1 are trivial."""

    name: str
    value: float
    inputs: Mapping[str, float]
    trivial: bool
    flags: Mapping[str, object] | None = None

    def __post_init__(self):
        if self.value < 0.0:
            raise LeakageLabError(f"bound {self.name!r} computed negative: {self.value}")
        object.__setattr__(self, "inputs", dict(self.inputs))
        if self.flags is not None:
            object.__setattr__(self, "flags", dict(self.flags))

    def to_json(self) -> dict:
        payload = {
            "name": self.name,
            "value": self.value,
            "inputs": dict(self.inputs),
            "trivial": self.trivial,
        }
        if self.flags is not None:
            payload["flags"] = dict(self.flags)
        return payload


def _probability_report(name, value, inputs, flags=None) -> BoundReport:
    return BoundReport(name, value, inputs, trivial=value >= 1.0, flags=flags)


def _check_leakage(leakage_nats: float) -> float:
    if leakage_nats < 0.0:
        raise LeakageLabError(f"leakage must be nonnegative, got {leakage_nats}")
    return float(leakage_nats)


def _check_eta(eta: float) -> float:
    if not 0.0 < eta < 1.0:
        raise LeakageLabError(f"accuracy eta must lie in (0, 1), got {eta}")
    return float(eta)


def _check_deviation(eta: float) -> float:
    # risks with general sensitivity c are not confined to [0, 1], so
    # only positivity is required here
    if eta <= 0.0:
        raise LeakageLabError(f"accuracy eta must be positive, got {eta}")
    return float(eta)


def _check_n(n: int) -> int:
    if n < 1:
        raise LeakageLabError(f"sample size must be >= 1, got {n}")
    return int(n)


def adaptive_event_bound(max_fiber_prob: float, leakage_nats: float) -> BoundReport:
    """P(E) <= exp(L) * max_y P_X(E_y) for adaptively chosen events."""
    if not 0.0 <= max_fiber_prob <= 1.0:
        raise LeakageLabError(f"fiber probability must lie in [0, 1], got {max_fiber_prob}")
    leakage_nats = _check_leakage(leakage_nats)
    value = math.exp(leakage_nats) * max_fiber_prob
    return _probability_report(
        "adaptive-event",
        value,
        {"max_fiber_prob": float(max_fiber_prob), "L_nats": leakage_nats},
    )


def exact_event_probability(joint: JointDistribution, event: EventMask) -> float:
    """Brute-force P(E): total joint mass inside the mask."""
    if joint.input != event.input or joint.output != event.output:
        raise AlphabetMismatch("event mask is indexed by different alphabets")
    return float(joint.mass[event.mask].sum())


def exact_event_probability_by_fibers(joint: JointDistribution, event: EventMask) -> float:
    """Independent second route: sum over outputs of the fiber mass.

    Kept alongside :func:`exact_event_probability` so ground truth is
    always computed two ways.
    """
    if joint.input != event.input or joint.output != event.output:
        raise AlphabetMismatch("event mask is indexed by different alphabets")
    total = 0.0
    for y in range(len(joint.output)):
        fiber = event.fiber(y)
        total += float(joint.mass[fiber, y].sum())
    return total


def mcdiarmid_tail(n: int, t: float, c: float) -> float:
    """One-sided bounded-differences tail exp(-2 t^2 / (n c^2))."""
    n = _check_n(n)
    if t < 0.0:
        raise LeakageLabError(f"deviation must be nonnegative, got {t}")
    if c <= 0.0:
        raise NonPositiveSensitivity(f"sensitivity must be positive, got {c}")
    return math.exp(-2.0 * t * t / (n * c * c))


def gen_error_bound(n: int, eta: float, leakage_nats: float) -> BoundReport:
    """Two-sided generalization bound 2 exp(L - 2 n eta^2) for 1/n-sensitive risks."""
    n = _check_n(n)
    eta = _check_eta(eta)
    leakage_nats = _check_leakage(leakage_nats)
    value = 2.0 * math.exp(leakage_nats - 2.0 * n * eta * eta)
    return _probability_report(
        "generalization-error",
        value,
        {"n": float(n), "eta": eta, "L_nats": leakage_nats},
    )


def gen_error_bound_sensitivity(n: int, eta: float, c: float, leakage_nats: float) -> BoundReport:
    """Generalization bound 2 exp(L - 2 eta^2 / (c^2 n)) for c-sensitive risks."""
    n = _check_n(n)
    eta = _check_deviation(eta)
    if c <= 0.0:
        raise NonPositiveSensitivity(f"sensitivity must be positive, got {c}")
    leakage_nats = _check_leakage(leakage_nats)
    value = 2.0 * math.exp(leakage_nats - 2.0 * eta * eta / (c * c * n))
    return _probability_report(
        "generalization-error-sensitivity",
        value,
        {"n": float(n), "eta": eta, "c": float(c), "L_nats": leakage_nats},
    )


def dp_sensitivity_reference_bound(n: int, eta: float, c: float) -> float:
    """DP-literature tail 3 exp(-eta^2 / (c^2 n)) used for comparisons."""
    n = _check_n(n)
    eta = _check_deviation(eta)
    if c <= 0.0:
        raise NonPositiveSensitivity(f"sensitivity must be positive, got {c}")
    return 3.0 * math.exp(-eta * eta / (c * c * n))


def compare_sensitivity_bounds(n: int, eta: float, c: float, leakage_nats: float) -> dict:
    """Evaluate both c-sensitive tails; reports numbers, not a verdict."""
    ours = gen_error_bound_sensitivity(n, eta, c, leakage_nats)
    reference = dp_sensitivity_reference_bound(n, eta, c)
    return {
        "leakage_bound": ours.value,
        "dp_reference_bound": reference,
        "leakage_bound_smaller": bool(ours.value < reference),
    }


def adjusted_significance(delta: float, leakage_nats: float) -> float:
    """Per-test significance delta * exp(-L) that survives selection."""
    if not 0.0 < delta <= 1.0:
        raise LeakageLabError(f"target significance must lie in (0, 1], got {delta}")
    leakage_nats = _check_leakage(leakage_nats)
    return delta * math.exp(-leakage_nats)


def fdr_bound(sigma: float, leakage_nats: float) -> BoundReport:
    """P(false discovery) <= exp(L) * sigma after adaptive selection."""
    if not 0.0 <= sigma <= 1.0:
        raise LeakageLabError(f"significance must lie in [0, 1], got {sigma}")
    leakage_nats = _check_leakage(leakage_nats)
    value = math.exp(leakage_nats) * sigma
    return _probability_report(
        "false-discovery",
        value,
        {"sigma": float(sigma), "L_nats": leakage_nats},
    )


def dwork_dp_bound(beta: float, epsilon: float, n: int) -> BoundReport:
    """DP-only generalization bound 3 sqrt(beta).

    The flag records whether epsilon <= sqrt(ln(1/beta) / (2 n)), the
    regime in which the bound is stated, and the inputs carry the
    crossover epsilon log(3 / sqrt(beta)) / n below which this bound can
    beat an exp(-n (2 eta^2 - epsilon)) style leakage bound.
    """
    if not 0.0 < beta < 1.0:
        raise LeakageLabError(f"beta must lie in (0, 1), got {beta}")
    if epsilon < 0.0:
        raise NegativeEpsilon(f"epsilon must be nonnegative, got {epsilon}")
    n = _check_n(n)
    value = 3.0 * math.sqrt(beta)
    epsilon_ceiling = math.sqrt(math.log(1.0 / beta) / (2.0 * n))
    crossover = math.log(3.0 / math.sqrt(beta)) / n
    return _probability_report(
        "dp-generalization",
        value,
        {
            "beta": float(beta),
            "epsilon": float(epsilon),
            "n": float(n),
            "epsilon_validity_ceiling": epsilon_ceiling,
            "crossover_epsilon": crossover,
        },
        flags={"epsilon_within_validity": bool(epsilon <= epsilon_ceiling)},
    )


def mi_gen_bound(mi_nats: float, n: int, eta: float) -> BoundReport:
    """Mutual-information tail (I + log 2) / (2 n eta^2 - log 2)."""
    if mi_nats < 0.0:
        raise LeakageLabError(f"mutual information must be nonnegative, got {mi_nats}")
    n = _check_n(n)
    eta = _check_eta(eta)
    denominator = 2.0 * n * eta * eta - math.log(2.0)
    if denominator <= 0.0:
        raise DenominatorNonPositive(
            f"2 n eta^2 = {2.0 * n * eta * eta} must exceed log 2"
        )
    value = (mi_nats + math.log(2.0)) / denominator
    return _probability_report(
        "mutual-information-generalization",
        value,
        {"I_nats": float(mi_nats), "n": float(n), "eta": eta},
    )


def sample_complexity(value_nats: float, eta: float, delta: float, mode: str) -> float:
    """Samples sufficient for accuracy eta at confidence 1 - delta.

    ``mode="leakage"`` uses (L + ln(1/delta)) / eta^2;
    ``mode="mutual-info"`` uses I / (eta^2 * delta).
    """
    if value_nats < 0.0:
        raise LeakageLabError(f"information value must be nonnegative, got {value_nats}")
    eta = _check_eta(eta)
    if not 0.0 < delta < 1.0:
        raise LeakageLabError(f"failure probability must lie in (0, 1), got {delta}")
    if mode == "leakage":
        return (value_nats + math.log(1.0 / delta)) / (eta * eta)
    if mode == "mutual-info":
        return value_nats / (eta * eta * delta)
    raise LeakageLabError(f"unknown sample-complexity mode {mode!r}")
