"""Desk-scale adaptive-analysis experiments with enumerable learners.

Two experiment families check the bounds against live randomness:

* generalization error: datasets of n samples drawn i.i.d. from a finite
  distribution over domain-label pairs feed a learner (deterministic
  empirical-risk minimization, or the exponential mechanism with weight
  exp(-epsilon * n * risk / 2)); the Monte Carlo frequency of
  |true risk - empirical risk| > eta is compared against
  2 exp(L - 2 n eta^2), with L the exact learner-channel leakage when
  the dataset space is enumerable, else the ledger bound;

* post-selection hypothesis testing: under a fair-coin null, the
  minimum-p-value rule picks one of T coordinate-window binomial tests
  with exact tail p-values; the false-discovery frequency is compared
  against exp(log T) * sigma at both the adjusted and raw significance.

Trials are independent work items. Each trial's randomness comes from a
counter-mixed 64-bit seed, the trial stream is split into fixed-size
chunks, and aggregation adds integer counts in chunk order, so reports
are byte-identical for every worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.stats import beta as _beta_distribution

from .bounds import adjusted_significance, fdr_bound, gen_error_bound
from .core import (
    Alphabet,
    Channel,
    DiscreteDistribution,
    EventMask,
    JointDistribution,
    ProductAlphabet,
    enumeration_cap,
    iid_prior,
    joint_from,
)
from .errors import CapExceeded, LeakageLabError
from .ledger import cardinality_bound, dp_to_leakage
from .measures import maximal_leakage

__all__ = [
    "LearnerSpec",
    "GenErrConfig",
    "HypTestConfig",
    "ExperimentReport",
    "SignificanceCheck",
    "HypTestReport",
    "derive_trial_seed",
    "map_chunked",
    "data_alphabet",
    "learner_channel",
    "generalization_event",
    "statistic_windows",
    "binomial_tail_table",
    "run_gen_error_experiment",
    "run_hyptest_experiment",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_CHUNK_TRIALS = 1024
CONFIDENCE = 0.99

ERM = "ERM"
EXPONENTIAL_MECHANISM = "exponential-mechanism"


def derive_trial_seed(master_seed: int, index: int) -> int:
    """Counter-mixed per-trial seed (a SplitMix64 step).

    For a fixed master seed the map index -> seed is injective, so no
    two trials ever share a stream.
    """
    if index < 0:
        raise LeakageLabError(f"trial index must be nonnegative, got {index}")
    z = (int(master_seed) + (index + 1) * _GOLDEN) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def _trial_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_trial_seed(master_seed, index))


def map_chunked(worker: Callable[[int, int], object], total: int, workers: int) -> list:
    """Run ``worker(lo, hi)`` over fixed-size chunks of ``range(total)``.

    The chunk boundaries depend only on ``total``, and the results come
    back in chunk order, so any worker count produces the same list.
    """
    ranges = [(lo, min(lo + _CHUNK_TRIALS, total)) for lo in range(0, total, _CHUNK_TRIALS)]
    if workers <= 1 or len(ranges) <= 1:
        return [worker(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda bounds: worker(*bounds), ranges))


def _clopper_pearson_lower(successes: int, trials: int, confidence: float = CONFIDENCE) -> float:
    """One-sided lower confidence bound for a binomial proportion."""
    if successes <= 0:
        return 0.0
    if successes >= trials:
        return float((1.0 - confidence) ** (1.0 / trials))
    return float(_beta_distribution.ppf(1.0 - confidence, successes, trials - successes + 1))


def data_alphabet(d: int) -> Alphabet:
    """Domain-label pairs x{i}:{b} for a domain of size d and binary labels."""
    if d < 1:
        raise LeakageLabError(f"domain size must be >= 1, got {d}")
    return Alphabet(f"x{i}:{b}" for i in range(d) for b in (0, 1))


@dataclass(frozen=True)
class LearnerSpec:
    """An enumerable learner over a finite hypothesis class.

    ``hypotheses`` are binary label vectors over the domain; ties in
    empirical risk always resolve to the lowest index.
    """

    kind: str
    hypotheses: tuple[tuple[int, ...], ...]
    epsilon: float | None = None
    tie_break: str = "lowest-index"

    def __post_init__(self):
        if self.kind not in (ERM, EXPONENTIAL_MECHANISM):
            raise LeakageLabError(f"unknown learner kind {self.kind!r}")
        hypotheses = tuple(tuple(int(v) for v in h) for h in self.hypotheses)
        if not hypotheses:
            raise LeakageLabError("hypothesis class is empty")
        widths = {len(h) for h in hypotheses}
        if len(widths) != 1:
            raise LeakageLabError("hypotheses must share the domain size")
        if len(set(hypotheses)) != len(hypotheses):
            raise LeakageLabError("hypotheses must be distinct")
        if any(v not in (0, 1) for h in hypotheses for v in h):
            raise LeakageLabError("hypotheses must be binary label vectors")
        if self.tie_break != "lowest-index":
            raise LeakageLabError(f"unsupported tie break {self.tie_break!r}")
        if self.kind == EXPONENTIAL_MECHANISM:
            if self.epsilon is None or self.epsilon <= 0.0:
                raise LeakageLabError("exponential mechanism needs epsilon > 0")
        object.__setattr__(self, "hypotheses", hypotheses)

    @property
    def domain_size(self) -> int:
        return len(self.hypotheses[0])

    def to_json(self) -> dict:
        payload: dict = {
            "kind": self.kind,
            "hypothesisClass": [list(h) for h in self.hypotheses],
            "tieBreak": self.tie_break,
        }
        if self.epsilon is not None:
            payload["epsilon"] = self.epsilon
        return payload

    @classmethod
    def from_json(cls, payload: Mapping) -> "LearnerSpec":
        return cls(
            kind=str(payload["kind"]),
            hypotheses=tuple(tuple(h) for h in payload["hypothesisClass"]),
            epsilon=payload.get("epsilon"),
            tie_break=str(payload.get("tieBreak", "lowest-index")),
        )


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise LeakageLabError("seed must be a 64-bit unsigned integer")
    return seed


@dataclass(frozen=True)
class GenErrConfig:
    """Generalization-error experiment parameters."""

    d: int
    n: int
    data_dist: DiscreteDistribution
    learner: LearnerSpec
    eta: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.d < 1:
            raise LeakageLabError(f"domain size must be >= 1, got {self.d}")
        if self.n < 1:
            raise LeakageLabError(f"sample size must be >= 1, got {self.n}")
        if not 0.0 < self.eta < 1.0:
            raise LeakageLabError(f"eta must lie in (0, 1), got {self.eta}")
        if self.trials < 1:
            raise LeakageLabError(f"trial count must be >= 1, got {self.trials}")
        if self.learner.domain_size != self.d:
            raise LeakageLabError("hypotheses do not cover the domain")
        if self.data_dist.alphabet != data_alphabet(self.d):
            raise LeakageLabError("data distribution must use the canonical x{i}:{b} symbols")
        _check_seed(self.seed)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "dataDistribution": self.data_dist.to_json(),
            "learner": self.learner.to_json(),
            "eta": self.eta,
            "trials": self.trials,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "GenErrConfig":
        return cls(
            d=int(payload["d"]),
            n=int(payload["n"]),
            data_dist=DiscreteDistribution.from_json(payload["dataDistribution"]),
            learner=LearnerSpec.from_json(payload["learner"]),
            eta=float(payload["eta"]),
            trials=int(payload["trials"]),
            seed=int(payload["seed"]),
        )


@dataclass(frozen=True)
class HypTestConfig:
    """Post-selection hypothesis-testing experiment parameters."""

    n: int
    num_stats: int
    sigma: float
    delta: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise LeakageLabError(f"sample size must be >= 1, got {self.n}")
        if self.num_stats < 1:
            raise LeakageLabError(f"statistic count must be >= 1, got {self.num_stats}")
        if not 0.0 < self.sigma < 1.0:
            raise LeakageLabError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not 0.0 < self.delta < 1.0:
            raise LeakageLabError(f"delta must lie in (0, 1), got {self.delta}")
        if self.trials < 1:
            raise LeakageLabError(f"trial count must be >= 1, got {self.trials}")
        _check_seed(self.seed)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "numStats": self.num_stats,
            "sigma": self.sigma,
            "delta": self.delta,
            "trials": self.trials,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "HypTestConfig":
        return cls(
            n=int(payload["n"]),
            num_stats=int(payload["numStats"]),
            sigma=float(payload["sigma"]),
            delta=float(payload["delta"]),
            trials=int(payload["trials"]),
            seed=int(payload["seed"]),
        )


@dataclass(frozen=True)
class ExperimentReport:
    """One empirical tail compared against one theoretical bound."""

    empirical_tail: float
    mc_half_width: float
    theoretical_bound: float
    exact_leakage_nats: float | None
    ledger_bound_nats: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "empiricalTail": self.empirical_tail,
            "mcHalfWidth": self.mc_half_width,
            "theoreticalBound": self.theoretical_bound,
            "exactLeakage_nats": self.exact_leakage_nats,
            "ledgerBound_nats": self.ledger_bound_nats,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class SignificanceCheck:
    """False-discovery frequency at one significance level."""

    significance: float
    empirical_tail: float
    mc_half_width: float
    theoretical_bound: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "significance": self.significance,
            "empiricalTail": self.empirical_tail,
            "mcHalfWidth": self.mc_half_width,
            "theoreticalBound": self.theoretical_bound,
            "pass": self.passed,
        }


# A single thresholded p-value at accuracy eta obeys
# P(E) <= exp(L - 2 eta^2); that is informative only when L < 2 eta^2,
# so it is surfaced as a note instead of a tested bound.
P_VALUE_NOTE = (
    "thresholding one p-value at accuracy eta obeys P(E) <= exp(L_nats - 2*eta^2); "
    "informative only when L_nats < 2*eta^2"
)


@dataclass(frozen=True)
class HypTestReport:
    """Both significance checks of a post-selection testing experiment."""

    adjusted_sigma: float
    ledger_bound_nats: float
    adjusted: SignificanceCheck
    raw: SignificanceCheck
    passed: bool

    def to_json(self) -> dict:
        return {
            "adjustedSigma": self.adjusted_sigma,
            "exactLeakage_nats": None,
            "ledgerBound_nats": self.ledger_bound_nats,
            "adjusted": self.adjusted.to_json(),
            "raw": self.raw.to_json(),
            "pass": self.passed,
            "note": P_VALUE_NOTE,
        }


class _LearnerTables:
    """Precomputed loss tables shared by the channel and the trials."""

    def __init__(self, spec: LearnerSpec, d: int, n: int, data_dist: DiscreteDistribution):
        if len(data_dist.alphabet) != 2 * d:
            raise LeakageLabError("data alphabet must hold 2 d domain-label pairs")
        self.spec = spec
        self.n = n
        hypotheses = np.array(spec.hypotheses, dtype=np.int64)  # (H, d)
        symbols = len(data_dist.alphabet)                       # 2 d
        domain = np.arange(symbols, dtype=np.int64) // 2
        labels = np.arange(symbols, dtype=np.int64) % 2
        # loss01[s, h] = 1 when hypothesis h mislabels the pair behind symbol s
        self.loss01 = (hypotheses[:, domain].T != labels[:, None]).astype(np.float64)
        self.true_risk = self.loss01.T @ np.asarray(data_dist.probs)
        self.hypothesis_alphabet = Alphabet(
            "".join(str(v) for v in h) for h in spec.hypotheses
        )
        self.cum_probs = np.cumsum(np.asarray(data_dist.probs))

    def empirical_risks(self, symbol_draws: np.ndarray) -> np.ndarray:
        """(trials..., H) empirical risks for symbol index draws of shape (..., n)."""
        return self.loss01[symbol_draws].mean(axis=-2)

    def draw_symbols(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(self.n)
        idx = np.searchsorted(self.cum_probs, u, side="right")
        return np.minimum(idx, len(self.cum_probs) - 1)

    def pick(self, rng: np.random.Generator, empirical: np.ndarray) -> int:
        if self.spec.kind == ERM:
            return int(np.argmin(empirical))
        weights = np.exp(-0.5 * self.spec.epsilon * self.n * empirical)
        cumulative = np.cumsum(weights)
        u = rng.random() * cumulative[-1]
        return int(min(np.searchsorted(cumulative, u, side="right"), len(weights) - 1))


def learner_channel(
    spec: LearnerSpec,
    d: int,
    n: int,
    data_dist: DiscreteDistribution,
    cap: int | None = None,
) -> Channel:
    """Exact dataset-to-hypothesis channel by enumerating all (2d)^n datasets.

    ERM rows are one-hot at the lowest-index empirical-risk minimizer;
    exponential-mechanism rows are proportional to
    exp(-epsilon * n * risk / 2).
    """
    tables = _LearnerTables(spec, d, n, data_dist)
    product = ProductAlphabet(data_dist.alphabet, n, cap=cap)
    digits = product.digit_matrix()                   # (N, n)
    empirical = tables.loss01[digits].mean(axis=1)    # (N, H)
    if spec.kind == ERM:
        rows = np.zeros_like(empirical)
        rows[np.arange(len(product)), np.argmin(empirical, axis=1)] = 1.0
    else:
        weights = np.exp(-0.5 * spec.epsilon * n * empirical)
        rows = weights / weights.sum(axis=1, keepdims=True)
    return Channel(product, tables.hypothesis_alphabet, rows)


def generalization_event(
    spec: LearnerSpec,
    d: int,
    n: int,
    data_dist: DiscreteDistribution,
    eta: float,
    cap: int | None = None,
) -> tuple[JointDistribution, EventMask]:
    """Materialize {(dataset, h): |true - empirical| > eta} with its joint."""
    channel = learner_channel(spec, d, n, data_dist, cap=cap)
    tables = _LearnerTables(spec, d, n, data_dist)
    product = channel.input
    digits = product.digit_matrix()
    empirical = tables.loss01[digits].mean(axis=1)
    gap = np.abs(tables.true_risk[None, :] - empirical)
    mask = gap > eta
    prior = iid_prior(data_dist, n, cap=cap)
    return joint_from(prior, channel), EventMask(product, channel.output, mask)


def _ledger_bound(spec: LearnerSpec, n: int) -> float:
    candidates = [cardinality_bound(len(spec.hypotheses))]
    if spec.kind == EXPONENTIAL_MECHANISM:
        candidates.append(dp_to_leakage(spec.epsilon, n))
    return min(candidates)


def _exact_leakage(config: GenErrConfig, cap: int) -> float | None:
    size = len(config.data_dist.alphabet) ** config.n
    if size > cap:
        return None
    channel = learner_channel(config.learner, config.d, config.n, config.data_dist, cap=cap)
    prior = iid_prior(config.data_dist, config.n, cap=cap)
    return maximal_leakage(channel, prior.support()).nats


def run_gen_error_experiment(
    config: GenErrConfig,
    workers: int = 1,
    trace_path: str | None = None,
    require_exact: bool = False,
    cap: int | None = None,
) -> ExperimentReport:
    """Monte Carlo check of the generalization bound for one learner."""
    cap = enumeration_cap() if cap is None else cap
    exact_leakage = _exact_leakage(config, cap)
    if require_exact and exact_leakage is None:
        raise CapExceeded(
            f"{len(config.data_dist.alphabet)}^{config.n} datasets exceed the cap {cap}"
        )
    ledger_bound = _ledger_bound(config.learner, config.n)
    used_leakage = ledger_bound if exact_leakage is None else exact_leakage
    bound = gen_error_bound(config.n, config.eta, used_leakage).value

    tables = _LearnerTables(config.learner, config.d, config.n, config.data_dist)

    def chunk(lo: int, hi: int):
        exceed = 0
        rows = [] if trace_path else None
        for trial in range(lo, hi):
            rng = _trial_rng(config.seed, trial)
            symbols = tables.draw_symbols(rng)
            empirical = tables.empirical_risks(symbols[None, :])[0]
            h = tables.pick(rng, empirical)
            gap = abs(float(tables.true_risk[h]) - float(empirical[h]))
            hit = gap > config.eta
            exceed += hit
            if rows is not None:
                rows.append((trial, h, float(empirical[h]), gap, hit))
        return exceed, rows

    results = map_chunked(chunk, config.trials, workers)
    exceed_total = sum(count for count, _ in results)
    empirical_tail = exceed_total / config.trials
    half_width = empirical_tail - _clopper_pearson_lower(exceed_total, config.trials)

    if trace_path:
        with open(trace_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["trial", "hypothesis", "empirical_risk", "gap", "exceeds"])
            for _, rows in results:
                writer.writerows(rows)

    return ExperimentReport(
        empirical_tail=empirical_tail,
        mc_half_width=half_width,
        theoretical_bound=bound,
        exact_leakage_nats=exact_leakage,
        ledger_bound_nats=ledger_bound,
        passed=empirical_tail - half_width <= bound,
    )


def statistic_windows(n: int, t: int) -> np.ndarray:
    """Fixed coordinate windows for the T test statistics.

    Windows are evenly spaced, wrap around, and are at least 8 wide (when
    the sample allows) so that small significance levels stay reachable
    by the discrete binomial p-values.
    """
    width = min(n, max(8, n // t))
    starts = [(j * n) // t for j in range(t)]
    return np.array(
        [[(start + i) % n for i in range(width)] for start in starts], dtype=np.intp
    )


def binomial_tail_table(m: int) -> np.ndarray:
    """Exact one-sided p-values: table[k] = P(Bin(m, 1/2) >= k)."""
    weights = [math.comb(m, i) for i in range(m + 1)]
    suffix = 0
    table = np.empty(m + 1)
    for k in range(m, -1, -1):
        suffix += weights[k]
        table[k] = suffix / (1 << m)
    return table


def run_hyptest_experiment(
    config: HypTestConfig,
    workers: int = 1,
    trace_path: str | None = None,
) -> HypTestReport:
    """Monte Carlo check of the post-selection false-discovery bound."""
    windows = statistic_windows(config.n, config.num_stats)
    table = binomial_tail_table(windows.shape[1])
    selection_bound = cardinality_bound(config.num_stats)
    adjusted_sigma = adjusted_significance(config.delta, selection_bound)

    def chunk(lo: int, hi: int):
        hits_adjusted = 0
        hits_raw = 0
        rows = [] if trace_path else None
        for trial in range(lo, hi):
            rng = _trial_rng(config.seed, trial)
            bits = rng.integers(0, 2, size=config.n, dtype=np.int64)
            counts = bits[windows].sum(axis=1)
            p_values = table[counts]
            selected = int(np.argmin(p_values))
            p_min = float(p_values[selected])
            reject_adjusted = p_min <= adjusted_sigma
            reject_raw = p_min <= config.sigma
            hits_adjusted += reject_adjusted
            hits_raw += reject_raw
            if rows is not None:
                rows.append((trial, selected, p_min, reject_adjusted, reject_raw))
        return hits_adjusted, hits_raw, rows

    results = map_chunked(chunk, config.trials, workers)
    total_adjusted = sum(a for a, _, _ in results)
    total_raw = sum(r for _, r, _ in results)

    if trace_path:
        with open(trace_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["trial", "selected", "p_value", "reject_adjusted", "reject_raw"])
            for _, _, rows in results:
                writer.writerows(rows)

    def check(level: float, hits: int) -> SignificanceCheck:
        empirical = hits / config.trials
        half_width = empirical - _clopper_pearson_lower(hits, config.trials)
        bound = fdr_bound(level, selection_bound).value
        return SignificanceCheck(
            significance=level,
            empirical_tail=empirical,
            mc_half_width=half_width,
            theoretical_bound=bound,
            passed=empirical - half_width <= bound,
        )

    adjusted = check(adjusted_sigma, total_adjusted)
    raw = check(config.sigma, total_raw)
    return HypTestReport(
        adjusted_sigma=adjusted_sigma,
        ledger_bound_nats=selection_bound,
        adjusted=adjusted,
        raw=raw,
        passed=adjusted.passed and raw.passed,
    )
