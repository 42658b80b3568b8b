"""Tests for the Monte Carlo experiments and their exact scaffolding."""

import csv
import math

import numpy as np
import pytest
from scipy import stats

from leakage_lab import (
    Alphabet,
    CapExceeded,
    DiscreteDistribution,
    LeakageLabError,
    adaptive_event_bound,
    data_alphabet,
    empirical_dp,
    exact_event_probability,
    exact_event_probability_by_fibers,
    fiber_max_prob,
    gen_error_bound,
    generalization_event,
    iid_prior,
    jsonio,
    learner_channel,
    maximal_leakage,
)
from leakage_lab.simulate import (
    ERM,
    EXPONENTIAL_MECHANISM,
    P_VALUE_NOTE,
    GenErrConfig,
    HypTestConfig,
    LearnerSpec,
    _clopper_pearson_lower,
    binomial_tail_table,
    derive_trial_seed,
    map_chunked,
    run_gen_error_experiment,
    run_hyptest_experiment,
    statistic_windows,
)

FOUR_SYMBOLS = data_alphabet(2)


def skewed_dist():
    return DiscreteDistribution(FOUR_SYMBOLS, [0.4, 0.1, 0.3, 0.2])


def full_erm():
    return LearnerSpec(ERM, ((0, 0), (0, 1), (1, 0), (1, 1)))


class TestSeedDerivation:
    def test_deterministic(self):
        assert derive_trial_seed(42, 7) == derive_trial_seed(42, 7)
        assert derive_trial_seed(42, 7) != derive_trial_seed(43, 7)

    def test_no_collisions_over_a_million_trials(self):
        seeds = np.fromiter(
            (derive_trial_seed(20260814, i) for i in range(1_000_000)),
            dtype=np.uint64,
            count=1_000_000,
        )
        assert len(np.unique(seeds)) == len(seeds)

    def test_negative_index(self):
        with pytest.raises(LeakageLabError):
            derive_trial_seed(1, -1)


class TestMapChunked:
    def test_fixed_boundaries(self):
        ranges = map_chunked(lambda lo, hi: (lo, hi), 2500, workers=1)
        assert ranges == [(0, 1024), (1024, 2048), (2048, 2500)]

    def test_worker_count_does_not_reorder(self):
        serial = map_chunked(lambda lo, hi: (lo, hi), 5000, workers=1)
        threaded = map_chunked(lambda lo, hi: (lo, hi), 5000, workers=4)
        assert serial == threaded

    def test_short_input_is_one_chunk(self):
        assert map_chunked(lambda lo, hi: (lo, hi), 10, workers=8) == [(0, 10)]


class TestClopperPearson:
    def test_zero_successes(self):
        assert _clopper_pearson_lower(0, 100) == 0.0

    def test_all_successes(self):
        assert _clopper_pearson_lower(50, 50) == 0.01 ** (1.0 / 50)

    def test_matches_scipy_exact_interval(self):
        # one-sided 99% lower edge equals the lower end of the exact
        # two-sided 98% interval
        for successes, trials in ((5, 100), (1, 30), (250, 1000)):
            mine = _clopper_pearson_lower(successes, trials)
            reference = stats.binomtest(successes, trials).proportion_ci(
                confidence_level=0.98, method="exact"
            )
            assert mine == pytest.approx(reference.low, abs=1e-12)
            assert mine < successes / trials


class TestStatisticWindows:
    def test_width_rule(self):
        assert statistic_windows(64, 10).shape == (10, 8)
        assert statistic_windows(100, 4).shape == (4, 25)
        # width is clipped to n when n < 8
        assert statistic_windows(6, 3).shape == (3, 6)

    def test_coordinates_are_valid_and_distinct(self):
        for n, t in ((64, 10), (100, 4), (6, 3), (17, 5)):
            windows = statistic_windows(n, t)
            assert windows.min() >= 0
            assert windows.max() < n
            for row in windows:
                assert len(set(row.tolist())) == len(row)

    def test_even_starts(self):
        windows = statistic_windows(100, 4)
        assert windows[:, 0].tolist() == [0, 25, 50, 75]


class TestBinomialTailTable:
    def test_matches_scipy_survival_function(self):
        for m in (4, 8, 10, 16):
            table = binomial_tail_table(m)
            reference = stats.binom.sf(np.arange(m + 1) - 1, m, 0.5)
            assert np.max(np.abs(table - reference)) < 1e-15

    def test_edges(self):
        table = binomial_tail_table(10)
        assert table[0] == 1.0
        assert table[10] == 2.0 ** -10
        assert np.all(np.diff(table) < 0)


class TestLearnerSpec:
    def test_valid_erm(self):
        spec = full_erm()
        assert spec.domain_size == 2
        assert spec.epsilon is None

    def test_validation(self):
        with pytest.raises(LeakageLabError, match="kind"):
            LearnerSpec("SGD", ((0, 1),))
        with pytest.raises(LeakageLabError, match="empty"):
            LearnerSpec(ERM, ())
        with pytest.raises(LeakageLabError, match="domain size"):
            LearnerSpec(ERM, ((0, 1), (0, 1, 1)))
        with pytest.raises(LeakageLabError, match="distinct"):
            LearnerSpec(ERM, ((0, 1), (0, 1)))
        with pytest.raises(LeakageLabError, match="binary"):
            LearnerSpec(ERM, ((0, 2),))
        with pytest.raises(LeakageLabError, match="epsilon"):
            LearnerSpec(EXPONENTIAL_MECHANISM, ((0, 1),))
        with pytest.raises(LeakageLabError, match="tie break"):
            LearnerSpec(ERM, ((0, 1),), tie_break="random")

    def test_json_round_trip(self):
        erm = full_erm()
        assert LearnerSpec.from_json(jsonio.loads(jsonio.dumps(erm.to_json()))) == erm
        mech = LearnerSpec(EXPONENTIAL_MECHANISM, ((0, 0), (1, 1)), epsilon=0.5)
        again = LearnerSpec.from_json(jsonio.loads(jsonio.dumps(mech.to_json())))
        assert again == mech
        assert "epsilon" not in erm.to_json()


class TestConfigs:
    def test_gen_err_validation(self):
        dist = skewed_dist()
        spec = full_erm()
        with pytest.raises(LeakageLabError):
            GenErrConfig(0, 4, dist, spec, 0.3, 100, 1)
        with pytest.raises(LeakageLabError):
            GenErrConfig(2, 0, dist, spec, 0.3, 100, 1)
        with pytest.raises(LeakageLabError):
            GenErrConfig(2, 4, dist, spec, 1.0, 100, 1)
        with pytest.raises(LeakageLabError):
            GenErrConfig(2, 4, dist, spec, 0.3, 0, 1)
        with pytest.raises(LeakageLabError, match="domain"):
            GenErrConfig(3, 4, dist, spec, 0.3, 100, 1)
        with pytest.raises(LeakageLabError, match="seed"):
            GenErrConfig(2, 4, dist, spec, 0.3, 100, -1)
        wrong = DiscreteDistribution(Alphabet(("a", "b", "c", "d")), [0.4, 0.1, 0.3, 0.2])
        with pytest.raises(LeakageLabError, match="canonical"):
            GenErrConfig(2, 4, wrong, spec, 0.3, 100, 1)

    def test_gen_err_round_trip(self):
        config = GenErrConfig(2, 4, skewed_dist(), full_erm(), 0.3, 100, 9)
        again = GenErrConfig.from_json(jsonio.loads(jsonio.dumps(config.to_json())))
        assert again == config

    def test_hyptest_validation(self):
        with pytest.raises(LeakageLabError):
            HypTestConfig(0, 5, 0.01, 0.05, 100, 1)
        with pytest.raises(LeakageLabError):
            HypTestConfig(64, 0, 0.01, 0.05, 100, 1)
        with pytest.raises(LeakageLabError):
            HypTestConfig(64, 5, 0.0, 0.05, 100, 1)
        with pytest.raises(LeakageLabError):
            HypTestConfig(64, 5, 0.01, 1.0, 100, 1)
        with pytest.raises(LeakageLabError):
            HypTestConfig(64, 5, 0.01, 0.05, 0, 1)
        with pytest.raises(LeakageLabError, match="seed"):
            HypTestConfig(64, 5, 0.01, 0.05, 100, 2 ** 64)

    def test_hyptest_round_trip(self):
        config = HypTestConfig(64, 10, 0.005, 0.05, 100, 9)
        again = HypTestConfig.from_json(jsonio.loads(jsonio.dumps(config.to_json())))
        assert again == config


class TestLearnerChannel:
    def test_singleton_class_leaks_nothing(self):
        spec = LearnerSpec(ERM, ((0, 1),))
        channel = learner_channel(spec, 2, 3, skewed_dist())
        assert maximal_leakage(channel).nats == 0.0

    def test_erm_rows_match_hand_enumeration(self):
        # independent oracle: re-derive every dataset's empirical risks
        # from the symbol labels with plain Python loops
        dist = skewed_dist()
        spec = full_erm()
        channel = learner_channel(spec, 2, 2, dist)
        product = channel.input
        for k in range(len(product)):
            risks = []
            for h in spec.hypotheses:
                misses = 0
                for symbol in product.tuple_at(k):
                    point, label = symbol.split(":")
                    misses += h[int(point[1:])] != int(label)
                risks.append(misses / len(product.tuple_at(k)))
            best = risks.index(min(risks))
            expected = np.zeros(len(spec.hypotheses))
            expected[best] = 1.0
            assert channel.rows[k].tolist() == expected.tolist()

    def test_deterministic_leakage_counts_reachable_outputs(self):
        dist = skewed_dist()
        channel = learner_channel(full_erm(), 2, 2, dist)
        reachable = int((channel.rows.max(axis=0) > 0).sum())
        assert maximal_leakage(channel).nats == math.log(reachable)
        assert reachable == 4

    def test_exponential_mechanism_respects_epsilon(self):
        spec = LearnerSpec(
            EXPONENTIAL_MECHANISM, ((0, 0), (0, 1), (1, 0), (1, 1)), epsilon=0.5
        )
        channel = learner_channel(spec, 2, 4, skewed_dist())
        assert empirical_dp(channel) <= 0.5 + 1e-9
        budget = min(0.5 * 4, math.log(4.0))
        assert maximal_leakage(channel).nats <= budget + 1e-10

    def test_cap(self):
        with pytest.raises(CapExceeded):
            learner_channel(full_erm(), 2, 8, skewed_dist(), cap=1000)


class TestGeneralizationEvent:
    def test_event_bound_is_sound(self):
        dist = skewed_dist()
        for spec, n, eta in (
            (full_erm(), 3, 0.3),
            (LearnerSpec(ERM, ((0, 1), (1, 0))), 4, 0.25),
            (
                LearnerSpec(
                    EXPONENTIAL_MECHANISM, ((0, 0), (0, 1), (1, 1)), epsilon=0.8
                ),
                3,
                0.35,
            ),
        ):
            joint, event = generalization_event(spec, 2, n, dist, eta)
            exact = exact_event_probability(joint, event)
            assert exact == pytest.approx(
                exact_event_probability_by_fibers(joint, event), abs=1e-12
            )
            prior = iid_prior(dist, n)
            channel = learner_channel(spec, 2, n, dist)
            leakage = maximal_leakage(channel, prior.support()).nats
            bound = adaptive_event_bound(fiber_max_prob(event, prior), leakage)
            assert exact <= bound.value + 1e-12


class TestGenErrorExperiment:
    def test_constant_learner_recovers_exact_probability(self):
        # one hypothesis: zero leakage, and the empirical tail estimates
        # a plain i.i.d. deviation probability we can compute exactly
        dist = skewed_dist()
        spec = LearnerSpec(ERM, ((0, 1),))
        config = GenErrConfig(2, 6, dist, spec, 0.25, 20000, 7)
        report = run_gen_error_experiment(config)
        assert report.exact_leakage_nats == 0.0
        assert report.theoretical_bound == gen_error_bound(6, 0.25, 0.0).value
        joint, event = generalization_event(spec, 2, 6, dist, 0.25)
        exact = exact_event_probability(joint, event)
        sigma = math.sqrt(exact * (1.0 - exact) / config.trials)
        assert abs(report.empirical_tail - exact) < 5.0 * sigma + 1e-3
        assert report.passed

    def test_worker_counts_agree(self):
        config = GenErrConfig(2, 4, skewed_dist(), full_erm(), 0.3, 3000, 11)
        serial = run_gen_error_experiment(config, workers=1)
        threaded = run_gen_error_experiment(config, workers=3)
        assert serial.to_json() == threaded.to_json()

    def test_seed_changes_the_sample(self):
        base = GenErrConfig(2, 4, skewed_dist(), full_erm(), 0.3, 2000, 1)
        other = GenErrConfig(2, 4, skewed_dist(), full_erm(), 0.3, 2000, 2)
        assert (
            run_gen_error_experiment(base).empirical_tail
            != run_gen_error_experiment(other).empirical_tail
        )

    def test_trace_is_deterministic(self, tmp_path):
        config = GenErrConfig(2, 4, skewed_dist(), full_erm(), 0.3, 1500, 11)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        run_gen_error_experiment(config, trace_path=str(first))
        run_gen_error_experiment(config, workers=2, trace_path=str(second))
        assert first.read_bytes() == second.read_bytes()
        with open(first, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["trial", "hypothesis", "empirical_risk", "gap", "exceeds"]
        assert len(rows) == config.trials + 1

    def test_require_exact_honors_cap(self):
        config = GenErrConfig(2, 8, skewed_dist(), full_erm(), 0.3, 10, 1)
        with pytest.raises(CapExceeded, match="exceed the cap"):
            run_gen_error_experiment(config, require_exact=True, cap=1000)

    def test_ledger_fallback_above_cap(self):
        # past the enumeration cap the report falls back to the ledger
        # budget, here log of the hypothesis count
        config = GenErrConfig(2, 8, skewed_dist(), full_erm(), 0.3, 200, 1)
        report = run_gen_error_experiment(config, cap=1000)
        assert report.exact_leakage_nats is None
        assert report.ledger_bound_nats == math.log(4.0)
        assert report.theoretical_bound == gen_error_bound(8, 0.3, math.log(4.0)).value

    def test_exponential_mechanism_bound_decreases_with_n(self):
        spec = LearnerSpec(
            EXPONENTIAL_MECHANISM, ((0, 0), (0, 1), (1, 0), (1, 1)), epsilon=0.5
        )
        bounds = []
        for n in (4, 6, 8):
            config = GenErrConfig(2, n, skewed_dist(), spec, 0.6, 16, 3)
            bounds.append(run_gen_error_experiment(config).theoretical_bound)
        assert bounds == sorted(bounds, reverse=True)


class TestHypTestExperiment:
    def test_single_statistic_is_classical_testing(self):
        # T = 1 means no selection: zero ledger bound and no adjustment
        config = HypTestConfig(16, 1, 0.05, 0.05, 4096, 5)
        report = run_hyptest_experiment(config)
        assert report.ledger_bound_nats == 0.0
        assert report.adjusted_sigma == 0.05
        assert report.adjusted == report.raw
        assert report.passed

    def test_ten_statistics_with_adjustment(self):
        config = HypTestConfig(64, 10, 0.005, 0.05, 4096, 5)
        report = run_hyptest_experiment(config)
        assert report.adjusted_sigma == 0.004999999999999999
        assert report.ledger_bound_nats == math.log(10.0)
        assert report.adjusted.theoretical_bound == pytest.approx(0.05, rel=1e-12)
        assert report.passed

    def test_worker_counts_agree(self):
        config = HypTestConfig(64, 10, 0.005, 0.05, 3000, 5)
        serial = run_hyptest_experiment(config, workers=1)
        threaded = run_hyptest_experiment(config, workers=4)
        assert serial.to_json() == threaded.to_json()

    def test_trace_rows(self, tmp_path):
        config = HypTestConfig(32, 4, 0.01, 0.05, 500, 5)
        trace = tmp_path / "trace.csv"
        run_hyptest_experiment(config, trace_path=str(trace))
        with open(trace, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["trial", "selected", "p_value", "reject_adjusted", "reject_raw"]
        assert len(rows) == config.trials + 1

    def test_report_json_shape(self):
        config = HypTestConfig(16, 2, 0.05, 0.05, 256, 5)
        payload = run_hyptest_experiment(config).to_json()
        assert payload["exactLeakage_nats"] is None
        assert payload["ledgerBound_nats"] == math.log(2.0)
        assert payload["note"] == P_VALUE_NOTE
        assert set(payload["adjusted"]) == {
            "significance",
            "empiricalTail",
            "mcHalfWidth",
            "theoreticalBound",
            "pass",
        }
