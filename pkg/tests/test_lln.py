import numpy as np
import pytest

from subexp.lln import (
    MeanPolicy,
    NoiseSpec,
    SimConfig,
    SimulationError,
    empirical_lln,
    log_schedule,
    rate_check,
    second_moment_upper,
    simulate_path,
)
from subexp.maximal import GridSpec, MaximalDist
from subexp.scenarios import BoundedLipschitzFn

IDENT = BoundedLipschitzFn(lambda x: x, 1.0, name="id")
SQUARE = BoundedLipschitzFn(lambda x: x * x, 4.0, name="square")


class TestNoiseSpec:
    def test_second_moments_exact(self):
        assert NoiseSpec.none().second_moment == 0.0
        assert NoiseSpec.uniform(0.3).second_moment == 0.3**2 / 3
        assert NoiseSpec.two_point(0.5).second_moment == 0.25

    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec("gaussian", 1.0)
        with pytest.raises(ValueError):
            NoiseSpec.uniform(0.0)
        with pytest.raises(ValueError):
            NoiseSpec.two_point(-1.0)

    def test_sample_ranges(self):
        rng = np.random.default_rng(0)
        assert np.all(NoiseSpec.none().sample(rng, 50) == 0.0)
        u = NoiseSpec.uniform(0.4).sample(rng, 500)
        assert np.all(np.abs(u) <= 0.4)
        t = NoiseSpec.two_point(0.7).sample(rng, 500)
        assert set(np.unique(t)) == {-0.7, 0.7}

    def test_labels(self):
        assert NoiseSpec.none().label == "none"
        assert NoiseSpec.uniform(0.3).label == "uniform:0.3"


class TestMeanPolicy:
    def test_constant_vector(self):
        rng = np.random.default_rng(0)
        v = MeanPolicy.constant(0.0).mean_vector(5, rng)
        assert np.all(v == 0.0) and v.shape == (5,)

    def test_periodic_vector(self):
        rng = np.random.default_rng(0)
        v = MeanPolicy.periodic([-1.0, 1.0]).mean_vector(4, rng)
        assert v.tolist() == [-1.0, 1.0, -1.0, 1.0]

    def test_periodic_truncates(self):
        rng = np.random.default_rng(0)
        v = MeanPolicy.periodic([1.0, 2.0, 3.0]).mean_vector(5, rng)
        assert v.tolist() == [1.0, 2.0, 3.0, 1.0, 2.0]

    def test_random_choice_support(self):
        rng = np.random.default_rng(0)
        v = MeanPolicy.random_choice([0.0, 1.0]).mean_vector(200, rng)
        assert set(np.unique(v)) == {0.0, 1.0}

    def test_adversarial_has_no_vector(self):
        rng = np.random.default_rng(0)
        pol = MeanPolicy.adversarial(lambda avg: 0.0)
        with pytest.raises(ValueError):
            pol.mean_vector(3, rng)

    def test_policy_ids(self):
        assert MeanPolicy.constant(1.0).policy_id == "constant(1)"
        assert MeanPolicy.periodic([-1, 1]).policy_id == "periodic(-1,1)"
        assert MeanPolicy.random_choice([0, 1]).policy_id == "random(0,1)"
        assert MeanPolicy.adversarial(lambda a: 0.0, "push_up").policy_id == "adversarial(push_up)"


class TestSimulatePath:
    def test_constant_zero_no_noise(self):
        d = MaximalDist(-1.0, 1.0)
        cfg = SimConfig(n=5, reps=3, seed=0)
        x = simulate_path(d, MeanPolicy.constant(0.0), NoiseSpec.none(), cfg)
        assert x.shape == (3, 5)
        assert np.all(x == 0.0)

    def test_periodic_exact_path(self):
        d = MaximalDist(-1.0, 1.0)
        cfg = SimConfig(n=4, reps=1, seed=0)
        x = simulate_path(d, MeanPolicy.periodic([-1.0, 1.0]), NoiseSpec.none(), cfg)
        assert x[0].tolist() == [-1.0, 1.0, -1.0, 1.0]

    def test_two_point_noise_support(self):
        d = MaximalDist(1.0, 1.0)
        cfg = SimConfig(n=200, reps=1, seed=1)
        x = simulate_path(d, MeanPolicy.constant(1.0), NoiseSpec.two_point(0.5), cfg)
        assert set(np.unique(x)) == {0.5, 1.5}

    def test_bit_identical_reruns(self):
        d = MaximalDist(-1.0, 1.0)
        cfg = SimConfig(n=64, reps=5, seed=42)
        pol = MeanPolicy.random_choice([-1.0, 1.0])
        a = simulate_path(d, pol, NoiseSpec.uniform(0.3), cfg)
        b = simulate_path(d, pol, NoiseSpec.uniform(0.3), cfg)
        assert np.array_equal(a, b)

    def test_rep_streams_are_seed_offsets(self):
        # replication r of seed s uses the generator seeded with s + r, so
        # a later replication can be reproduced in isolation
        d = MaximalDist(-1.0, 1.0)
        pol = MeanPolicy.random_choice([-1.0, 0.0, 1.0])
        noise = NoiseSpec.uniform(0.2)
        full = simulate_path(d, pol, noise, SimConfig(n=32, reps=3, seed=100))
        lone = simulate_path(d, pol, noise, SimConfig(n=32, reps=1, seed=102))
        assert np.array_equal(full[2], lone[0])

    def test_mean_outside_interval_names_step(self):
        d = MaximalDist(0.0, 1.0)
        cfg = SimConfig(n=4, reps=1, seed=0)
        with pytest.raises(SimulationError, match="step 0"):
            simulate_path(d, MeanPolicy.constant(2.0), NoiseSpec.none(), cfg)

    def test_adversarial_sees_running_average(self):
        seen = []

        def cb(avg):
            seen.append(avg)
            return 1.0

        d = MaximalDist(-1.0, 1.0)
        cfg = SimConfig(n=3, reps=1, seed=0)
        x = simulate_path(d, MeanPolicy.adversarial(cb), NoiseSpec.none(), cfg)
        assert x[0].tolist() == [1.0, 1.0, 1.0]
        assert seen == [0.0, 1.0, 1.0]  # 0.0 before the first observation

    def test_adversarial_violation_names_step(self):
        d = MaximalDist(-1.0, 1.0)
        cfg = SimConfig(n=10, reps=1, seed=0)
        calls = iter([0.0, 0.0, 0.0, 5.0])
        pol = MeanPolicy.adversarial(lambda avg: next(calls), "spike")
        with pytest.raises(SimulationError, match="step 3"):
            simulate_path(d, pol, NoiseSpec.none(), cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimConfig(n=0, reps=1, seed=0)
        with pytest.raises(ValueError):
            SimConfig(n=1, reps=0, seed=0)


class TestLogSchedule:
    def test_ends_at_n_max(self):
        s = log_schedule(10_000)
        assert s[-1] == 10_000
        assert s == sorted(set(s))
        assert s[0] >= 1

    def test_small_n(self):
        assert log_schedule(1) == [1]
        assert log_schedule(3) == [1, 2, 3]


class TestEmpiricalLln:
    def test_degenerate_interval_hits_target_exactly(self):
        d = MaximalDist(0.0, 0.0)
        rep = empirical_lln(
            d,
            IDENT,
            [MeanPolicy.constant(0.0)],
            NoiseSpec.none(),
            SimConfig(n=100, reps=3, seed=0),
            GridSpec(num=2),
            n_schedule=[1, 10, 100],
        )
        for row in rep.rows:
            assert row.estimate == 0.0
            assert row.target_or_bound == 0.0
            assert row.gap == 0.0

    def test_constant_extremes_reach_target_without_noise(self):
        d = MaximalDist(-1.0, 1.0)
        rep = empirical_lln(
            d,
            IDENT,
            [MeanPolicy.constant(-1.0), MeanPolicy.constant(1.0)],
            NoiseSpec.none(),
            SimConfig(n=50, reps=2, seed=0),
            GridSpec(num=11),
            n_schedule=[1, 50],
        )
        assert all(r.target_or_bound == 1.0 for r in rep.rows)
        for row in rep.max_rows():
            assert row.estimate == 1.0
            assert row.gap == 0.0

    def test_square_with_noise_converges(self):
        # frozen seed; the policy-class maximum at n = 10^4 sits close to
        # the true worst case 1
        d = MaximalDist(-1.0, 1.0)
        policies = [MeanPolicy.constant(c) for c in (-1.0, 0.0, 1.0)]
        rep = empirical_lln(
            d,
            SQUARE,
            policies,
            NoiseSpec.uniform(0.1),
            SimConfig(n=10_000, reps=200, seed=7),
            GridSpec(num=201),
            n_schedule=[100, 10_000],
        )
        assert all(r.target_or_bound == 1.0 for r in rep.rows)
        last = rep.max_rows()[-1]
        assert last.n == 10_000
        assert abs(last.gap) < 0.05

    def test_gap_shrinks_for_constant_argmax_policy(self):
        # E[f(S_n/n)] decreases toward the target as n grows; allow
        # Monte-Carlo slack of three joint standard errors
        d = MaximalDist(-1.0, 1.0)
        rep = empirical_lln(
            d,
            SQUARE,
            [MeanPolicy.constant(1.0)],
            NoiseSpec.uniform(0.4),
            SimConfig(n=4096, reps=300, seed=3),
            GridSpec(num=101),
            n_schedule=[4, 4096],
        )
        first, last = rep.rows[0], rep.rows[-1]
        assert last.estimate <= first.estimate + 3 * (first.stderr + last.stderr)
        assert abs(last.gap) <= 3 * last.stderr + 1e-3

    def test_empty_policies_rejected(self):
        d = MaximalDist(0.0, 1.0)
        with pytest.raises(ValueError):
            empirical_lln(
                d, IDENT, [], NoiseSpec.none(), SimConfig(n=10, reps=1, seed=0), GridSpec(num=3)
            )

    def test_schedule_beyond_n_rejected(self):
        d = MaximalDist(0.0, 1.0)
        with pytest.raises(ValueError, match="beyond"):
            empirical_lln(
                d,
                IDENT,
                [MeanPolicy.constant(0.5)],
                NoiseSpec.none(),
                SimConfig(n=10, reps=1, seed=0),
                GridSpec(num=3),
                n_schedule=[5, 20],
            )

    def test_report_shape_and_columns(self):
        d = MaximalDist(0.0, 1.0)
        rep = empirical_lln(
            d,
            IDENT,
            [MeanPolicy.constant(0.0), MeanPolicy.constant(1.0)],
            NoiseSpec.none(),
            SimConfig(n=10, reps=2, seed=0),
            GridSpec(num=3),
            n_schedule=[1, 10],
        )
        assert rep.kind == "lln"
        assert len(rep.rows) == 4  # 2 policies x 2 sample sizes
        assert rep.CSV_COLUMNS == ("n", "policy_id", "estimate", "target_or_bound", "gap", "stderr")
        obj = rep.to_json_obj()
        assert obj["kind"] == "lln"
        assert len(obj["rows"]) == 4
        assert "lower bound" in obj["estimate_semantics"]
        assert rep.violations() == []  # only rate reports flag violations


class TestSecondMomentUpper:
    def test_degenerate_no_noise(self):
        assert second_moment_upper(MaximalDist(0.0, 0.0), NoiseSpec.none()) == 0.0

    def test_wider_endpoint_wins(self):
        assert second_moment_upper(MaximalDist(-1.0, 2.0), NoiseSpec.none()) == 4.0

    def test_uniform_noise_adds_a2_over_3(self):
        v = second_moment_upper(MaximalDist(-1.0, 1.0), NoiseSpec.uniform(0.3))
        assert v == 1.0 + 0.3**2 / 3
        assert abs(v - 1.03) < 1e-15


class TestRateCheck:
    def test_no_noise_distance_is_identically_zero(self):
        d = MaximalDist(-1.0, 1.0)
        rep = rate_check(
            d,
            [MeanPolicy.constant(1.0), MeanPolicy.periodic([-1.0, 1.0])],
            NoiseSpec.none(),
            SimConfig(n=100, reps=5, seed=0),
            n_schedule=[1, 10, 100],
        )
        for row in rep.rows:
            assert row.estimate == 0.0
            assert row.gap == -row.target_or_bound
        assert rep.violations() == []

    def test_degenerate_uniform_noise_saturates_bound(self):
        # with mu fixed at 0 the distance equals |mean of the noise| and
        # E[mean^2] = a^2/(3n): the bound holds with near equality
        d = MaximalDist(0.0, 0.0)
        a = 0.6
        rep = rate_check(
            d,
            [MeanPolicy.constant(0.0)],
            NoiseSpec.uniform(a),
            SimConfig(n=64, reps=4000, seed=11),
            n_schedule=[1, 8, 64],
        )
        for row in rep.rows:
            assert row.target_or_bound == a**2 / 3 / row.n
            assert abs(row.gap) <= 3 * row.stderr
        assert rep.violations() == []

    def test_two_point_bound_value(self):
        d = MaximalDist(-1.0, 1.0)
        rep = rate_check(
            d,
            [MeanPolicy.constant(1.0)],
            NoiseSpec.two_point(0.5),
            SimConfig(n=100, reps=50, seed=5),
            n_schedule=[10, 100],
        )
        for row in rep.rows:
            assert row.target_or_bound == 1.25 / row.n
        assert rep.violations() == []

    def test_no_violations_across_random_configs(self):
        master = np.random.default_rng(2024)
        d = MaximalDist(-1.0, 1.0)
        for _ in range(12):
            kind = master.integers(0, 3)
            if kind == 0:
                pol = MeanPolicy.constant(float(master.uniform(-1, 1)))
            elif kind == 1:
                pol = MeanPolicy.periodic(master.uniform(-1, 1, size=2).tolist())
            else:
                pol = MeanPolicy.random_choice(master.uniform(-1, 1, size=3).tolist())
            noise = (
                NoiseSpec.none()
                if master.integers(0, 2) == 0
                else NoiseSpec.uniform(float(master.uniform(0.05, 0.5)))
            )
            rep = rate_check(
                d,
                [pol],
                noise,
                SimConfig(n=256, reps=200, seed=int(master.integers(0, 10_000))),
                n_schedule=[1, 16, 256],
            )
            assert rep.violations() == []

    def test_csv_rows_use_repr_floats(self):
        d = MaximalDist(0.0, 0.0)
        rep = rate_check(
            d,
            [MeanPolicy.constant(0.0)],
            NoiseSpec.none(),
            SimConfig(n=10, reps=2, seed=0),
            n_schedule=[10],
        )
        row = rep.csv_rows()[0]
        assert row[0] == 10
        assert row[2] == repr(0.0)
