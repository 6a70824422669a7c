import itertools

import numpy as np
import pytest
from scipy.stats import rankdata

from eggwave.simulate import CohortSpec, simulate_cohort
from eggwave.stats import (
    ChannelComparison,
    comparisons_to_csv,
    comparisons_to_text,
    compare_paired,
    compare_states,
    cr_sweep,
    detection_rate,
    lilliefors,
    paired_t,
    state_prds,
    sweep_to_csv,
    wilcoxon_signed_rank,
)


def t_two_sided_p_oracle(t, df):
    """Two-sided t-test p-value by high-precision numeric quadrature."""
    import mpmath

    mpmath.mp.dps = 50
    t = mpmath.mpf(abs(float(t)))
    nu = mpmath.mpf(df)
    c = mpmath.gamma((nu + 1) / 2) / (
        mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2)
    )
    density = lambda u: c * (1 + u * u / nu) ** (-(nu + 1) / 2)
    return float(2 * mpmath.quad(density, [t, mpmath.inf]))


def wilcoxon_p_bruteforce(diffs):
    """Two-sided signed-rank p by literal enumeration of sign assignments."""
    d = np.asarray(diffs, dtype=float)
    d = d[d != 0.0]
    ranks = rankdata(np.abs(d))
    w_obs = ranks[d > 0].sum()
    mu = ranks.sum() / 2.0
    hits = 0
    for signs in itertools.product((0.0, 1.0), repeat=len(ranks)):
        w = float(np.dot(signs, ranks))
        if abs(w - mu) >= abs(w_obs - mu):
            hits += 1
    return hits / 2 ** len(ranks)


class TestLilliefors:
    def test_normal_samples_rarely_rejected(self):
        kept = sum(
            lilliefors(np.random.default_rng(seed).standard_normal(16)).p_value >= 0.05
            for seed in range(100)
        )
        assert kept >= 90

    def test_seeded_uniform_rejected(self):
        x = np.random.default_rng(1).uniform(0.0, 1.0, 100)
        outcome = lilliefors(2.0 + 3.0 * x)
        assert outcome.p_value < 0.05
        assert outcome.significant

    def test_empirical_size(self):
        rng = np.random.default_rng(123)
        rejections = sum(
            lilliefors(rng.standard_normal(16)).p_value < 0.05 for _ in range(500)
        )
        assert 0.03 <= rejections / 500 <= 0.07

    def test_constant_sample_rejected(self):
        with pytest.raises(ValueError, match="zero-variance"):
            lilliefors(np.ones(10))

    def test_too_small_rejected(self):
        with pytest.raises(ValueError, match="at least 4"):
            lilliefors([1.0, 2.0, 3.0])

    def test_deterministic(self):
        x = np.random.default_rng(9).standard_normal(20)
        assert lilliefors(x).p_value == lilliefors(x).p_value


class TestPairedT:
    def test_reference_case(self):
        outcome = paired_t([1.0, 2.0, 3.0, 4.0])
        assert outcome.statistic == pytest.approx(3.872983, abs=1e-6)
        assert outcome.p_value == pytest.approx(0.030466, abs=1e-4)

    def test_matches_quadrature_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            n = int(rng.integers(4, 30))
            d = rng.standard_normal(n) + rng.uniform(-1, 1)
            outcome = paired_t(d)
            assert outcome.p_value == pytest.approx(
                t_two_sided_p_oracle(outcome.statistic, n - 1), abs=1e-9
            )

    def test_symmetric_diffs_give_p_one(self):
        outcome = paired_t([-1.0, 1.0, -2.0, 2.0])
        assert outcome.statistic == 0.0
        assert outcome.p_value == pytest.approx(1.0)

    def test_zero_sd_rejected(self):
        with pytest.raises(ValueError, match="zero-variance|undefined"):
            paired_t([1.0, 1.0, 1.0, 1.0])


class TestWilcoxon:
    def test_five_positive_distinct(self):
        outcome = wilcoxon_signed_rank([0.5, 1.0, 1.5, 2.0, 2.5])
        assert outcome.statistic == 15.0
        assert outcome.p_value == pytest.approx(0.0625, abs=1e-12)

    def test_sign_symmetric_gives_p_one(self):
        outcome = wilcoxon_signed_rank([-1.0, 1.0, -2.0, 2.0])
        assert outcome.p_value == pytest.approx(1.0, abs=1e-12)

    def test_zeros_dropped(self):
        with_zeros = wilcoxon_signed_rank([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 0.0])
        without = wilcoxon_signed_rank([0.5, 1.0, 1.5, 2.0, 2.5])
        assert with_zeros.p_value == without.p_value

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError, match="non-zero"):
            wilcoxon_signed_rank([0.0, 0.0, 0.0, 0.0])

    def test_exact_matches_bruteforce_continuous(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            n = int(rng.integers(3, 13))
            d = rng.standard_normal(n) + rng.uniform(-0.5, 0.5)
            exact = wilcoxon_signed_rank(d).p_value
            assert exact == pytest.approx(wilcoxon_p_bruteforce(d), abs=1e-12)

    def test_exact_matches_bruteforce_with_ties(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            n = int(rng.integers(4, 12))
            d = rng.integers(-3, 4, size=n).astype(float)
            if np.all(d == 0) or np.count_nonzero(d) < 3:
                continue
            exact = wilcoxon_signed_rank(d).p_value
            assert exact == pytest.approx(wilcoxon_p_bruteforce(d), abs=1e-12)

    def test_large_sample_approximation_is_close(self):
        rng = np.random.default_rng(33)
        d = rng.standard_normal(24) + 0.3
        approx = wilcoxon_signed_rank(d).p_value
        # Exact reference via the same doubling construction.
        ranks = rankdata(np.abs(d))
        sums = np.zeros(1)
        for r in ranks:
            sums = np.concatenate([sums, sums + r])
        mu = ranks.sum() / 2.0
        w = ranks[d > 0].sum()
        exact = np.count_nonzero(np.abs(sums - mu) >= abs(w - mu)) / sums.size
        assert approx == pytest.approx(exact, abs=0.01)


class TestComparePaired:
    def test_identical_groups_degenerate(self):
        values = np.linspace(1.0, 2.0, 8)
        with pytest.raises(ValueError, match="degenerate: no differences"):
            compare_paired(values, values, channel=7)

    def test_mismatched_groups_rejected(self):
        with pytest.raises(ValueError, match="one-to-one"):
            compare_paired(np.ones(4), np.ones(5), channel=7)

    def test_routes_by_lilliefors_gate(self):
        rng = np.random.default_rng(41)
        base = rng.uniform(10, 12, 16)
        normal_shift = base + 1.0 + 0.3 * rng.standard_normal(16)
        row = compare_paired(base, normal_shift, channel=8)
        gate_p = lilliefors(normal_shift - base).p_value
        assert row.test_name == ("paired-t" if gate_p >= 0.05 else "wilcoxon")

        skewed_shift = base + np.concatenate([np.full(15, 0.05), [25.0]])
        row = compare_paired(base, skewed_shift, channel=9)
        gate_p = lilliefors(skewed_shift - base).p_value
        assert gate_p < 0.05
        assert row.test_name == "wilcoxon"

    def test_row_fields(self):
        rng = np.random.default_rng(42)
        a = rng.uniform(10, 12, 16)
        b = a + 1.0 + 0.2 * rng.standard_normal(16)
        row = compare_paired(a, b, channel=11)
        diffs = b - a
        assert row.channel == 11
        assert row.delta_mean == pytest.approx(diffs.mean())
        assert row.delta_sd == pytest.approx(diffs.std(ddof=1))
        assert row.significant == (row.p_value < 0.05)


class TestDetectionRate:
    def make_rows(self, flags):
        return [
            ChannelComparison(7 + i, "paired-t", 0.1, 0.1, flag, 0.01 if flag else 0.5)
            for i, flag in enumerate(flags)
        ]

    def test_six_of_eight(self):
        assert detection_rate(self.make_rows([1, 1, 1, 1, 1, 1, 0, 0])) == 75.0

    def test_none(self):
        assert detection_rate(self.make_rows([0] * 8)) == 0.0

    def test_all(self):
        assert detection_rate(self.make_rows([1] * 8)) == 100.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            detection_rate([])


class TestRendering:
    FIXTURE = [
        ChannelComparison(7, "paired-t", 0.982161, 1.844312, False, 0.058226),
        ChannelComparison(11, "wilcoxon", 1.347208, 1.741442, True, 0.000854),
    ]

    def test_csv_row_matches_reference_format(self):
        csv = comparisons_to_csv(self.FIXTURE)
        lines = csv.splitlines()
        assert lines[0] == "channel,statistics,dprd_mean,dprd_sd,significant,p_value"
        assert lines[1] == "7,Student,0.982161,1.844312,No,0.058226"
        assert lines[2] == "11,Wilcoxon,1.347208,1.741442,Yes,0.000854"

    def test_text_table_contains_aligned_columns(self):
        text = comparisons_to_text(self.FIXTURE, alpha=0.05)
        lines = text.splitlines()
        assert lines[0].split() == [
            "Channel", "Statistics", "dPRD", "Mean", "dPRD", "SD", "Significant?", "p-value",
        ]
        assert "11" in text and "Wilcoxon" in text and "0.000854" in text
        assert "seed 20060331" in text  # monte carlo provenance is recorded

    def test_sweep_csv(self):
        from eggwave.stats import SweepPoint

        points = [SweepPoint(3.0, "basal", "severe", 6, 8, 75.0)]
        csv = sweep_to_csv(points)
        assert csv.splitlines()[1] == "3,basal,severe,6,8,75.00"


@pytest.fixture(scope="module")
def small_cohort():
    return simulate_cohort(CohortSpec(subjects=4, duration_s=120.0, seed=11))


class TestPipeline:
    def test_state_prds_shape(self, small_cohort):
        prds = state_prds(small_cohort, "basal", cr=3.0)
        assert sorted(prds) == list(range(7, 15))
        for values in prds.values():
            assert values.shape == (4,)
            assert np.all(values >= 0)

    def test_compare_states_rows(self, small_cohort):
        rows = compare_states(small_cohort, "basal", "severe", cr=3.0)
        assert [r.channel for r in rows] == list(range(7, 15))
        assert all(r.test_name in ("paired-t", "wilcoxon") for r in rows)
        # Severe uncoupling raises reconstruction error on this cohort.
        assert np.mean([r.delta_mean for r in rows]) > 0

    def test_cr_sweep_rows_and_determinism(self, small_cohort):
        points = cr_sweep(small_cohort, crs=[3.0], wavelet="daubechies-3")
        assert len(points) == 2  # one row per comparison pair
        assert {(p.state_a, p.state_b) for p in points} == {
            ("basal", "mild"),
            ("basal", "severe"),
        }
        again = cr_sweep(small_cohort, crs=[3.0], wavelet="daubechies-3")
        assert points == again

    def test_scaling_cohort_does_not_change_decisions(self, small_cohort):
        rows = compare_states(small_cohort, "basal", "severe", cr=3.0)
        scaled = {
            key: type(rec)(
                subject=rec.subject,
                state=rec.state,
                sample_rate_hz=rec.sample_rate_hz,
                channel_ids=rec.channel_ids,
                samples=rec.samples * 1000.0,
            )
            for key, rec in small_cohort.recordings.items()
        }
        scaled_cohort = type(small_cohort)(recordings=scaled, seed=small_cohort.seed)
        scaled_rows = compare_states(scaled_cohort, "basal", "severe", cr=3.0)
        for row, scaled_row in zip(rows, scaled_rows):
            assert row.significant == scaled_row.significant
            assert row.p_value == pytest.approx(scaled_row.p_value, rel=1e-6)
