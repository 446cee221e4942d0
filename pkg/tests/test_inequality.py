import itertools

import numpy as np
import pytest

from taxframe.accounts import Region
from taxframe.errors import (
    DistributionError,
    GroupMismatchError,
    LorenzInvariantError,
    MissingWeightsWarning,
    ZeroTotalIncomeError,
)
from taxframe.fiscal import impact_from_declines
from taxframe.inequality import (
    GroupedDistribution,
    LorenzCurve,
    RegionScope,
    Verdict,
    check_lorenz,
    distribution_from_incomes,
    gini,
    gini_delta,
    kendall_tau,
    lorenz,
    merge_regions,
    regressivity,
    scope_distributions,
)

from .table1 import TABLE1_DY, TABLE1_PCT_CY, TABLE1_PCT_DY, TABLE1_Y1, TABLE1_Y2, decile_groups

WEIGHTS = {Region.URBAN: 0.56, Region.RURAL: 0.44}


def brute_force_tau(values):
    pairs = list(itertools.combinations(range(len(values)), 2))
    score = sum(np.sign(values[j] - values[i]) for i, j in pairs)
    return score / len(pairs)


class TestLorenz:
    def test_perfect_equality_on_the_diagonal(self):
        curve = lorenz(distribution_from_incomes(np.full(10, 7.0)))

        np.testing.assert_allclose(curve.p, curve.L, atol=1e-15)
        assert curve.knots[0] == [0.0, 0.0]
        assert curve.knots[-1] == [1.0, 1.0]
        assert gini(curve) == pytest.approx(0.0, abs=1e-15)

    def test_decile_contribution_shares(self):
        curve = lorenz(distribution_from_incomes(TABLE1_PCT_CY))

        np.testing.assert_allclose(curve.p[1:], np.arange(1, 11) / 10, atol=1e-15)
        np.testing.assert_allclose(
            curve.L[1:],
            [0.0218, 0.0563, 0.0994, 0.1508, 0.2118, 0.2840, 0.3706, 0.4791, 0.6277, 1.0],
            atol=1e-12,
        )
        assert gini(curve) == pytest.approx(0.4397, abs=0.0005)

    def test_two_group_closed_form(self):
        curve = lorenz(distribution_from_incomes([0.0, 1.0]))

        assert curve.knots == [[0.0, 0.0], [0.5, 0.0], [1.0, 1.0]]
        assert gini(curve) == pytest.approx(0.5, abs=1e-15)

    def test_sorted_by_per_capita_income(self):
        dist = GroupedDistribution([0.2, 0.8], [10.0, 20.0])

        curve = lorenz(dist)

        # Per head: 50 in the small group, 25 in the large one.
        np.testing.assert_allclose(curve.p, [0.0, 0.8, 1.0])
        np.testing.assert_allclose(curve.L, [0.0, 2 / 3, 1.0])

    def test_zero_total_income(self):
        with pytest.raises(ZeroTotalIncomeError):
            lorenz(distribution_from_incomes([0.0, 0.0]))

    def test_rejects_a_concave_curve(self):
        curve = LorenzCurve(p=np.array([0.0, 0.25, 0.5, 1.0]), L=np.array([0.0, 0.2, 0.3, 1.0]))

        with pytest.raises(LorenzInvariantError):
            check_lorenz(curve)

    def test_rejects_a_curve_above_the_diagonal(self):
        curve = LorenzCurve(p=np.array([0.0, 0.5, 1.0]), L=np.array([0.0, 0.6, 1.0]))

        with pytest.raises(LorenzInvariantError):
            check_lorenz(curve)

    @pytest.mark.parametrize(
        "shares, incomes",
        [([0.5, 0.4], [1.0, 1.0]), ([0.5, 0.5], [1.0, -1.0]), ([1.0, 0.0], [1.0, 1.0]), ([1.0], [np.nan])],
    )
    def test_invalid_distributions(self, shares, incomes):
        with pytest.raises(DistributionError):
            GroupedDistribution(shares, incomes)


class TestGini:
    def test_table_incomes_match_published_decile_gini(self):
        g = gini(lorenz(distribution_from_incomes(TABLE1_Y1)))

        assert g == pytest.approx(0.44366993, abs=1e-7)

    def test_scale_invariance(self, rng):
        for _ in range(20):
            dist = distribution_from_incomes(rng.lognormal(size=10))

            assert abs(gini(lorenz(dist.scaled(rng.uniform(0.01, 100)))) - gini(lorenz(dist))) <= 1e-12

    def test_bounds(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 21))
            shares = rng.random(k) + 0.01
            dist = GroupedDistribution(shares / shares.sum(), rng.exponential(size=k))

            assert 0 <= gini(lorenz(dist)) < 1

    def test_pigou_dalton_transfers(self, rng):
        incomes = np.sort(rng.lognormal(mean=3, sigma=1, size=10))
        for _ in range(100):
            i = int(rng.integers(0, 9))
            gap = incomes[i + 1] - incomes[i]
            after = incomes.copy()
            transfer = rng.uniform(0, gap / 2)
            after[i] += transfer
            after[i + 1] -= transfer

            before_g = gini(lorenz(distribution_from_incomes(incomes)))
            after_g = gini(lorenz(distribution_from_incomes(after)))

            assert after_g <= before_g + 1e-14
            incomes = after


class TestGiniDelta:
    def test_identical_distributions(self):
        dist = distribution_from_incomes(TABLE1_Y1)

        assert gini_delta(dist, dist).delta == 0.0

    def test_uniform_scaling(self):
        dist = distribution_from_incomes(TABLE1_Y1)

        assert abs(gini_delta(dist, dist.scaled(0.999)).delta) <= 1e-12

    def test_regressive_decline_raises_inequality(self):
        change = gini_delta(distribution_from_incomes(TABLE1_Y1), distribution_from_incomes(TABLE1_Y2))

        assert 0 < change.delta < 1e-5
        assert change.delta == pytest.approx(4e-8, rel=0.1)

    def test_mismatched_groups(self):
        with pytest.raises(GroupMismatchError):
            gini_delta(distribution_from_incomes([1.0, 2.0]), distribution_from_incomes([1.0, 2.0, 3.0]))
        with pytest.raises(GroupMismatchError):
            gini_delta(
                GroupedDistribution([0.5, 0.5], [1.0, 2.0]), GroupedDistribution([0.4, 0.6], [1.0, 2.0])
            )


class TestRegressivity:
    def test_constant_burden(self):
        result = regressivity(np.full(10, 1e-5))

        assert result.kendall_tau == 0.0
        assert result.verdict is Verdict.PROPORTIONAL

    def test_strictly_decreasing(self):
        result = regressivity(np.linspace(2e-5, 1e-5, 10))

        assert result.kendall_tau == -1.0
        assert result.verdict is Verdict.REGRESSIVE

    def test_strictly_increasing(self):
        assert regressivity(np.arange(10.0)).verdict is Verdict.PROGRESSIVE

    def test_published_burdens(self):
        result = regressivity(TABLE1_PCT_DY)

        assert result.kendall_tau == pytest.approx(-43 / 45, abs=1e-9)
        assert result.verdict is Verdict.REGRESSIVE

    def test_burdens_computed_from_table_columns(self):
        table = impact_from_declines(decile_groups(), TABLE1_Y1, TABLE1_DY)

        assert regressivity(table.pct_dy).kendall_tau == pytest.approx(-43 / 45, abs=1e-9)

    def test_matches_pair_count(self, rng):
        for _ in range(20):
            values = rng.integers(0, 5, size=10).astype(float)

            assert kendall_tau(values) == pytest.approx(brute_force_tau(values), abs=1e-12)

    def test_needs_two_classes(self):
        with pytest.raises(DistributionError):
            regressivity([1.0])


class TestRegions:
    @pytest.fixture
    def fixture_result(self, fixture_households):
        return impact_from_declines(
            fixture_households.groups, fixture_households.y0, fixture_households.y0 * 1e-5
        )

    def test_merge_keeps_a_valid_twenty_group_distribution(self, fixture_result):
        scopes = scope_distributions(fixture_result, WEIGHTS)
        urban, rural = scopes[RegionScope.URBAN][0], scopes[RegionScope.RURAL][0]

        merged = merge_regions(urban, rural, WEIGHTS)

        assert len(merged) == 20
        assert merged.population_shares.sum() == pytest.approx(1.0, abs=1e-12)
        g_urban, g_rural, g_all = (gini(lorenz(d)) for d in (urban, rural, merged))
        assert min(g_urban, g_rural) - 1e-9 <= g_all <= max(g_urban, g_rural) + 0.25

    def test_merge_needs_both_weights(self, fixture_result):
        scopes = scope_distributions(fixture_result, WEIGHTS)

        with pytest.raises(DistributionError):
            merge_regions(scopes[RegionScope.URBAN][0], scopes[RegionScope.RURAL][0], {Region.URBAN: 1.0})

    def test_all_scope_skipped_without_weights(self, fixture_result):
        with pytest.warns(MissingWeightsWarning):
            scopes = scope_distributions(fixture_result)

        assert set(scopes) == {RegionScope.URBAN, RegionScope.RURAL}

    def test_single_region_needs_no_weights(self):
        result = impact_from_declines(decile_groups(), TABLE1_Y1, TABLE1_DY)

        scopes = scope_distributions(result, scopes=(RegionScope.ALL,))

        before, after = scopes[RegionScope.ALL]
        np.testing.assert_array_equal(before.incomes, TABLE1_Y1)
        assert before.scope is RegionScope.ALL
