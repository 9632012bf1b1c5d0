from fractions import Fraction

import pytest

from privset.bounds import (
    BoundReport,
    PrivacyParams,
    evaluate_all,
    gt_lower_bound,
    gt_upper_bound,
    lower_bound_any,
    lower_bound_independent,
    upper_bound_sphere,
    upper_bound_union,
)


def test_lower_bound_any_frozen_values():
    assert lower_bound_any(6, 2, 1).value == Fraction(1, 4)
    assert lower_bound_any(8, 3, 1).value == Fraction(7, 15)
    assert lower_bound_any(6, 2, 1).regime_ok


def test_lower_bound_any_degenerate_beta_goes_nonpositive():
    # beta = d = n - d makes the numerator -beta^2
    rep = lower_bound_any(4, 2, 2)
    assert rep.value <= 0
    assert rep.clipped == 0


def test_upper_bound_sphere_frozen_values():
    assert upper_bound_sphere(6, 2, 1).value == Fraction(3, 8)
    assert upper_bound_sphere(8, 3, 1).value == Fraction(8, 15)
    assert upper_bound_sphere(4, 2, 2).value == 0
    with pytest.raises(ValueError):
        upper_bound_sphere(6, 2, 3)


def test_lower_bound_independent_frozen_values():
    assert lower_bound_independent(6, 2, 1).value == Fraction(3, 4)
    assert lower_bound_independent(20, 2, 2).value == Fraction(8, 9)
    boundary = lower_bound_independent(6, 2, 4)  # d + beta == n
    assert boundary.value == 0
    assert not boundary.regime_ok


def test_upper_bound_union_frozen_values():
    rep = upper_bound_union(6, 2, 1)
    assert rep.value == 1 and rep.regime_ok
    rep = upper_bound_union(20, 2, 2)
    assert rep.value == Fraction(17, 18) and rep.regime_ok  # 16 < 20
    rep = upper_bound_union(6, 2, 2)
    assert not rep.regime_ok  # 2*2*4 = 16 >= 6


def test_values_are_exact_fractions_at_zero_slack():
    for rep in (lower_bound_any(9, 3, 2), lower_bound_independent(9, 3, 2),
                upper_bound_sphere(9, 3, 2), upper_bound_union(9, 3, 2)):
        assert isinstance(rep.value, Fraction)


def test_values_degrade_to_float_only_with_eps2():
    assert isinstance(lower_bound_any(9, 3, 2, eps1=0.25).value, Fraction)
    assert isinstance(lower_bound_any(9, 3, 2, eps2=0.1).value, float)
    assert isinstance(lower_bound_independent(9, 3, 2, eps2=0.1).value, float)


def test_lower_never_exceeds_upper_across_sweep():
    for n in range(3, 31):
        for d in range(1, n):
            for beta in range(1, min(d, n - d) + 1):
                if beta * beta > n:
                    continue
                assert lower_bound_any(n, d, beta).value <= upper_bound_sphere(n, d, beta).value


def test_independent_lower_never_exceeds_union_upper_in_regime():
    for n in range(3, 31):
        for d in range(1, n):
            for beta in range(1, n - d):
                lo = lower_bound_independent(n, d, beta)
                up = upper_bound_union(n, d, beta)
                if lo.regime_ok and up.regime_ok:
                    assert lo.value <= up.value


def test_lower_bound_monotone_in_slacks():
    base = lower_bound_any(10, 3, 1).value
    for eps1 in (0.0, 0.1, 0.3):
        for eps2 in (0.0, 0.2, 0.5):
            shifted = lower_bound_any(10, 3, 1, eps1, eps2).value
            assert shifted <= base
    assert lower_bound_any(10, 3, 1, 0.2, 0).value > lower_bound_any(10, 3, 1, 0.3, 0).value
    assert lower_bound_any(10, 3, 1, 0, 0.2).value > lower_bound_any(10, 3, 1, 0, 0.3).value


def test_group_testing_aliases_are_bit_identical():
    for n, d, beta in [(6, 2, 1), (9, 3, 2), (20, 4, 2)]:
        assert gt_lower_bound(n, d, beta) == lower_bound_any(n, d, beta)
        assert gt_upper_bound(n, d, beta) == upper_bound_union(n, d, beta)
        assert gt_lower_bound(n, d, beta, 0.1, 0.2) == lower_bound_any(n, d, beta, 0.1, 0.2)


def test_bound_report_json():
    data = lower_bound_any(6, 2, 1).to_json()
    assert data["fraction"] == "1/4"
    assert data["value"] == 0.25
    assert data["regime_ok"] is True


def test_clipped_keeps_exactness():
    rep = BoundReport(Fraction(-1, 3), True, "")
    assert rep.clipped == 0
    assert isinstance(rep.clipped, Fraction)


def test_evaluate_all_handles_undefined_sphere_bound():
    reports = evaluate_all(6, 2, 3)
    assert reports["upper_sphere"] is None
    assert reports["upper_union"].value == Fraction(1, 2)


def test_invalid_parameters_error():
    with pytest.raises(ValueError):
        lower_bound_any(4, 4, 1)
    with pytest.raises(ValueError):
        lower_bound_independent(4, 0, 1)


def test_privacy_params_validation():
    PrivacyParams(6, 2, 1)
    with pytest.raises(ValueError):
        PrivacyParams(6, 6, 1)
    with pytest.raises(ValueError):
        PrivacyParams(6, 2, 0)
    with pytest.raises(ValueError):
        PrivacyParams(6, 2, 1, eps1=1.5)
    with pytest.raises(ValueError):
        PrivacyParams(6, 2, 1, eps2=-0.1)
    with pytest.raises(ValueError):
        PrivacyParams(6, 2, 1, delta=2.0)
