import numpy as np
import pytest

from protoneuro import qsar
from protoneuro.errors import ParseError, RankDeficiencyError, ValidationError
from protoneuro.qsar import (
    REFERENCE_COEFFICIENTS,
    REFERENCE_RATES,
    QsarCoefficients,
    QsarObservation,
    SamplePredictors,
)

ZERO = QsarCoefficients(*([0.0] * 9))


def make_observations(coeffs, x, y, rates=None):
    if rates is None:
        rates = qsar.predict(coeffs, np.asarray(x), np.asarray(y))
    return [QsarObservation(SamplePredictors(f"s{i}", float(xi), float(yi)), float(ri))
            for i, (xi, yi, ri) in enumerate(zip(x, y, rates))]


def full_rank_points(n, seed=0):
    # retry until the (unit-norm column) design is numerically full rank;
    # small n with repeated integer y values can land on a deficient set
    for attempt in range(50):
        rng = np.random.default_rng(seed + 1000 * attempt)
        x = rng.uniform(100.0, 700.0, n)
        y = rng.integers(1, 9, n).astype(float)
        design = qsar.design_matrix(x, y)
        scaled = design / np.linalg.norm(design, axis=0)
        if np.linalg.matrix_rank(scaled) == 9 and np.linalg.cond(scaled) < 1e6:
            return x, y
    raise AssertionError(f"no full-rank design found for n={n}, seed={seed}")


def test_predict_at_origin_returns_intercept_exactly():
    assert qsar.predict(REFERENCE_COEFFICIENTS, 0.0, 0.0) == 2349.0


def test_predict_zero_coefficients():
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert qsar.predict(ZERO, rng.uniform(0, 1000), rng.uniform(1, 10)) == 0.0


def test_predict_term_by_term_oracle():
    # frozen from exact rational arithmetic over the term sums at (100, 3)
    assert qsar.predict(REFERENCE_COEFFICIENTS, 100.0, 3.0) == pytest.approx(3285.1, rel=1e-12)


def test_predict_is_linear_in_coefficients():
    rng = np.random.default_rng(1)
    c1 = QsarCoefficients.from_array(rng.standard_normal(9))
    c2 = QsarCoefficients.from_array(rng.standard_normal(9))
    a, b = 2.5, -1.25
    combo = QsarCoefficients.from_array(a * c1.as_array() + b * c2.as_array())
    for _ in range(5):
        x, y = rng.uniform(0, 500), rng.uniform(1, 8)
        lhs = qsar.predict(combo, x, y)
        rhs = a * qsar.predict(c1, x, y) + b * qsar.predict(c2, x, y)
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_predict_rejects_nonfinite():
    with pytest.raises(ValidationError):
        qsar.predict(REFERENCE_COEFFICIENTS, np.inf, 1.0)


def test_fit_round_trips_nine_exact_points():
    x = np.array([120.0, 260.0, 395.0, 540.0, 685.0, 180.0, 320.0, 465.0, 610.0])
    y = np.array([1.0, 2.0, 3.0, 4.0, 1.0, 3.0, 4.0, 2.0, 5.0])
    assert np.linalg.matrix_rank(qsar.design_matrix(x, y)) == 9
    obs = make_observations(REFERENCE_COEFFICIENTS, x, y)
    result = qsar.fit(obs)
    np.testing.assert_allclose(result.coefficients.as_array(),
                               REFERENCE_COEFFICIENTS.as_array(), rtol=1e-6)


def test_fit_round_trips_twenty_noiseless_points():
    x, y = full_rank_points(20, seed=3)
    result = qsar.fit(make_observations(REFERENCE_COEFFICIENTS, x, y))
    np.testing.assert_allclose(result.coefficients.as_array(),
                               REFERENCE_COEFFICIENTS.as_array(), rtol=1e-6)
    assert result.residual_sum_squares < 1e-10


def test_fit_round_trips_random_coefficients():
    rng = np.random.default_rng(4)
    for trial in range(10):
        truth = QsarCoefficients.from_array(rng.standard_normal(9) * 10)
        x, y = full_rank_points(int(rng.integers(9, 40)), seed=100 + trial)
        result = qsar.fit(make_observations(truth, x, y))
        np.testing.assert_allclose(result.coefficients.as_array(), truth.as_array(),
                                   rtol=1e-6, atol=1e-9)


def test_fit_residuals_orthogonal_to_basis():
    rng = np.random.default_rng(5)
    x, y = full_rank_points(30, seed=6)
    rates = qsar.predict(REFERENCE_COEFFICIENTS, x, y) + rng.standard_normal(30) * 25
    result = qsar.fit(make_observations(None, x, y, rates))
    design = qsar.design_matrix(x, y)
    residuals = rates - design @ result.coefficients.as_array()
    for j in range(9):
        col = design[:, j]
        inner = abs(residuals @ col)
        assert inner < 1e-6 * np.linalg.norm(residuals) * np.linalg.norm(col) + 1e-9


def test_fit_rejects_too_few_observations():
    x, y = full_rank_points(20, seed=7)
    obs = make_observations(REFERENCE_COEFFICIENTS, x, y)
    with pytest.raises(ValidationError, match="9"):
        qsar.fit(obs[:8])


def test_fit_identical_y_is_rank_deficient():
    x = np.linspace(100, 800, 9)
    y = np.full(9, 3.0)
    obs = make_observations(REFERENCE_COEFFICIENTS, x, y)
    with pytest.raises(RankDeficiencyError) as err:
        qsar.fit(obs)
    assert len(err.value.columns) == 6  # only three independent directions remain


def test_confidence_bounds_noiseless_are_tight_and_centred():
    x, y = full_rank_points(20, seed=8)
    obs = make_observations(REFERENCE_COEFFICIENTS, x, y)
    result = qsar.fit(obs)
    bounds = qsar.confidence_bounds(result, obs)
    values = result.coefficients.as_array()
    for j, name in enumerate(qsar.COEFFICIENT_NAMES):
        lo, hi = bounds[name]
        assert hi - lo < 1e-6
        assert (lo + hi) / 2 == pytest.approx(values[j], abs=1e-9)
        assert lo <= values[j] <= hi


def test_confidence_bounds_require_extra_observations():
    x = np.array([120.0, 260.0, 395.0, 540.0, 685.0, 180.0, 320.0, 465.0, 610.0])
    y = np.array([1.0, 2.0, 3.0, 4.0, 1.0, 3.0, 4.0, 2.0, 5.0])
    obs = make_observations(REFERENCE_COEFFICIENTS, x, y)
    result = qsar.fit(obs)
    with pytest.raises(ValidationError, match="more than 9"):
        qsar.confidence_bounds(result, obs)


def test_confidence_coverage_monte_carlo():
    # reduced-size version of the acceptance check
    truth = REFERENCE_COEFFICIENTS
    x, y = full_rank_points(30, seed=9)
    rng = np.random.default_rng(10)
    clean = qsar.predict(truth, x, y)
    hits = np.zeros(9)
    reps = 150
    for _ in range(reps):
        rates = clean + rng.standard_normal(30) * 40.0
        obs = make_observations(None, x, y, rates)
        bounds = qsar.confidence_bounds(qsar.fit(obs), obs)
        for j, name in enumerate(qsar.COEFFICIENT_NAMES):
            lo, hi = bounds[name]
            hits[j] += lo <= truth.as_array()[j] <= hi
    coverage = hits / reps
    assert np.all(coverage >= 0.88) and np.all(coverage <= 1.0)


def test_percent_deviation_reference_rows():
    by_label = {label: (mean, pred) for label, mean, pred in REFERENCE_RATES}
    mean, pred = by_label["L-Glu:L-Asp"]
    assert qsar.percent_deviation(mean, pred) == pytest.approx(0.1058, abs=1e-3)
    mean, pred = by_label["L-Glu:L-Arg"]
    assert qsar.percent_deviation(mean, pred) == pytest.approx(-378.57, abs=0.01)


def test_percent_deviation_sign_and_zero():
    assert qsar.percent_deviation(10.0, 10.0) == 0.0
    assert qsar.percent_deviation(10.0, 11.0) > 0
    assert qsar.percent_deviation(10.0, 9.0) < 0
    with pytest.raises(ValidationError):
        qsar.percent_deviation(0.0, 1.0)


def test_reference_bounds_contain_values():
    c = REFERENCE_COEFFICIENTS
    for name in qsar.COEFFICIENT_NAMES:
        lo, hi = c.bounds[name]
        assert lo <= getattr(c, name) <= hi


def test_coefficients_validation():
    with pytest.raises(ValidationError):
        QsarCoefficients.from_array(np.array([np.nan] + [0.0] * 8))
    with pytest.raises(ValidationError):
        QsarCoefficients(*([1.0] * 9), bounds={"p00": (2.0, 3.0)})
    with pytest.raises(ValidationError):
        QsarCoefficients(*([1.0] * 9), bounds={"p99": (0.0, 2.0)})


def test_observation_csv_round_trip(tmp_path):
    path = tmp_path / "obs.csv"
    path.write_text(
        "label,molecular_weight_gmol,peptide_length,mean_firing_rate_hz\n"
        "a,147.13,2,535.4877\n"
        "b,262.26,3,436.2721\n"
    )
    obs = qsar.read_observations_csv(path)
    assert len(obs) == 2
    assert obs[0].predictors.label == "a"
    assert obs[0].predictors.molecular_weight == 147.13
    assert obs[1].mean_firing_rate == 436.2721
    path.write_text("label,x,y,rate\na,1,1,1\n")
    with pytest.raises(ParseError, match="line 1"):
        qsar.read_observations_csv(path)
    path.write_text(
        "label,molecular_weight_gmol,peptide_length,mean_firing_rate_hz\na,-5,1,1\n")
    with pytest.raises(ParseError, match="line 2"):
        qsar.read_observations_csv(path)


def test_model_json_round_trip(tmp_path):
    path = tmp_path / "model.json"
    qsar.write_model_json(REFERENCE_COEFFICIENTS, path, residual_sum_squares=1.25)
    back = qsar.read_model_json(path)
    np.testing.assert_array_equal(back.as_array(), REFERENCE_COEFFICIENTS.as_array())
    assert back.bounds["p03"] == REFERENCE_COEFFICIENTS.bounds["p03"]
