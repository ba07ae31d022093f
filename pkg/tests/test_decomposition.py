import numpy as np
import pytest
from numpy.testing import assert_allclose

from descent_lab.decomposition import (
    GroundTruth,
    decompose_test_error,
    decompose_test_errors,
    make_ground_truth,
    smallest_nonzero_singular_value,
)
from descent_lab.errors import EmptySpectrumError, RegimeMismatchError
from descent_lab.estimators import REGIME_INTERP, REGIME_OVER, fit_pinv, regime_of
from descent_lab.linalg import svd


def test_identity_training_matrix_by_hand():
    # X = I2, beta* = (1, 0), residuals E = (0, 1).  Both sigmas are 1, so the
    # variance at x = (1, 1) is (x.v1)(u1.E) + (x.v2)(u2.E) = 0 + 1 = 1 and
    # the bias vanishes because the row space is all of R^2.
    s = svd(np.eye(2))
    gt = GroundTruth(beta_star=np.array([1.0, 0.0]), residuals=np.array([0.0, 1.0]))
    dec = decompose_test_error([1.0, 1.0], s, gt, REGIME_INTERP)
    assert dec.bias_term == 0.0
    assert_allclose([m.contribution for m in dec.modes], [0.0, 1.0], atol=1e-15)
    assert_allclose(dec.variance_term, 1.0)
    assert_allclose(dec.predicted_error, 1.0)


def test_unseen_direction_shows_up_as_bias():
    # X = [[1, 0]] never sees the second coordinate.  With beta* = (0, 1) and
    # no residual, a test point along that blind direction is pure bias.
    s = svd(np.array([[1.0, 0.0]]))
    gt = GroundTruth(beta_star=np.array([0.0, 1.0]), residuals=np.array([0.0]))
    dec = decompose_test_error([0.0, 1.0], s, gt, REGIME_OVER)
    assert_allclose(dec.bias_term, -1.0)
    assert_allclose(dec.variance_term, 0.0, atol=1e-15)


def test_noiseless_data_has_zero_variance_term():
    rng = np.random.default_rng(20)
    x_full = rng.standard_normal((40, 6))
    beta = rng.standard_normal(6)
    y_full = x_full @ beta
    x_tr, y_tr = x_full[:10], y_full[:10]
    gt = make_ground_truth(x_full, y_full, x_tr, y_tr)
    s = svd(x_tr)
    dec = decompose_test_error(rng.standard_normal(6), s, gt, regime_of(10, 6))
    assert abs(dec.variance_term) <= 1e-8
    assert all(abs(m.u_dot_E) <= 1e-8 for m in dec.modes)


def test_make_ground_truth_noiseless():
    rng = np.random.default_rng(21)
    x = rng.standard_normal((30, 5))
    beta = rng.standard_normal(5)
    gt = make_ground_truth(x, x @ beta, x[:8], (x @ beta)[:8])
    assert_allclose(gt.beta_star, beta, atol=1e-9)
    assert np.abs(gt.residuals).max() <= 1e-9


def test_make_ground_truth_orthogonal_noise_lands_in_residuals():
    # noise orthogonal to the column space cannot change the fitted beta*, so
    # the residuals must reproduce it exactly on the training rows
    rng = np.random.default_rng(22)
    x = rng.standard_normal((12, 3))
    beta = rng.standard_normal(3)
    clean = x @ beta
    noise = rng.standard_normal(12)
    q, _ = np.linalg.qr(x)
    noise -= q @ (q.T @ noise)  # strip the column-space component
    y = clean + noise
    gt = make_ground_truth(x, y, x, y)
    assert_allclose(gt.beta_star, beta, atol=1e-9)
    assert_allclose(gt.residuals, noise, atol=1e-9)


def test_make_ground_truth_scalar_example():
    gt = make_ground_truth([[2.0]], [6.0], [[2.0]], [6.0])
    assert_allclose(gt.beta_star, [3.0])
    assert_allclose(gt.residuals, [0.0], atol=1e-15)


def test_variance_is_the_sum_of_mode_contributions():
    rng = np.random.default_rng(23)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        d = int(rng.integers(1, 12))
        x_full = rng.standard_normal((n + 20, d))
        y_full = x_full @ rng.standard_normal(d) + 0.3 * rng.standard_normal(n + 20)
        gt = make_ground_truth(x_full, y_full, x_full[:n], y_full[:n])
        s = svd(x_full[:n])
        dec = decompose_test_error(rng.standard_normal(d), s, gt, regime_of(n, d))
        total = sum(m.contribution for m in dec.modes)
        assert abs(dec.variance_term - total) <= 1e-12 * max(1.0, abs(total))
        assert abs(dec.predicted_error - (dec.bias_term + dec.variance_term)) <= 1e-12


def test_decomposition_matches_estimator_error_directly():
    rng = np.random.default_rng(24)
    x_full = rng.standard_normal((50, 8))
    y_full = x_full @ rng.standard_normal(8) + 0.2 * rng.standard_normal(50)
    x_tr, y_tr = x_full[:6], y_full[:6]
    gt = make_ground_truth(x_full, y_full, x_tr, y_tr)
    s = svd(x_tr)
    beta_hat = fit_pinv(x_tr, y_tr).beta
    for i in range(40, 50):
        xt = x_full[i]
        dec = decompose_test_error(xt, s, gt, regime_of(6, 8))
        observed = float(xt @ beta_hat - xt @ gt.beta_star)
        assert abs(dec.predicted_error - observed) <= 1e-8 * max(1.0, abs(observed))


def test_regime_mismatch_is_rejected():
    s = svd(np.ones((2, 3)))
    gt = GroundTruth(beta_star=np.zeros(3), residuals=np.zeros(2))
    with pytest.raises(RegimeMismatchError):
        decompose_test_error([1.0, 0.0, 0.0], s, gt, REGIME_INTERP)


def test_halving_a_singular_value_doubles_its_contribution():
    rng = np.random.default_rng(25)
    x = rng.standard_normal((5, 9))
    s = svd(x)
    gt = GroundTruth(beta_star=rng.standard_normal(9), residuals=rng.standard_normal(5))
    xt = rng.standard_normal(9)
    base = decompose_test_error(xt, s, gt, REGIME_OVER)

    shrunk = s.singular_values.copy()
    shrunk[-1] *= 0.5
    x2 = (s.u_cols * shrunk) @ s.v_cols.T
    dec2 = decompose_test_error(xt, svd(x2), gt, REGIME_OVER)
    assert_allclose(
        dec2.modes[-1].contribution, 2.0 * base.modes[-1].contribution, rtol=1e-6
    )
    # the other two factors are properties of the subspaces, not the sigmas
    assert_allclose(dec2.modes[-1].xtest_dot_v, base.modes[-1].xtest_dot_v, atol=1e-8)
    assert_allclose(dec2.modes[-1].u_dot_E, base.modes[-1].u_dot_E, atol=1e-8)


def test_smallest_nonzero_singular_value():
    assert smallest_nonzero_singular_value(svd(np.diag([2.0, 1.0, 0.1]))) == pytest.approx(0.1)
    assert smallest_nonzero_singular_value(svd(np.array([[5.0]]))) == 5.0
    with pytest.raises(EmptySpectrumError):
        smallest_nonzero_singular_value(svd(np.zeros((2, 2))))


def test_smallest_singular_value_against_characteristic_polynomial():
    # For a 2x2 Gram matrix the eigenvalues solve a quadratic.  Two stability
    # details make this a trustworthy independent reference for a nearly
    # singular matrix: det(G) is formed as (ad - bc)^2 on the original
    # entries (the float subtraction 1 + 1e-6 - 1 is exact), and lambda_min
    # comes out as det / lambda_max rather than the cancellation-prone
    # (tr - sqrt(disc)) / 2.
    x = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-6]])
    det = (x[0, 0] * x[1, 1] - x[0, 1] * x[1, 0]) ** 2
    tr = np.trace(x.T @ x)
    lam_max = (tr + np.sqrt(tr * tr - 4 * det)) / 2
    expected = np.sqrt(det / lam_max)
    got = smallest_nonzero_singular_value(svd(x))
    assert_allclose(got, expected, rtol=1e-6)


def test_batch_decomposition_matches_scalar():
    rng = np.random.default_rng(26)
    x_full = rng.standard_normal((60, 7))
    y_full = x_full @ rng.standard_normal(7) + 0.25 * rng.standard_normal(60)
    for n in (4, 7, 20):
        x_tr, y_tr = x_full[:n], y_full[:n]
        gt = make_ground_truth(x_full, y_full, x_tr, y_tr)
        s = svd(x_tr)
        regime = regime_of(n, 7)
        tests = x_full[40:]
        bias, var, pred = decompose_test_errors(tests, s, gt, regime)
        for i, xt in enumerate(tests):
            dec = decompose_test_error(xt, s, gt, regime)
            assert_allclose(bias[i], dec.bias_term, atol=1e-12)
            assert_allclose(var[i], dec.variance_term, rtol=1e-9, atol=1e-12)
            assert_allclose(pred[i], dec.predicted_error, rtol=1e-9, atol=1e-12)


def test_ill_conditioned_polynomial_instance_still_balances():
    # Legendre features near the interpolation threshold produce spectra with
    # condition numbers around 1e9; the internal crosscheck has to tolerate
    # the float drift of two algebraically identical routes at that scale.
    from descent_lab.data import legendre_features, make_polynomial_dataset, polynomial_target

    ds = make_polynomial_dataset(46, 46, 0.5, seed=8)
    xs = np.linspace(-1.0, 1.0, 1000)
    dense_x = np.array([legendre_features(x, 46) for x in xs])
    dense_y = polynomial_target(xs)
    gt = make_ground_truth(
        np.vstack([ds.X, dense_x]),
        np.concatenate([ds.Y, dense_y]),
        ds.X,
        ds.Y,
    )
    s = svd(ds.X)
    bias, var, pred = decompose_test_errors(dense_x[:50], s, gt, regime_of(46, 46))
    assert np.isfinite(pred).all()
