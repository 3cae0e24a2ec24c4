import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsstyle.errors import ConfigError, DegenerateSeries, LengthMismatch, SeriesTooShort
from tsstyle.features import FeatureConfig, StyleFeatures, extract_trend, style_features
from tsstyle.losses import (
    LossContext,
    LossWeights,
    content_loss,
    finite_difference_gradient,
    loss_and_gradient,
    loss_gradient,
    style_loss,
    total_loss,
    tv_loss,
)


def rel_err(g, fd):
    return np.max(np.abs(g - fd)) / max(np.max(np.abs(g)), 1e-8)


def make_ctx(seed, n=31, weights=LossWeights(), fc=FeatureConfig()):
    rng = np.random.default_rng(seed)
    c = np.cumsum(rng.normal(size=n))
    s = np.cumsum(rng.normal(size=n))
    y = c + 0.3 * rng.normal(size=n)
    return LossContext.build(c, s, weights, fc), y, s


def test_weights_validation():
    with pytest.raises(ConfigError):
        LossWeights(0, 0, 0)
    with pytest.raises(ConfigError):
        LossWeights(-1, 1, 1)


def test_content_loss_examples():
    ctx, y, _ = make_ctx(0, n=30)
    assert content_loss(ctx.content_trend, ctx) == 0.0
    assert content_loss(ctx.content_trend + 1.0, ctx) == pytest.approx(30.0, rel=1e-15)
    want = sum((a - b) ** 2 for a, b in zip(y, ctx.content_trend))
    assert content_loss(y, ctx) == pytest.approx(want, rel=1e-12)
    with pytest.raises(LengthMismatch):
        content_loss(y[:-1], ctx)


def test_style_loss_zero_at_style_series():
    ctx, _, s = make_ctx(1)
    assert style_loss(s, ctx) == 0.0


def test_style_loss_volatility_only_difference():
    ctx, y, _ = make_ctx(2)
    f = style_features(y)
    delta = 0.37
    shifted = StyleFeatures(f.acf, f.volatility + delta, f.mean_psd)
    ctx2 = LossContext(ctx.content_trend, shifted, ctx.weights, ctx.feature_config)
    assert style_loss(y, ctx2) == pytest.approx(delta**2, rel=1e-12)


def test_style_loss_matches_feature_distance():
    ctx, y, s = make_ctx(3)
    fy, fs = style_features(y), style_features(s)
    want = (
        sum((a - b) ** 2 for a, b in zip(fy.acf, fs.acf)) / 10
        + (fy.volatility - fs.volatility) ** 2
        + (fy.mean_psd - fs.mean_psd) ** 2
    )
    assert style_loss(y, ctx) == pytest.approx(want, rel=1e-12)


def test_style_loss_rejects_constant():
    ctx, _, _ = make_ctx(4)
    with pytest.raises(DegenerateSeries):
        style_loss(np.full(31, 1.5), ctx)


def test_tv_examples():
    assert tv_loss(np.full(5, 3.0)) == 0.0
    assert tv_loss([1.0, 2.0, 4.0]) == 5.0
    assert tv_loss(np.arange(17.0)) == 16.0
    with pytest.raises(SeriesTooShort):
        tv_loss([1.0])


def test_total_with_single_weights():
    ctx, y, s = make_ctx(5, weights=LossWeights(1, 0, 0))
    b = total_loss(y, ctx)
    assert b.total == b.content
    ctx0 = LossContext.build(y, s, LossWeights(0, 0, 1))
    const = np.full(31, 2.0)
    assert total_loss(const, ctx0).total == 0.0


def test_total_is_weighted_recombination():
    ctx, y, _ = make_ctx(6)
    b = total_loss(y, ctx)
    assert b.content == content_loss(y, ctx)
    assert b.style == style_loss(y, ctx)
    assert b.tv == tv_loss(y)
    assert b.total == pytest.approx(b.content + 10 * b.style + 1e-4 * b.tv, rel=1e-15)


def test_gradient_of_content_only():
    ctx, y, _ = make_ctx(7, weights=LossWeights(1, 0, 0))
    np.testing.assert_array_equal(loss_gradient(y, ctx), 2 * (y - ctx.content_trend))


def test_gradient_of_tv_at_constant():
    _, _, s = make_ctx(8)
    ctx = LossContext.build(s, s, LossWeights(0, 0, 1))
    const = np.full(31, 0.7)
    assert not np.any(loss_gradient(const, ctx))
    assert np.max(np.abs(finite_difference_gradient(ctx, const))) < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    ctx, y, _ = make_ctx(seed)
    assert rel_err(loss_gradient(y, ctx), finite_difference_gradient(ctx, y)) < 1e-4


@pytest.mark.parametrize("fc", [FeatureConfig(return_kind="simple"), FeatureConfig(positivity_policy="error")])
def test_gradient_other_return_configs(fc):
    rng = np.random.default_rng(9)
    c = 5 + np.cumsum(0.1 * rng.normal(size=31))
    s = 5 + np.cumsum(0.1 * rng.normal(size=31))
    y = c + 0.05 * rng.normal(size=31)
    ctx = LossContext.build(c, s, LossWeights(), fc)
    assert rel_err(loss_gradient(y, ctx), finite_difference_gradient(ctx, y)) < 1e-4


def test_quadratic_fd_is_accurate_and_second_order():
    ctx, y, _ = make_ctx(10, weights=LossWeights(1, 0, 0))
    g = loss_gradient(y, ctx)
    assert np.max(np.abs(finite_difference_gradient(ctx, y, 1e-5) - g)) < 1e-7
    # smooth nonquadratic loss: halving h roughly quarters the error
    ctx, y, _ = make_ctx(11, n=20)
    g = loss_gradient(y, ctx)
    e1 = np.max(np.abs(finite_difference_gradient(ctx, y, 2e-3) - g))
    e2 = np.max(np.abs(finite_difference_gradient(ctx, y, 1e-3) - g))
    assert 2.5 < e1 / e2 < 6


def test_loss_and_gradient_agree():
    ctx, y, _ = make_ctx(12)
    b, g = loss_and_gradient(y, ctx)
    assert b == total_loss(y, ctx)
    np.testing.assert_array_equal(g, loss_gradient(y, ctx))


def test_context_uses_trend():
    ctx, _, _ = make_ctx(13)
    rng = np.random.default_rng(13)
    np.testing.assert_array_equal(ctx.content_trend, extract_trend(np.cumsum(rng.normal(size=31))))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_scaling_behaviour(seed, c):
    ctx, y, s = make_ctx(seed)
    y, s = y + 20, s + 20  # keep the raw-log policy usable
    fc = FeatureConfig(positivity_policy="error")
    base = LossContext.build(ctx.content_trend + 20, s, LossWeights(), fc)
    scaled = LossContext.build((ctx.content_trend + 20) * c, s * c, LossWeights(), fc)
    fy, fyc = style_features(y, fc), style_features(y * c, fc)
    np.testing.assert_allclose(fyc.acf, fy.acf, atol=1e-9)
    assert fyc.volatility == pytest.approx(fy.volatility, rel=1e-8)
    assert total_loss(y * c, scaled).tv == pytest.approx(c * c * total_loss(y, base).tv, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_terms_nonnegative(seed):
    ctx, y, _ = make_ctx(seed)
    b = total_loss(y, ctx)
    assert b.content >= 0 and b.style >= 0 and b.tv >= 0
    assert math.isclose(b.total, b.content + 10 * b.style + 1e-4 * b.tv, rel_tol=1e-14)
