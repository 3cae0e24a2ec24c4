"""The stylization objective and its exact gradient.

The objective is ``alpha * content + beta * style + gamma * tv`` where

* ``content`` is the squared distance between the optimized series and the
  trend of the content series,
* ``style`` is the dimension-weighted squared distance between the stylized
  features of the optimized series and those of the style series,
* ``tv`` is the sum of squared first differences.

The gradient is derived by hand through every stage (affine rescale, log
returns, autocorrelation ratio, volatility square root, FFT of the series
autocorrelation, magnitude). Internally everything operates on a stack of
series (one per row) so that many independent stylizations can share one
pass of numpy calls; each row's arithmetic is independent of the others.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateSeries, LengthMismatch, NonPositiveValue, SeriesTooShort
from .features import (
    FeatureConfig,
    StyleFeatures,
    TrendConfig,
    _centered_acf,
    _rescale_rows,
    _spectrum_rows,
    extract_trend,
    style_features,
)
from .series import as_values


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 10.0
    gamma: float = 1e-4

    def __post_init__(self):
        w = (self.alpha, self.beta, self.gamma)
        if any(not np.isfinite(v) or v < 0 for v in w):
            raise ConfigError(f"loss weights must be finite and nonnegative, got {w}")
        if not any(w):
            raise ConfigError("at least one loss weight must be positive")


@dataclass(frozen=True, eq=False)
class LossContext:
    """Quantities that stay fixed while a series is being stylized."""

    content_trend: np.ndarray
    style_features: StyleFeatures
    weights: LossWeights = field(default_factory=LossWeights)
    feature_config: FeatureConfig = field(default_factory=FeatureConfig)

    @classmethod
    def build(
        cls,
        content,
        style,
        weights: LossWeights = LossWeights(),
        feature_config: FeatureConfig = FeatureConfig(),
        trend_config: TrendConfig = TrendConfig(),
    ) -> "LossContext":
        content = as_values(content)
        style = as_values(style)
        if content.size != style.size:
            raise LengthMismatch(f"content length {content.size} != style length {style.size}")
        return cls(
            content_trend=extract_trend(content, trend_config),
            style_features=style_features(style, feature_config),
            weights=weights,
            feature_config=feature_config,
        )


@dataclass(frozen=True)
class LossBreakdown:
    content: float
    style: float
    tv: float
    total: float


@dataclass(frozen=True, eq=False)
class BatchTargets:
    """Row-stacked fixed quantities for a batch of independent stylizations."""

    trend: np.ndarray  # (N, T)
    acf: np.ndarray  # (N, tau_max)
    volatility: np.ndarray  # (N,)
    mean_psd: np.ndarray  # (N,)

    @classmethod
    def from_contexts(cls, contexts) -> "BatchTargets":
        return cls(
            trend=np.stack([c.content_trend for c in contexts]),
            acf=np.stack([c.style_features.acf for c in contexts]),
            volatility=np.array([c.style_features.volatility for c in contexts]),
            mean_psd=np.array([c.style_features.mean_psd for c in contexts]),
        )

    def take(self, rows) -> "BatchTargets":
        return BatchTargets(self.trend[rows], self.acf[rows], self.volatility[rows], self.mean_psd[rows])


def _require_varying(x: np.ndarray, what: str) -> None:
    flat = np.ptp(x, axis=-1) == 0
    if np.any(flat):
        row = int(np.flatnonzero(flat)[0])
        raise DegenerateSeries(f"{what} is constant; stylized features are undefined", sample=row)


def _lag_mix(c: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Row-wise ``v[j] = sum_tau a[tau-1] * (c[j+tau] + c[j-tau])``, out-of-range terms dropped."""
    n = c.shape[-1]
    v = np.zeros_like(c)
    for lag in range(1, a.shape[-1] + 1):
        w = a[:, lag - 1 : lag]
        v[:, : n - lag] += w * c[:, lag:]
        v[:, lag:] += w * c[:, : n - lag]
    return v


def _acf_grad(c, ss, rho, upstream):
    """Pull ``upstream = dL/d rho[1..K]`` back onto the centered rows ``c``."""
    coef = (upstream * rho).sum(axis=-1)
    return (_lag_mix(c, upstream) - 2.0 * coef[:, None] * c) / ss[:, None]


def _style_rows(y: np.ndarray, tg: BatchTargets, fc: FeatureConfig, want_grad: bool):
    k = fc.tau_max
    n_obs = y.shape[-1]
    fc.check_length(n_obs)
    _require_varying(y, "series")

    # returns branch: autocorrelation and volatility
    if fc.return_kind == "simple":
        z = y
        r = np.diff(y, axis=-1)
    else:
        if fc.positivity_policy == "affine":
            z = _rescale_rows(y)
        else:
            if np.any(y <= 0):
                raise NonPositiveValue("log returns need positive values")
            z = y
        r = np.diff(np.log(z), axis=-1)
    _require_varying(r, "return series")
    n = r.shape[-1]
    c, rho_r = _centered_acf(r, k)
    ss = (c * c).sum(axis=-1)
    vol = np.sqrt(ss / (n - 1))

    # spectral branch, computed on the series itself
    lags = n_obs - 2
    cy, rho_y = _centered_acf(y, lags)
    spectrum = _spectrum_rows(rho_y)
    mpsd = np.abs(spectrum).mean(axis=-1)

    d_acf = rho_r[:, 1:] - tg.acf
    d_vol = vol - tg.volatility
    d_psd = mpsd - tg.mean_psd
    value = (d_acf * d_acf).sum(axis=-1) / k + d_vol**2 + d_psd**2
    if not want_grad:
        return value, None

    rows = np.arange(y.shape[0])
    g_c = _acf_grad(c, ss, rho_r[:, 1:], 2.0 * d_acf / k)
    g_c += (2.0 * d_vol / ((n - 1) * vol))[:, None] * c
    g_r = g_c - g_c.mean(axis=-1, keepdims=True)
    g_z = np.zeros_like(y)
    g_z[:, 1:] += g_r
    g_z[:, :-1] -= g_r
    if fc.return_kind == "simple":
        g_y = g_z
    else:
        g_z /= z
        g_y = g_z
        if fc.positivity_policy == "affine":
            # argmin/argmax are held fixed at the evaluation point
            lo, hi = np.argmin(y, axis=-1), np.argmax(y, axis=-1)
            span = y[rows, hi] - y[rows, lo]
            s = g_z.sum(axis=-1)
            p = (g_z * (z - 1.0)).sum(axis=-1)
            g_y = g_z / span[:, None]
            g_y[rows, lo] += (p - s) / span
            g_y[rows, hi] -= p / span

    # d mean|S| / d rho_y[tau] = (2/M) sum_f sign(S_f) cos(2 pi f tau / M)
    n_freq = spectrum.shape[-1]
    sign = np.sign(spectrum.real)
    dm = 2.0 * np.fft.fft(sign, axis=-1).real[:, 1 : lags + 1] / n_freq
    ssy = (cy * cy).sum(axis=-1)
    g_cy = _acf_grad(cy, ssy, rho_y[:, 1:], 2.0 * d_psd[:, None] * dm)
    g_y = g_y + (g_cy - g_cy.mean(axis=-1, keepdims=True))
    return value, g_y


def _weighted_total(c, s, tv, w: LossWeights):
    # zero-weighted terms are left out so an undefined (nan) style term
    # cannot leak into the total when beta == 0
    total = np.zeros_like(c)
    for weight, term in ((w.alpha, c), (w.beta, s), (w.gamma, tv)):
        if weight:
            total = total + weight * term
    return total


def batch_loss(y, tg: BatchTargets, w: LossWeights, fc: FeatureConfig, want_grad: bool = True):
    """Loss terms (and optionally gradients) for a ``(N, T)`` stack of series.

    Returns ``(content, style, tv, total, grad)`` with ``grad`` ``None`` when
    ``want_grad`` is false. With ``beta == 0`` degenerate rows are allowed and
    their style term is nan.
    """
    resid = y - tg.trend
    c = (resid * resid).sum(axis=-1)
    d = np.diff(y, axis=-1)
    tv = (d * d).sum(axis=-1)
    if w.beta:
        s, g_s = _style_rows(y, tg, fc, want_grad)
    else:
        s, g_s = _style_or_nan(y, tg, fc), None
    total = _weighted_total(c, s, tv, w)
    if not want_grad:
        return c, s, tv, total, None

    grad = (2.0 * w.alpha) * resid
    if w.gamma:
        g_tv = np.zeros_like(y)
        g_tv[:, 1:] += d
        g_tv[:, :-1] -= d
        grad += (2.0 * w.gamma) * g_tv
    if g_s is not None:
        grad += w.beta * g_s
    return c, s, tv, total, grad


def _style_or_nan(y, tg, fc):
    out = np.full(y.shape[0], np.nan)
    for i in range(y.shape[0]):
        try:
            out[i] = _style_rows(y[i : i + 1], tg.take(slice(i, i + 1)), fc, False)[0][0]
        except DegenerateSeries:
            pass
    return out


def _single(y, ctx: LossContext):
    y = as_values(y)
    if y.size != ctx.content_trend.size:
        raise LengthMismatch(f"series length {y.size} != content trend length {ctx.content_trend.size}")
    return y[None, :], BatchTargets.from_contexts([ctx])


def content_loss(y, ctx: LossContext) -> float:
    y, tg = _single(y, ctx)
    resid = y - tg.trend
    return float((resid * resid).sum(axis=-1)[0])


def style_loss(y, ctx: LossContext) -> float:
    y, tg = _single(y, ctx)
    return float(_style_rows(y, tg, ctx.feature_config, want_grad=False)[0][0])


def tv_loss(y) -> float:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 2:
        raise SeriesTooShort("total variation needs at least two values")
    d = np.diff(y)
    return float((d * d).sum())


def total_loss(y, ctx: LossContext) -> LossBreakdown:
    y, tg = _single(y, ctx)
    c, s, tv, total, _ = batch_loss(y, tg, ctx.weights, ctx.feature_config, want_grad=False)
    return LossBreakdown(float(c[0]), float(s[0]), float(tv[0]), float(total[0]))


def loss_and_gradient(y, ctx: LossContext) -> tuple[LossBreakdown, np.ndarray]:
    """Evaluate the objective and its gradient in a single pass."""
    y, tg = _single(y, ctx)
    c, s, tv, total, grad = batch_loss(y, tg, ctx.weights, ctx.feature_config)
    return LossBreakdown(float(c[0]), float(s[0]), float(tv[0]), float(total[0])), grad[0]


def loss_gradient(y, ctx: LossContext) -> np.ndarray:
    return loss_and_gradient(y, ctx)[1]


def finite_difference_gradient(ctx: LossContext, y, h: float = 1e-5) -> np.ndarray:
    """Central-difference estimate of the gradient of the total loss."""
    if not h > 0:
        raise ValueError("step h must be positive")
    y, tg = _single(y, ctx)
    y = y[0]
    # all 2T probes go through the objective as one stack
    eye = np.eye(y.size) * h
    probes = np.concatenate([y + eye, y - eye])
    stacked = BatchTargets(
        np.repeat(tg.trend, probes.shape[0], axis=0),
        np.repeat(tg.acf, probes.shape[0], axis=0),
        np.repeat(tg.volatility, probes.shape[0]),
        np.repeat(tg.mean_psd, probes.shape[0]),
    )
    total = batch_loss(probes, stacked, ctx.weights, ctx.feature_config, want_grad=False)[3]
    return (total[: y.size] - total[y.size :]) / (2.0 * h)
