"""Returns, trend and stylized-feature extraction.

All extractors are pure functions of their inputs. The style of a series is
summarised by three features: the autocorrelation of its returns over lags
``1..tau_max``, the volatility of its returns and the average of its sample
power spectral density.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    ConfigError,
    DegenerateSeries,
    LagTooLarge,
    NonPositiveValue,
    SeriesTooShort,
    WindowTooLarge,
)
from .series import as_values

RETURN_KINDS = ("log", "simple")
POSITIVITY_POLICIES = ("affine", "error")
EDGE_POLICIES = ("shrink", "reflect")


@dataclass(frozen=True)
class FeatureConfig:
    """Parameters of style extraction.

    ``positivity_policy="affine"`` maps every series onto ``[1, 2]`` before
    taking log returns (the map sends the minimum to 1 and the maximum to 2),
    so log returns are always defined. ``"error"`` takes logs of the raw
    values and rejects non-positive input. Simple returns ignore the policy.
    """

    tau_max: int = 10
    return_kind: str = "log"
    positivity_policy: str = "affine"

    def __post_init__(self):
        if int(self.tau_max) != self.tau_max or self.tau_max < 1:
            raise ConfigError(f"tau_max must be a positive integer, got {self.tau_max}")
        if self.return_kind not in RETURN_KINDS:
            raise ConfigError(f"return_kind must be one of {RETURN_KINDS}")
        if self.positivity_policy not in POSITIVITY_POLICIES:
            raise ConfigError(f"positivity_policy must be one of {POSITIVITY_POLICIES}")

    def check_length(self, n: int) -> None:
        if self.tau_max > n - 3:
            raise LagTooLarge(f"tau_max={self.tau_max} needs a series of length >= {self.tau_max + 3}, got {n}")


@dataclass(frozen=True)
class TrendConfig:
    window: int = 5
    edge_policy: str = "shrink"

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f"trend window must be an odd positive integer, got {self.window}")
        if self.edge_policy not in EDGE_POLICIES:
            raise ConfigError(f"edge_policy must be one of {EDGE_POLICIES}")


@dataclass(frozen=True, eq=False)
class StyleFeatures:
    acf: np.ndarray
    volatility: float
    mean_psd: float

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.acf.size, 1, 1)

    def __eq__(self, other):
        if not isinstance(other, StyleFeatures):
            return NotImplemented
        return (
            np.array_equal(self.acf, other.acf)
            and self.volatility == other.volatility
            and self.mean_psd == other.mean_psd
        )

    __hash__ = None


def _rescale_rows(y: np.ndarray) -> np.ndarray:
    lo = y.min(axis=-1, keepdims=True)
    hi = y.max(axis=-1, keepdims=True)
    if np.any(hi == lo):
        raise DegenerateSeries("constant series cannot be rescaled")
    return 1.0 + (y - lo) / (hi - lo)


def _lag_products(c: np.ndarray, max_lag: int) -> np.ndarray:
    """Row-wise ``sum_t c[t + lag] * c[t]`` for ``lag = 0..max_lag``."""
    n = c.shape[-1]
    out = np.empty(c.shape[:-1] + (max_lag + 1,))
    for lag in range(max_lag + 1):
        out[..., lag] = (c[..., lag:] * c[..., : n - lag]).sum(axis=-1)
    return out


def _centered_acf(x: np.ndarray, max_lag: int):
    """Centered rows and their autocorrelation at lags ``0..max_lag``.

    Works on the last axis; the caller is responsible for degeneracy checks.
    """
    c = x - x.mean(axis=-1, keepdims=True)
    prods = _lag_products(c, max_lag)
    return c, prods / prods[..., :1]


def _spectrum_rows(acf: np.ndarray) -> np.ndarray:
    two_sided = np.concatenate([acf, acf[..., :0:-1]], axis=-1)
    return np.fft.fft(two_sided, axis=-1)


def affine_rescale(y) -> np.ndarray:
    """Map ``y`` affinely so that its minimum is 1 and its maximum is 2."""
    return _rescale_rows(np.asarray(y, dtype=np.float64))


def compute_returns(series, config: FeatureConfig = FeatureConfig()) -> np.ndarray:
    """Returns of ``series`` (length ``T - 1``) according to ``config``."""
    y = as_values(series)
    if config.return_kind == "simple":
        return np.diff(y)
    if config.positivity_policy == "affine":
        y = _rescale_rows(y)
    elif np.any(y <= 0):
        idx = int(np.flatnonzero(y <= 0)[0])
        raise NonPositiveValue(f"log returns need positive values; y[{idx}] = {y[idx]}")
    return np.diff(np.log(y))


def autocorrelation(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelation of ``x`` at lags ``0..max_lag`` (lag 0 is 1)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if max_lag >= n - 1:
        raise LagTooLarge(f"lag {max_lag} too large for a sequence of length {n}")
    if np.ptp(x) == 0:
        raise DegenerateSeries("autocorrelation of a constant sequence is undefined")
    return _centered_acf(x, max_lag)[1]


def sample_acf(returns, tau_max: int) -> np.ndarray:
    """Autocorrelation of ``returns`` at lags ``1..tau_max``."""
    return autocorrelation(returns, tau_max)[1:]


def volatility(returns) -> float:
    r = np.asarray(returns, dtype=np.float64)
    if r.size < 2:
        raise SeriesTooShort("volatility needs at least two returns")
    if np.ptp(r) == 0:
        return 0.0
    c = r - r.mean(axis=-1, keepdims=True)
    return float(np.sqrt((c * c).sum(axis=-1) / (r.size - 1)))


def spectrum_from_acf(acf) -> np.ndarray:
    """Magnitude spectrum of the symmetric extension of a one-sided ACF.

    ``acf`` holds lags ``0..L``; the two-sided sequence ``-L..L`` is laid out
    circularly (lag 0 first) and transformed with an FFT of length ``2L + 1``.
    """
    return np.abs(_spectrum_rows(np.asarray(acf, dtype=np.float64)))


def psd(series) -> np.ndarray:
    """Sample power spectral density of the series itself.

    The autocorrelation of the raw values at lags ``0..T-2`` is transformed,
    giving ``2T - 3`` frequency bins.
    """
    y = as_values(series)
    return spectrum_from_acf(autocorrelation(y, y.size - 2))


def mean_psd(series) -> float:
    return float(psd(series).mean(axis=-1))


def extract_trend(series, config: TrendConfig = TrendConfig()) -> np.ndarray:
    """Centered moving average of width ``config.window``.

    With the ``shrink`` edge policy the window near either end is the widest
    symmetric window that fits; ``reflect`` mirrors the series instead.
    """
    y = as_values(series, min_length=1)
    w = config.window
    n = y.size
    if w > n:
        raise WindowTooLarge(f"trend window {w} exceeds series length {n}")
    half = w // 2
    if half == 0:
        return y.copy()
    if config.edge_policy == "reflect":
        padded = np.pad(y, half, mode="reflect")
        return sliding_window_view(padded, w).mean(axis=1)
    out = np.empty(n)
    out[half : n - half] = sliding_window_view(y, w).mean(axis=1)
    for t in range(half):
        out[t] = y[: 2 * t + 1].mean()
        out[n - 1 - t] = y[n - 1 - 2 * t :].mean()
    return out


def style_features(series, config: FeatureConfig = FeatureConfig()) -> StyleFeatures:
    y = as_values(series)
    config.check_length(y.size)
    r = compute_returns(y, config)
    return StyleFeatures(
        acf=sample_acf(r, config.tau_max),
        volatility=volatility(r),
        mean_psd=mean_psd(y),
    )
