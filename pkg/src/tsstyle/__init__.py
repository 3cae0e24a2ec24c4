"""Synthetic time series by style transfer.

A stylized series follows the trend of a *content* series while matching the
returns autocorrelation, volatility and mean spectral density of a *style*
series. The toolkit covers feature extraction, the objective and its
gradient, an RMSprop optimizer, dataset generation and quality metrics.
"""
from .errors import TsStyleError
from .features import FeatureConfig, StyleFeatures, TrendConfig, extract_trend, style_features
from .losses import LossContext, LossWeights, loss_and_gradient, total_loss
from .optimizer import OptimizerConfig, StylizationResult, stylize, stylize_batch
from .series import Series

__version__ = "0.1.0"

__all__ = [
    "FeatureConfig",
    "LossContext",
    "LossWeights",
    "OptimizerConfig",
    "Series",
    "StyleFeatures",
    "StylizationResult",
    "TrendConfig",
    "TsStyleError",
    "extract_trend",
    "loss_and_gradient",
    "style_features",
    "stylize",
    "stylize_batch",
    "total_loss",
]
