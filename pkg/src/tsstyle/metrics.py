"""Quality of a synthetic window dataset relative to real windows.

Windows are compared as flat vectors under Euclidean distance. Nearest
neighbor ties go to the lowest index.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .datagen import WindowDataset, require_nonempty, require_same_length
from .errors import ConfigError, EmptyDataset, KTooLarge, LengthMismatch, SingularSystem


@dataclass(frozen=True)
class PrMetricConfig:
    k: int = 5

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k}")


def _windows(ds) -> np.ndarray:
    return ds.windows if isinstance(ds, WindowDataset) else np.atleast_2d(np.asarray(ds, dtype=np.float64))


def _check_pair(real, synth):
    a, b = _windows(real), _windows(synth)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyDataset("both datasets must be non-empty")
    if a.shape[1] != b.shape[1]:
        raise LengthMismatch(f"window lengths differ: {a.shape[1]} and {b.shape[1]}")
    return a, b


def knn_radii(x: np.ndarray, k: int) -> np.ndarray:
    """Distance from each row to its ``k``-th nearest other row."""
    if k >= x.shape[0]:
        raise KTooLarge(f"k={k} needs more than {k} points, got {x.shape[0]}")
    d = cdist(x, x)
    np.fill_diagonal(d, np.inf)
    return np.partition(d, k - 1, axis=1)[:, k - 1]


def _coverage(ref: np.ndarray, query: np.ndarray, k: int) -> float:
    """Fraction of ``query`` rows inside at least one ``ref`` k-NN ball."""
    radii = knn_radii(ref, k)
    inside = cdist(query, ref) <= radii[None, :]
    return float(inside.any(axis=1).mean())


def precision_recall(real_ds, synth_ds, cfg: PrMetricConfig = PrMetricConfig()) -> tuple[float, float]:
    """k-NN manifold coverage: precision is the share of synthetic windows
    inside the real manifold, recall the share of real windows inside the
    synthetic one. Points on a ball's boundary count as inside."""
    real, synth = _check_pair(real_ds, synth_ds)
    return _coverage(real, synth, cfg.k), _coverage(synth, real, cfg.k)


def f_score(precision: float, recall: float) -> float:
    for v in (precision, recall):
        if not 0 <= v <= 1:
            raise ConfigError(f"precision and recall must lie in [0, 1], got {v}")
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def authenticity(real_ds, synth_ds) -> float:
    """Share of synthetic windows that are not near-copies of a real window.

    A synthetic window is a copy when it is strictly closer to its nearest
    real window than that window is to its own nearest real neighbor.
    """
    real, synth = _check_pair(real_ds, synth_ds)
    if real.shape[0] < 2:
        raise EmptyDataset("authenticity needs at least two real windows")
    d_rr = cdist(real, real)
    np.fill_diagonal(d_rr, np.inf)
    gap = d_rr.min(axis=1)
    d_sr = cdist(synth, real)
    nearest = d_sr.argmin(axis=1)
    copies = d_sr[np.arange(synth.shape[0]), nearest] < gap[nearest]
    return float(1.0 - copies.mean())


# -------------------------------------------------------------- forecasting


@dataclass(frozen=True, eq=False)
class ForecasterModel:
    """Linear predictor of a window's last value from its first ``W`` values.

    ``coefficients`` holds the ``W`` lag weights followed by the intercept.
    """

    coefficients: np.ndarray
    ridge: float = 1e-6

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64)
        if c.ndim != 1 or c.size < 2 or not np.all(np.isfinite(c)):
            raise ConfigError("coefficients must be a finite vector of length W + 1")
        object.__setattr__(self, "coefficients", c)

    @property
    def weights(self) -> np.ndarray:
        return self.coefficients[:-1]

    @property
    def intercept(self) -> float:
        return float(self.coefficients[-1])

    def predict(self, windows) -> np.ndarray:
        x = _windows(windows)
        if x.shape[1] != self.coefficients.size:
            raise LengthMismatch(f"model expects windows of length {self.coefficients.size}, got {x.shape[1]}")
        return x[:, :-1] @ self.weights + self.intercept


def fit_forecaster(train, ridge: float = 1e-6) -> ForecasterModel:
    """Ridge regression via centered normal equations (intercept unpenalized)."""
    if not ridge >= 0:
        raise ConfigError("ridge must be nonnegative")
    data = _windows(train)
    if data.shape[0] == 0:
        raise EmptyDataset("cannot fit on an empty dataset")
    x, y = data[:, :-1], data[:, -1]
    x_mean, y_mean = x.mean(axis=0), y.mean()
    xc, yc = x - x_mean, y - y_mean
    gram = xc.T @ xc + ridge * np.eye(x.shape[1])
    try:
        w = np.linalg.solve(gram, xc.T @ yc)
    except np.linalg.LinAlgError:
        raise SingularSystem("normal equations are singular; use a positive ridge") from None
    if not np.all(np.isfinite(w)):
        raise SingularSystem("normal equations are singular; use a positive ridge")
    return ForecasterModel(np.append(w, y_mean - x_mean @ w), ridge)


def forecast_mae(model: ForecasterModel, eval_ds) -> float:
    data = _windows(eval_ds)
    if data.shape[0] == 0:
        raise EmptyDataset("cannot evaluate on an empty dataset")
    return float(np.abs(model.predict(data) - data[:, -1]).mean())


# ----------------------------------------------------------------- reports


@dataclass(frozen=True)
class EvalConfig:
    k: int = 5
    ridge: float = 1e-6
    augment_level: int | None = None

    def __post_init__(self):
        PrMetricConfig(self.k)
        if not self.ridge >= 0:
            raise ConfigError("ridge must be nonnegative")
        if self.augment_level is not None and self.augment_level < 0:
            raise ConfigError("augment_level must be nonnegative")


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f_score: float
    authenticity: float
    tstr_mae: float
    trtr_mae: float
    augmented: bool = False

    def to_record(self) -> dict:
        """Flat record; the synthetic-trained MAE is named ``aug_mae`` when the
        synthetic windows were added to the real ones."""
        rec = asdict(self)
        del rec["augmented"]
        if self.augmented:
            rec = {("aug_mae" if k == "tstr_mae" else k): v for k, v in rec.items()}
        return rec


def evaluate(real_train: WindowDataset, real_eval: WindowDataset, synth: WindowDataset, cfg: EvalConfig = EvalConfig()) -> EvalReport:
    for name, ds in (("real training set", real_train), ("real evaluation set", real_eval), ("synthetic set", synth)):
        require_nonempty(ds, name)
    require_same_length(real_train, real_eval, synth)
    p, r = precision_recall(real_train, synth, PrMetricConfig(cfg.k))
    if cfg.augment_level is None:
        tstr_train = synth.windows
    else:
        tstr_train = np.concatenate([real_train.windows, synth.windows[: cfg.augment_level]])
    return EvalReport(
        precision=p,
        recall=r,
        f_score=f_score(p, r),
        authenticity=authenticity(real_train, synth),
        tstr_mae=forecast_mae(fit_forecaster(tstr_train, cfg.ridge), real_eval),
        trtr_mae=forecast_mae(fit_forecaster(real_train, cfg.ridge), real_eval),
        augmented=cfg.augment_level is not None,
    )
