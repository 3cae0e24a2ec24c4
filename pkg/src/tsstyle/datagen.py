"""Dataset construction: series generation, windowing, content strategies,
stylized dataset generation and simple augmentation baselines.

Randomness
----------
Every random draw goes through numpy's ``PCG64`` bit generator. Per-item
streams are derived with ``SeedSequence([seed, n])`` so that item ``n``
draws the same numbers no matter how the work is split or ordered.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .csvio import ingest_csv  # noqa: F401  re-exported for callers
from .errors import BadSplit, ConfigError, DegenerateSeries, EmptyDataset, LengthMismatch, SeriesTooShort
from .features import FeatureConfig, TrendConfig
from .losses import LossWeights
from .optimizer import OptimizerConfig, stylize_batch
from .series import Series, as_values

log = logging.getLogger(__name__)

CHUNK_SIZE = 256


def sub_seed(seed: int, n: int) -> int:
    """64-bit seed of the independent stream for item ``n`` under ``seed``."""
    return int(np.random.SeedSequence([seed, n]).generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# ---------------------------------------------------------------- datasets


@dataclass(frozen=True, eq=False)
class WindowDataset:
    """Equal-length windows (one per row) with per-window provenance."""

    windows: np.ndarray
    meta: tuple = field(default=())

    def __post_init__(self):
        w = np.asarray(self.windows, dtype=np.float64)
        if w.ndim != 2:
            raise ConfigError(f"windows must be a 2-D array, got shape {w.shape}")
        if w.shape[0] and w.shape[1] < 3:
            raise SeriesTooShort(f"windows must have at least 3 values, got {w.shape[1]}")
        if not np.all(np.isfinite(w)):
            raise ConfigError("windows contain NaN or infinite values")
        meta = tuple(dict(m) for m in self.meta)
        if not meta:
            meta = tuple({"n": i} for i in range(w.shape[0]))
        if len(meta) != w.shape[0]:
            raise ConfigError(f"{len(meta)} provenance records for {w.shape[0]} windows")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "windows", w)
        object.__setattr__(self, "meta", meta)

    def __len__(self):
        return self.windows.shape[0]

    @property
    def window_length(self) -> int:
        return self.windows.shape[1]

    def subset(self, rows) -> "WindowDataset":
        rows = np.arange(len(self))[rows]
        return WindowDataset(self.windows[rows], tuple(self.meta[i] for i in rows))

    def __eq__(self, other):
        if not isinstance(other, WindowDataset):
            return NotImplemented
        return np.array_equal(self.windows, other.windows) and self.meta == other.meta

    __hash__ = None


def require_nonempty(ds: WindowDataset, name: str = "dataset") -> None:
    if len(ds) == 0:
        raise EmptyDataset(f"{name} is empty")


def require_same_length(*datasets: WindowDataset) -> None:
    lengths = {ds.window_length for ds in datasets}
    if len(lengths) > 1:
        raise LengthMismatch(f"window lengths differ: {sorted(lengths)}")


def sliding_windows(series, w: int) -> WindowDataset:
    """All length-``w + 1`` windows of ``series``; window ``n`` starts at index ``n`` (1-based)."""
    label = getattr(series, "label", None)
    y = as_values(series, min_length=1)
    if w < 1:
        raise ConfigError(f"window size must be positive, got {w}")
    if y.size < w + 1:
        raise SeriesTooShort(f"series of length {y.size} is too short for windows of {w + 1} values")
    windows = np.lib.stride_tricks.sliding_window_view(y, w + 1)
    meta = tuple({"n": i, "source": label or "", "start": i + 1} for i in range(windows.shape[0]))
    return WindowDataset(windows, meta)


def train_test_split(ds: WindowDataset, n_train: int) -> tuple[WindowDataset, WindowDataset]:
    """Chronological split into the first ``n_train`` windows and the rest."""
    if not 0 < n_train < len(ds):
        raise BadSplit(f"n_train must lie in (0, {len(ds)}), got {n_train}")
    return ds.subset(slice(0, n_train)), ds.subset(slice(n_train, None))


# -------------------------------------------------------------- generation


@dataclass(frozen=True)
class SwitchingArConfig:
    """AR(1) whose coefficients switch at ``floor(switch_fraction * horizon)``."""

    a10: float = 0.01
    a11: float = 1.001
    a20: float = -0.01
    a21: float = 0.999
    horizon: int = 3030
    switch_fraction: float = 0.8
    noise_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 2:
            raise ConfigError(f"horizon must be an integer >= 2, got {self.horizon}")
        if not 0 < self.switch_fraction < 1:
            raise ConfigError("switch_fraction must lie in (0, 1)")
        if not self.noise_std >= 0:
            raise ConfigError("noise_std must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def switch_time(self) -> int:
        return int(np.floor(self.switch_fraction * self.horizon))


def gen_switching_ar1(config: SwitchingArConfig = SwitchingArConfig(), initial: float | None = None) -> Series:
    """Simulate ``y_1..y_T`` from a standard-normal start ``y_0``.

    ``initial`` pins ``y_0`` instead of drawing it (the draw still happens,
    so the noise sequence is unchanged).
    """
    rng = make_rng(config.seed)
    y0 = rng.standard_normal()
    eps = config.noise_std * rng.standard_normal(config.horizon)
    prev = y0 if initial is None else float(initial)
    ts = config.switch_time
    out = np.empty(config.horizon)
    for t in range(1, config.horizon + 1):
        if t < ts:
            prev = config.a11 * prev + config.a10 + eps[t - 1]
        else:
            prev = config.a21 * prev + config.a20 + eps[t - 1]
        out[t - 1] = prev
    return Series(out, label=f"switching-ar1-seed{config.seed}")


def minmax_scale(series) -> Series:
    """Affinely map a series onto ``[0, 1]``."""
    label = getattr(series, "label", None)
    y = as_values(series)
    lo, hi = y.min(), y.max()
    if hi == lo:
        raise DegenerateSeries("cannot scale a constant series")
    return Series((y - lo) / (hi - lo), label=label)


# -------------------------------------------------------- content strategies


@dataclass(frozen=True)
class ShockConfig:
    """Random unit-step shock; amplitude in data units, shift as a window index."""

    amplitude_range: tuple = (-1.0, 1.0)
    shift_range: tuple = (7, 23)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.amplitude_range
        if not lo <= hi:
            raise ConfigError("amplitude_range must be ordered")
        klo, khi = self.shift_range
        if int(klo) != klo or int(khi) != khi or not 0 <= klo <= khi:
            raise ConfigError("shift_range must be an ordered pair of nonnegative integers")

    @classmethod
    def relative_to(cls, ds: WindowDataset, amplitude=(-2.0, 2.0), shift=None, seed: int = 0) -> "ShockConfig":
        """Amplitudes in units of the mean per-window standard deviation of ``ds``;
        shifts default to the middle half of the window."""
        require_nonempty(ds)
        sigma = float(ds.windows.std(axis=1).mean())
        length = ds.window_length
        if shift is None:
            shift = (int(0.25 * length), int(0.75 * length))
        if shift[1] > length - 1:
            raise ConfigError(f"shift range {shift} exceeds window length {length}")
        return cls((amplitude[0] * sigma, amplitude[1] * sigma), tuple(shift), seed)


def perturb_with_step(window, shock: ShockConfig, rng: np.random.Generator) -> np.ndarray:
    y = as_values(window)
    a = rng.uniform(*shock.amplitude_range)
    k = int(rng.integers(shock.shift_range[0], shock.shift_range[1] + 1))
    out = y.copy()
    out[k:] += a
    return out


def perturb_dataset(ds: WindowDataset, shock: ShockConfig) -> WindowDataset:
    """Shock every window, window ``i`` using stream ``sub_seed(shock.seed, i)``."""
    if shock.shift_range[1] > ds.window_length - 1:
        raise ConfigError(f"shift range {shock.shift_range} exceeds window length {ds.window_length}")
    out = np.stack([perturb_with_step(w, shock, make_rng(sub_seed(shock.seed, i))) for i, w in enumerate(ds.windows)])
    meta = tuple({**m, "shock_seed": shock.seed} for m in ds.meta)
    return WindowDataset(out, meta)


CONTENT_VARIANTS = ("in_sample", "perturbed", "external")


@dataclass(frozen=True)
class ContentStrategy:
    """Where content windows come from: the training windows themselves, a
    shocked copy of them, or windows produced elsewhere (read from a file)."""

    variant: str = "in_sample"
    shock: ShockConfig | None = None
    external: WindowDataset | None = None

    def __post_init__(self):
        if self.variant not in CONTENT_VARIANTS:
            raise ConfigError(f"variant must be one of {CONTENT_VARIANTS}")
        if self.variant == "perturbed" and self.shock is None:
            raise ConfigError("perturbed content needs a ShockConfig")
        if self.variant == "external" and self.external is None:
            raise ConfigError("external content needs a window dataset")

    def build(self, train: WindowDataset) -> WindowDataset:
        if self.variant == "in_sample":
            return train
        if self.variant == "perturbed":
            return perturb_dataset(train, self.shock)
        require_same_length(train, self.external)
        return self.external


# ------------------------------------------------------ stylized datasets


def _stylize_chunk(args):
    offset, contents, styles, weights, opt, fc, tc, skip_errors = args
    try:
        results = stylize_batch(contents, styles, weights, opt, fc, tc, skip_errors)
    except DegenerateSeries as exc:
        raise DegenerateSeries(str(exc), iteration=exc.iteration, sample=offset + exc.sample) from exc
    return [None if r is None else r.stylized for r in results]


def generate_stylized_dataset(
    content: WindowDataset,
    style: WindowDataset,
    n: int,
    weights: LossWeights = LossWeights(),
    opt: OptimizerConfig = OptimizerConfig(),
    fc: FeatureConfig = FeatureConfig(),
    tc: TrendConfig = TrendConfig(),
    seed: int = 0,
    jobs: int = 1,
    skip_errors: bool = False,
) -> WindowDataset:
    """Stylize ``n`` random (content, style) pairs drawn with replacement.

    Sample ``i`` draws its content index then its style index from the
    stream ``sub_seed(seed, i)``. Work is done in fixed-size chunks, in
    parallel when ``jobs > 1``; output order is always by sample index.
    """
    require_nonempty(content, "content dataset")
    require_nonempty(style, "style dataset")
    require_same_length(content, style)
    if n < 1:
        raise ConfigError(f"number of samples must be positive, got {n}")

    seeds = [sub_seed(seed, i) for i in range(n)]
    pairs = []
    for s in seeds:
        rng = make_rng(s)
        pairs.append((int(rng.integers(len(content))), int(rng.integers(len(style)))))
    ci = np.array([p[0] for p in pairs])
    si = np.array([p[1] for p in pairs])

    tasks = [
        (a, content.windows[ci[a : a + CHUNK_SIZE]], style.windows[si[a : a + CHUNK_SIZE]], weights, opt, fc, tc, skip_errors)
        for a in range(0, n, CHUNK_SIZE)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_stylize_chunk, tasks))
    else:
        chunks = [_stylize_chunk(t) for t in tasks]

    outputs = [w for chunk in chunks for w in chunk]
    rows, meta = [], []
    for i, w in enumerate(outputs):
        if w is None:
            log.warning("sample %d failed and was skipped", i)
            continue
        rows.append(w)
        meta.append({"n": i, "content_idx": int(ci[i]), "style_idx": int(si[i]), "seed": seeds[i]})
    if not rows:
        raise EmptyDataset("every sample failed")
    return WindowDataset(np.stack(rows), tuple(meta))


# ------------------------------------------------------------ augmentation


def augment_jitter(window, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma < 0:
        raise ConfigError("sigma must be nonnegative")
    y = as_values(window)
    return y + rng.normal(0.0, sigma, size=y.size)


def augment_flip(window) -> np.ndarray:
    """Reflect values about the window mean."""
    y = as_values(window)
    return 2.0 * y.mean() - y


def augment_time_warp(window, knots: int, warp_std: float, rng: np.random.Generator) -> np.ndarray:
    """Resample ``window`` along a random monotone time warp.

    The time axis ``[0, W]`` is cut into ``knots`` equal segments whose
    speeds are scaled by log-normal factors ``exp(warp_std * N(0, 1))``; the
    warped axis is renormalized to end at ``W``, so both endpoints stay put.
    Values at warped times are linearly interpolated.
    """
    if knots < 2:
        raise ConfigError("time warp needs at least 2 knots")
    if warp_std < 0:
        raise ConfigError("warp_std must be nonnegative")
    y = as_values(window)
    speeds = np.exp(warp_std * rng.standard_normal(knots))
    if warp_std == 0:
        return y.copy()
    end = y.size - 1
    grid = np.linspace(0.0, end, knots + 1)
    warped = np.concatenate([[0.0], np.cumsum(speeds)])
    warped = warped * (end / warped[-1])
    warped[-1] = end
    t = np.interp(np.arange(y.size, dtype=np.float64), grid, warped)
    out = np.interp(t, np.arange(y.size, dtype=np.float64), y)
    out[0], out[-1] = y[0], y[-1]
    return out


AUGMENT_METHODS = ("jitter", "flip", "timewarp")


def augment_dataset(ds: WindowDataset, method: str, seed: int = 0, sigma: float = 0.03, knots: int = 4, warp_std: float = 0.2) -> WindowDataset:
    """Apply one augmentation to every window; window ``i`` uses stream ``sub_seed(seed, i)``."""
    if method not in AUGMENT_METHODS:
        raise ConfigError(f"method must be one of {AUGMENT_METHODS}")
    out = []
    for i, w in enumerate(ds.windows):
        rng = make_rng(sub_seed(seed, i))
        if method == "jitter":
            out.append(augment_jitter(w, sigma, rng))
        elif method == "flip":
            out.append(augment_flip(w))
        else:
            out.append(augment_time_warp(w, knots, warp_std, rng))
    meta = tuple({**m, "augment": method} for m in ds.meta)
    return WindowDataset(np.stack(out) if out else np.empty((0, ds.window_length)), meta)
