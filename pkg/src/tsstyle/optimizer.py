"""RMSprop descent on the stylization objective.

A run starts at the content series and takes a fixed number of RMSprop
steps. Many runs can be advanced together with :func:`stylize_batch`; rows
never interact, so a run's result does not depend on what it was batched
with.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateSeries, LengthMismatch
from .features import FeatureConfig, TrendConfig
from .losses import BatchTargets, LossBreakdown, LossContext, LossWeights, batch_loss
from .series import as_values

log = logging.getLogger(__name__)

LR_SCALES = ("style", "absolute")


@dataclass(frozen=True)
class OptimizerConfig:
    """RMSprop settings.

    With the default ``lr_scale="style"``, ``base_lr`` is a fraction of the
    style series' RMS one-step change; ``"absolute"`` uses it as is.
    """

    iterations: int = 250
    base_lr: float = 0.15
    rms_decay: float = 0.9
    rms_epsilon: float = 1e-8
    return_best: bool = True
    lr_scale: str = "style"

    def __post_init__(self):
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigError(f"iterations must be a positive integer, got {self.iterations}")
        if not self.base_lr > 0:
            raise ConfigError("base_lr must be positive")
        if not 0 < self.rms_decay < 1:
            raise ConfigError("rms_decay must lie in (0, 1)")
        if not self.rms_epsilon > 0:
            raise ConfigError("rms_epsilon must be positive")
        if self.lr_scale not in LR_SCALES:
            raise ConfigError(f"lr_scale must be one of {LR_SCALES}")


@dataclass(frozen=True, eq=False)
class StylizationResult:
    stylized: np.ndarray
    trace: list = field(repr=False)
    best_iteration: int

    @property
    def initial_loss(self) -> LossBreakdown:
        return self.trace[0]

    @property
    def best_loss(self) -> LossBreakdown:
        return self.trace[self.best_iteration]


def rmsprop_step(y, grad, state, config: OptimizerConfig = OptimizerConfig(), lr=None):
    """One RMSprop update; returns ``(new_y, new_state)``.

    ``state`` is the running mean of squared gradients, same shape as ``y``.
    ``lr`` overrides ``config.base_lr`` and may be an array broadcasting
    against ``y`` (one rate per row).
    """
    y = np.asarray(y, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    state = np.asarray(state, dtype=np.float64)
    if not (y.shape == grad.shape == state.shape):
        raise LengthMismatch(f"shapes differ: y {y.shape}, grad {grad.shape}, state {state.shape}")
    state = config.rms_decay * state + (1.0 - config.rms_decay) * grad * grad
    lr = config.base_lr if lr is None else lr
    y = y - lr * grad / (np.sqrt(state) + config.rms_epsilon)
    return y, state


def step_sizes(styles, opt: OptimizerConfig) -> np.ndarray:
    """Per-row RMSprop step size.

    With ``lr_scale="style"`` the base rate is measured in units of the style
    series' typical one-step change (the RMS of its first differences), so
    the optimizer behaves the same whatever units the data are in.
    """
    styles = np.atleast_2d(styles)
    if opt.lr_scale == "absolute":
        return np.full(styles.shape[0], opt.base_lr)
    d = np.diff(styles, axis=-1)
    return opt.base_lr * np.sqrt((d * d).mean(axis=-1))


def stylize_batch(
    contents,
    styles,
    weights: LossWeights = LossWeights(),
    opt: OptimizerConfig = OptimizerConfig(),
    fc: FeatureConfig = FeatureConfig(),
    tc: TrendConfig = TrendConfig(),
    skip_errors: bool = False,
) -> list:
    """Stylize each row of ``contents`` with the matching row of ``styles``.

    Returns one :class:`StylizationResult` per row. A row that becomes
    degenerate raises :class:`DegenerateSeries` (with ``sample`` and
    ``iteration`` set) unless ``skip_errors`` is true, in which case that
    row's entry is ``None`` and the remaining rows carry on.
    """
    contents = np.atleast_2d(np.asarray(contents, dtype=np.float64))
    styles = np.atleast_2d(np.asarray(styles, dtype=np.float64))
    if contents.shape != styles.shape:
        raise LengthMismatch(f"content shape {contents.shape} != style shape {styles.shape}")
    n_rows, length = contents.shape

    contexts = []
    alive = []
    for i in range(n_rows):
        try:
            contexts.append(LossContext.build(contents[i], styles[i], weights, fc, tc))
            alive.append(i)
        except DegenerateSeries as exc:
            if not skip_errors:
                raise DegenerateSeries(str(exc), iteration=0, sample=i) from exc
            log.warning("sample %d skipped: %s", i, exc)
    alive = np.array(alive, dtype=int)
    if alive.size == 0:
        return [None] * n_rows
    targets = BatchTargets.from_contexts(contexts)
    lr = step_sizes(styles[alive], opt)[:, None]

    iters = opt.iterations
    hist = np.full((4, iters, n_rows), np.nan)
    y = contents[alive].copy()
    state = np.zeros_like(y)
    best_y = contents.copy()
    best_total = np.full(n_rows, np.inf)
    best_it = np.zeros(n_rows, dtype=int)

    for it in range(iters):
        while True:
            try:
                c, s, tv, total, grad = batch_loss(y, targets, weights, fc)
                break
            except DegenerateSeries as exc:
                bad = alive[exc.sample]
                if not skip_errors:
                    raise DegenerateSeries(str(exc), iteration=it, sample=int(bad)) from exc
                log.warning("sample %d dropped at iteration %d: %s", bad, it, exc)
                keep = np.arange(alive.size) != exc.sample
                alive, y, state, lr = alive[keep], y[keep], state[keep], lr[keep]
                targets = targets.take(keep)
                if alive.size == 0:
                    return [None] * n_rows
        hist[:, it, alive] = c, s, tv, total
        improved = total < best_total[alive]
        rows = alive[improved]
        best_total[rows] = total[improved]
        best_it[rows] = it
        best_y[rows] = y[improved]
        y, state = rmsprop_step(y, grad, state, opt, lr)

    results = [None] * n_rows
    for j, i in enumerate(alive):
        trace = [LossBreakdown(*map(float, hist[:, t, i])) for t in range(iters)]
        out = best_y[i] if opt.return_best else y[j]
        results[i] = StylizationResult(stylized=out.copy(), trace=trace, best_iteration=int(best_it[i]))
    return results


def stylize(
    content,
    style,
    weights: LossWeights = LossWeights(),
    opt: OptimizerConfig = OptimizerConfig(),
    fc: FeatureConfig = FeatureConfig(),
    tc: TrendConfig = TrendConfig(),
) -> StylizationResult:
    """Transfer the style of ``style`` onto the trend of ``content``."""
    content = as_values(content)
    style = as_values(style)
    if content.size != style.size:
        raise LengthMismatch(f"content length {content.size} != style length {style.size}")
    return stylize_batch(content[None], style[None], weights, opt, fc, tc)[0]
