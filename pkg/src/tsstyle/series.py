from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SeriesTooShort, TsStyleError


def as_values(values, min_length: int = 3) -> np.ndarray:
    """Return ``values`` as a finite 1-D float64 array of at least ``min_length``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise TsStyleError(f"expected a 1-D series, got shape {arr.shape}")
    if arr.size < min_length:
        raise SeriesTooShort(f"series has {arr.size} values, need at least {min_length}")
    if not np.all(np.isfinite(arr)):
        raise TsStyleError("series contains NaN or infinite values")
    return arr


@dataclass(frozen=True, eq=False)
class Series:
    """A finite, time-ordered vector of observations with an optional label.

    Numeric routines accept any array-like, so a ``Series`` can be passed
    wherever an array is expected (it implements ``__array__``).
    """

    values: np.ndarray
    label: str | None = field(default=None)

    def __post_init__(self):
        arr = as_values(self.values)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    __hash__ = None
