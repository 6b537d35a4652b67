"""Test signals and plain-text signal loading."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np


class SignalFormatError(ValueError):
    """Raised for unreadable, empty or non-numeric signal files."""


def grid(interval, n_samples: int) -> np.ndarray:
    c, d = interval
    if n_samples < 2:
        raise ValueError("need at least two samples")
    return np.linspace(c, d, n_samples)


def gen_chirp(interval, n_samples: int) -> np.ndarray:
    """Samples of ``cos(2 pi x^2)`` on the closed uniform grid over ``interval``."""
    x = grid(interval, n_samples)
    return np.cos(2 * np.pi * x**2)


_SEP = re.compile(r"[,;\s]+")


def read_values(path) -> np.ndarray:
    """Read reals, one or more per line; blank lines and ``#`` comments are skipped."""
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise SignalFormatError(f"cannot read {path}: {exc}") from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for tok in filter(None, _SEP.split(line)):
            try:
                v = float(tok)
            except ValueError:
                raise SignalFormatError(f"{path}:{lineno}: not a number: {tok!r}") from None
            if not np.isfinite(v):
                raise SignalFormatError(f"{path}:{lineno}: non-finite value {tok!r}")
            values.append(v)
    if not values:
        raise SignalFormatError(f"{path}: no samples")
    return np.array(values)


def load_signal(path, interval, n_samples: int) -> tuple[np.ndarray, dict]:
    """Load samples, spread them uniformly over ``interval`` and resample linearly.

    Returns the resampled vector and metadata recording the original length.
    """
    raw = read_values(path)
    if raw.size < 2:
        raise SignalFormatError(f"{path}: need at least two samples, got {raw.size}")
    src = grid(interval, raw.size)
    dst = grid(interval, n_samples)
    out = np.interp(dst, src, raw)
    meta = {"path": str(path), "original_length": int(raw.size), "resampled_length": int(n_samples)}
    return out, meta
