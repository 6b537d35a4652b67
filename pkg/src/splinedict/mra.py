"""Cardinal B-splines, Chui-Wang spline wavelets and cut-off bases on [c, d]."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from .poly import Dyadic, PiecewisePoly, inner_product, linear_combination, restrict

SCALING = "scaling"
WAVELET = "wavelet"


def bspline_value(m: int, x) -> Fraction:
    """Exact value of the order-``m`` cardinal B-spline at a rational point.

    Uses the truncated power form, right-continuous at the knots.
    """
    if m < 1:
        raise ValueError("B-spline order must be >= 1")
    x = Fraction(x)
    total = Fraction(0)
    for i in range(m + 1):
        if x - i > 0 or (m == 1 and x - i == 0):
            total += (-1) ** i * math.comb(m, i) * (x - i) ** (m - 1)
    return total / math.factorial(m - 1)


@functools.lru_cache(maxsize=None)
def bspline(m: int) -> PiecewisePoly:
    """Cardinal B-spline of order ``m`` (degree ``m - 1``) on knots ``0, 1, ..., m``.

    Piece coefficients are computed in exact rational arithmetic from the
    truncated power form and only then rounded to floats.
    """
    if m < 1:
        raise ValueError("B-spline order must be >= 1")
    rows = []
    for piece in range(m):
        # on [piece, piece + 1): sum_{i <= piece} (-1)^i C(m, i) (t + piece - i)^(m-1)
        row = [Fraction(0)] * m
        for i in range(piece + 1):
            a = (-1) ** i * math.comb(m, i)
            shift = piece - i
            for k in range(m):
                row[k] += a * math.comb(m - 1, k) * Fraction(shift) ** (m - 1 - k)
        rows.append([float(c / math.factorial(m - 1)) for c in row])
    return PiecewisePoly(range(m + 1), rows)


def bspline_two_scale_exact(m: int) -> list[Fraction]:
    return [Fraction(math.comb(m, n), 2 ** (m - 1)) for n in range(m + 1)]


def bspline_two_scale(m: int) -> np.ndarray:
    """Coefficients ``p_n = 2**(1 - m) C(m, n)`` with ``phi(x) = sum_n p_n phi(2x - n)``."""
    return np.array([float(p) for p in bspline_two_scale_exact(m)])


def wavelet_length(m: int) -> int:
    """Support length ``2m - 1`` of the Chui-Wang wavelet of order ``m``."""
    return 2 * m - 1


@functools.lru_cache(maxsize=None)
def chui_wang_coefficients_exact(m: int) -> tuple[Fraction, ...]:
    """Two-scale coefficients ``q_n``, ``n = 0 .. 3m - 2``, of the Chui-Wang wavelet.

    ``q_n = (-1)**n 2**(1 - m) sum_l C(m, l) N_{2m}(n - l + 1)`` with ``N_{2m}``
    the order-``2m`` B-spline; the sign convention gives ``q_0 > 0``.
    """
    if m < 1:
        raise ValueError("wavelet order must be >= 1")
    q = []
    for n in range(3 * m - 1):
        s = sum(math.comb(m, l) * bspline_value(2 * m, n - l + 1) for l in range(m + 1))
        q.append((-1) ** n * s / 2 ** (m - 1))
    return tuple(q)


def chui_wang_coefficients(m: int) -> tuple[float, ...]:
    return tuple(float(v) for v in chui_wang_coefficients_exact(m))


@functools.lru_cache(maxsize=None)
def _chui_wang_poly(m: int) -> PiecewisePoly:
    phi = bspline(m)
    q = chui_wang_coefficients(m)
    return linear_combination(list(q), [phi.dilate(1, n) for n in range(len(q))])


def chui_wang_wavelet(m: int) -> tuple[PiecewisePoly, np.ndarray]:
    """Semi-orthogonal spline wavelet ``psi(x) = sum_n q_n phi(2x - n)`` on ``[0, 2m - 1]``."""
    if m < 1:
        raise ValueError("wavelet order must be >= 1")
    return _chui_wang_poly(m), np.array(chui_wang_coefficients(m))


@dataclass(frozen=True)
class SpaceParams:
    """Order ``m``, integer interval ``[c, d]`` and scale ``j`` of a spline space."""

    order: int
    c: int
    d: int
    scale: int = 0

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.d <= self.c:
            raise ValueError("interval must satisfy d > c")
        if self.scale < 0:
            raise ValueError("scale must be >= 0")

    def check_fits(self) -> None:
        """Require one whole scaling function and one whole wavelet inside ``[c, d]``."""
        if self.d - self.c < max(self.order, self.w):
            raise ValueError(
                f"interval length {self.d - self.c} is shorter than max(m, w) = "
                f"{max(self.order, self.w)}"
            )

    @property
    def w(self) -> int:
        return wavelet_length(self.order)

    @property
    def interval(self) -> tuple[int, int]:
        return self.c, self.d

    def dim_V(self, scale: int | None = None) -> int:
        j = self.scale if scale is None else scale
        return (self.d - self.c) * 2**j + self.order - 1

    def dim_W(self, scale: int | None = None) -> int:
        j = self.scale if scale is None else scale
        return (self.d - self.c) * 2**j

    def at_scale(self, scale: int) -> "SpaceParams":
        return SpaceParams(self.order, self.c, self.d, scale)


@dataclass(frozen=True)
class Atom:
    """A scaling function or wavelet ``2**(j/2) f(2**j x - k)`` restricted to ``[c, d]``."""

    kind: Literal["scaling", "wavelet"]
    scale: int
    translation: Dyadic
    order: int
    interval: tuple[int, int]
    shape: PiecewisePoly = field(repr=False, compare=False)
    norm: float = field(compare=False)

    @property
    def unrestricted_support(self) -> tuple[Dyadic, Dyadic]:
        length = self.order if self.kind == SCALING else wavelet_length(self.order)
        k = self.translation
        return k.scaled(-self.scale), (k + length).scaled(-self.scale)

    @property
    def is_inner(self) -> bool:
        lo, hi = self.unrestricted_support
        return self.interval[0] <= lo and hi <= self.interval[1]

    @property
    def label(self) -> str:
        sym = "phi" if self.kind == SCALING else "psi"
        return f"{sym}[{self.scale},{self.translation}]"


def prototype(kind: str, m: int) -> PiecewisePoly:
    if kind == SCALING:
        return bspline(m)
    if kind == WAVELET:
        return _chui_wang_poly(m)
    raise ValueError(f"unknown atom kind {kind!r}")


def make_atom(kind: str, m: int, scale: int, translation, interval) -> Atom:
    k = Dyadic.of(translation)
    c, d = interval
    shape = prototype(kind, m).dilate(scale, k).scaled(2.0 ** (scale / 2))
    shape = restrict(shape, (c, d))
    norm = math.sqrt(inner_product(shape, shape))
    return Atom(kind, scale, k, m, (c, d), shape, norm)


def basis_V(params: SpaceParams) -> list[Atom]:
    """Restricted B-splines ``phi_{j,k}``, ``k`` integer in ``(2^j c - m, 2^j d)``."""
    j, m = params.scale, params.order
    lo, hi = 2**j * params.c - m, 2**j * params.d
    return [make_atom(SCALING, m, j, k, params.interval) for k in range(lo + 1, hi)]


def basis_W(params: SpaceParams) -> list[Atom]:
    """Cut-off wavelet basis: ``k`` integer in ``(2^j c - floor(z), 2^j d - floor(z))``.

    ``z = (w - 1) / 2``.  Of the ``(d - c) 2^j + w - 1`` translates meeting
    ``(c, d)``, the first ``ceil(z)`` and the last ``floor(z)`` are dropped.
    """
    j, m, w = params.scale, params.order, params.w
    first_all = 2**j * params.c - w + 1
    last_all = 2**j * params.d - 1
    left_drop = math.ceil((w - 1) / 2)
    right_drop = (w - 1) // 2
    ks = range(first_all + left_drop, last_all - right_drop + 1)
    return [make_atom(WAVELET, m, j, k, params.interval) for k in ks]
