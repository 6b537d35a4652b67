"""Piecewise polynomials with exact dyadic breakpoints.

Every function handled by this package (B-splines, spline wavelets, their
dilates, translates and restrictions) is a piecewise polynomial whose
breakpoints are dyadic rationals ``n / 2**e``.  Breakpoints are stored
exactly as :class:`Dyadic` values so that translation by ``k / 2**l`` and
dilation by ``2**j`` never drift.  Polynomial pieces are stored as floating
point coefficients in the *local* variable ``t = x - b_i`` of the piece's
left breakpoint, which keeps the coefficients well scaled at fine knot
spacings.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss


@functools.total_ordering
@dataclass(frozen=True)
class Dyadic:
    """Exact dyadic rational ``num / 2**exp``.

    The representation is normalized: ``num`` is odd unless ``exp == 0``.
    """

    num: int
    exp: int = 0

    def __post_init__(self):
        num, exp = int(self.num), int(self.exp)
        if exp < 0:
            num, exp = num << -exp, 0
        while exp > 0 and num % 2 == 0:
            num //= 2
            exp -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    @classmethod
    def of(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value), 0)
        frac = Fraction(value)
        den = frac.denominator
        if den & (den - 1):
            raise ValueError(f"{value!r} is not a dyadic rational")
        return cls(frac.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Inverse of ``str``: accepts ``"n"`` or ``"n/2^e"``."""
        text = text.strip()
        if "/2^" in text:
            num, exp = text.split("/2^")
            return cls(int(num), int(exp))
        return cls(int(text), 0)

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other):
        other = Dyadic.of(other)
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        other = Dyadic.of(other)
        a, b, e = self._aligned(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        return Dyadic.of(other) - self

    def __neg__(self):
        return Dyadic(-self.num, self.exp)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return Dyadic(self.num * int(other), self.exp)
        other = Dyadic.of(other)
        return Dyadic(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = Dyadic.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.num == other.num and self.exp == other.exp

    def __hash__(self):
        return hash((self.num, self.exp))

    def __lt__(self, other):
        other = Dyadic.of(other)
        a, b, _ = self._aligned(other)
        return a < b

    def scaled(self, log2_factor: int) -> "Dyadic":
        """Multiply by ``2**log2_factor`` exactly."""
        return Dyadic(self.num, self.exp - log2_factor)

    def is_integer(self) -> bool:
        return self.exp == 0

    def floor(self) -> int:
        return self.num >> self.exp

    def ceil(self) -> int:
        return -((-self.num) >> self.exp)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self):
        return math.ldexp(float(self.num), -self.exp)

    def __str__(self):
        return str(self.num) if self.exp == 0 else f"{self.num}/2^{self.exp}"

    def __repr__(self):
        return f"Dyadic({self})"


def dyadic_range(lo, hi, log2_step: int) -> list[Dyadic]:
    """All points of the lattice ``Z / 2**log2_step`` in the open interval (lo, hi)."""
    lo, hi = Dyadic.of(lo).scaled(log2_step), Dyadic.of(hi).scaled(log2_step)
    first = lo.floor() + 1
    last = hi.ceil() - 1
    return [Dyadic(n, log2_step) for n in range(first, last + 1)]


def taylor_shift(coeffs: np.ndarray, h) -> np.ndarray:
    """Coefficients of ``t -> p(t + h)`` for rows of ascending coefficients.

    ``coeffs`` has shape ``(n, d + 1)``; ``h`` is a scalar or length-``n`` array.
    """
    coeffs = np.atleast_2d(coeffs)
    h = np.broadcast_to(np.asarray(h, dtype=float), coeffs.shape[:1])
    ncoef = coeffs.shape[1]
    out = np.zeros_like(coeffs, dtype=float)
    for i in range(ncoef):
        for k in range(i + 1):
            out[:, k] += coeffs[:, i] * math.comb(i, k) * h ** (i - k)
    return out


def _horner(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    for col in range(coeffs.shape[1] - 1, -1, -1):
        out = out * t + coeffs[:, col]
    return out


class PiecewisePoly:
    """Immutable piecewise polynomial on dyadic breakpoints.

    Parameters
    ----------
    breakpoints : sequence of Dyadic-convertible
        Strictly ascending breakpoints ``b_0 < ... < b_n``.  An empty
        sequence denotes the zero function.
    coeffs : array_like, shape (n, d + 1)
        Row ``i`` holds ascending coefficients of piece ``i`` in the local
        variable ``t = x - b_i``.

    Evaluation is right-continuous and the function vanishes outside
    ``[b_0, b_n]``; :meth:`__call__` with ``side="left"`` gives left limits
    instead, which is how the closed right end of a support is sampled.
    """

    __slots__ = ("breakpoints", "coeffs", "_fbreaks")

    def __init__(self, breakpoints: Sequence, coeffs):
        bps = tuple(Dyadic.of(b) for b in breakpoints)
        coeffs = np.array(coeffs, dtype=float, ndmin=2)
        if not bps:
            coeffs = np.zeros((0, max(coeffs.shape[-1], 1)))
        elif coeffs.shape[0] != len(bps) - 1:
            raise ValueError(
                f"{len(bps)} breakpoints need {len(bps) - 1} pieces, got {coeffs.shape[0]}"
            )
        if any(not a < b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly ascending")
        coeffs.setflags(write=False)
        fb = np.array([float(b) for b in bps])
        fb.setflags(write=False)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_fbreaks", fb)

    def __setattr__(self, name, value):
        raise AttributeError("PiecewisePoly is immutable")

    @classmethod
    def zero(cls, ncoef: int = 1) -> "PiecewisePoly":
        return cls((), np.zeros((0, ncoef)))

    @property
    def float_breakpoints(self) -> np.ndarray:
        return self._fbreaks

    @property
    def support(self) -> tuple[Dyadic, Dyadic] | None:
        if not self.breakpoints:
            return None
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def npieces(self) -> int:
        return self.coeffs.shape[0]

    def is_zero(self, atol: float = 0.0) -> bool:
        return self.coeffs.size == 0 or bool(np.all(np.abs(self.coeffs) <= atol))

    def __call__(self, x, side: str = "right"):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros(x.shape)
        if self.breakpoints:
            fb = self._fbreaks
            if side == "right":
                idx = np.searchsorted(fb, x, side="right") - 1
                inside = (x >= fb[0]) & (x < fb[-1])
            elif side == "left":
                idx = np.searchsorted(fb, x, side="left") - 1
                inside = (x > fb[0]) & (x <= fb[-1])
            else:
                raise ValueError("side must be 'right' or 'left'")
            if inside.any():
                i = idx[inside]
                out[inside] = _horner(self.coeffs[i], x[inside] - fb[i])
        return float(out[0]) if scalar else out

    def refine(self, breakpoints: Sequence) -> "PiecewisePoly":
        """Re-express on a breakpoint list; new pieces outside the support are zero."""
        bps = tuple(Dyadic.of(b) for b in breakpoints)
        if len(bps) < 2:
            return PiecewisePoly.zero(self.coeffs.shape[1])
        left = np.array([float(b) for b in bps[:-1]])
        out = np.zeros((len(left), self.coeffs.shape[1]))
        if self.breakpoints:
            fb = self._fbreaks
            idx = np.searchsorted(fb, left, side="right") - 1
            inside = (left >= fb[0]) & (left < fb[-1])
            if inside.any():
                i = idx[inside]
                out[inside] = taylor_shift(self.coeffs[i], left[inside] - fb[i])
        return PiecewisePoly(bps, out)

    def with_degree(self, degree: int) -> "PiecewisePoly":
        """Pad coefficient rows with zeros up to ``degree``."""
        extra = degree - self.degree
        if extra <= 0:
            return self
        pad = np.zeros((self.coeffs.shape[0], extra))
        return PiecewisePoly(self.breakpoints, np.hstack([self.coeffs, pad]))

    def scaled(self, factor: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, factor * self.coeffs)

    def dilate(self, log2_scale: int, shift=0) -> "PiecewisePoly":
        """Return ``x -> p(2**log2_scale * x - shift)`` (no amplitude factor)."""
        shift = Dyadic.of(shift)
        bps = [(b + shift).scaled(-log2_scale) for b in self.breakpoints]
        powers = 2.0 ** (log2_scale * np.arange(self.coeffs.shape[1]))
        return PiecewisePoly(bps, self.coeffs * powers)

    def derivative(self) -> "PiecewisePoly":
        if self.degree == 0:
            return PiecewisePoly(self.breakpoints, np.zeros_like(self.coeffs))
        k = np.arange(1, self.coeffs.shape[1])
        return PiecewisePoly(self.breakpoints, self.coeffs[:, 1:] * k)

    def integral(self) -> float:
        if not self.breakpoints:
            return 0.0
        widths = np.diff(self._fbreaks)
        k = np.arange(self.coeffs.shape[1])
        terms = self.coeffs * widths[:, None] ** (k + 1) / (k + 1)
        return float(terms.sum())

    def __add__(self, other):
        return linear_combination([1.0, 1.0], [self, other])

    def __sub__(self, other):
        return linear_combination([1.0, -1.0], [self, other])

    def __neg__(self):
        return self.scaled(-1.0)

    def __mul__(self, factor):
        return self.scaled(float(factor))

    __rmul__ = __mul__

    def __repr__(self):
        sup = self.support
        sup_txt = "empty" if sup is None else f"[{sup[0]}, {sup[1]}]"
        return f"PiecewisePoly(support={sup_txt}, pieces={self.npieces}, degree={self.degree})"


def evaluate(p: PiecewisePoly, x, side: str = "right"):
    return p(x, side=side)


def merged_breakpoints(polys: Sequence[PiecewisePoly]) -> list[Dyadic]:
    return sorted({b for p in polys for b in p.breakpoints})


def linear_combination(coeffs: Sequence[float], atoms: Sequence[PiecewisePoly]) -> PiecewisePoly:
    """Exact sum ``sum_i coeffs[i] * atoms[i]`` on the merged breakpoints."""
    if len(coeffs) != len(atoms):
        raise ValueError(f"got {len(coeffs)} coefficients for {len(atoms)} functions")
    if not atoms:
        raise ValueError("linear_combination needs at least one term")
    bps = merged_breakpoints(atoms)
    degree = max(p.degree for p in atoms)
    if len(bps) < 2:
        return PiecewisePoly.zero(degree + 1)
    total = np.zeros((len(bps) - 1, degree + 1))
    for c, p in zip(coeffs, atoms):
        if c != 0.0 and p.breakpoints:
            total += c * p.with_degree(degree).refine(bps).coeffs
    return PiecewisePoly(bps, total)


def restrict(p: PiecewisePoly, interval) -> PiecewisePoly:
    """Clip ``p`` to the closed interval ``[a, b]``."""
    a, b = (Dyadic.of(v) for v in interval)
    if not a < b:
        raise ValueError("restriction interval must be non-degenerate")
    sup = p.support
    if sup is None or not (sup[0] < b and a < sup[1]):
        return PiecewisePoly.zero(p.coeffs.shape[1])
    lo, hi = max(a, sup[0]), min(b, sup[1])
    bps = [lo] + [x for x in p.breakpoints if lo < x < hi] + [hi]
    return p.refine(bps)


def gauss_nodes(npoints: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = leggauss(npoints)
    return (x + 1.0) / 2.0, w / 2.0


def _nodes_for(deg_total: int) -> int:
    # exact for polynomial integrands of degree <= deg_total, plus one spare node
    return math.ceil((deg_total + 1) / 2) + 1


def inner_product(p: PiecewisePoly, q: PiecewisePoly) -> float:
    """Exact L2 inner product by Gauss-Legendre on the merged breakpoints."""
    if not p.breakpoints or not q.breakpoints:
        return 0.0
    lo = max(p.breakpoints[0], q.breakpoints[0])
    hi = min(p.breakpoints[-1], q.breakpoints[-1])
    if not lo < hi:
        return 0.0
    bps = [b for b in merged_breakpoints([p, q]) if lo <= b <= hi]
    edges = np.array([float(b) for b in bps])
    t, w = gauss_nodes(_nodes_for(p.degree + q.degree))
    width = np.diff(edges)
    x = (edges[:-1, None] + width[:, None] * t).ravel()
    wx = (width[:, None] * w).ravel()
    return float(np.sum(wx * p(x) * q(x)))


def quadrature_matrix(polys: Sequence[PiecewisePoly]) -> np.ndarray:
    """Weighted node values ``B`` with ``B.T @ B`` equal to the exact Gram matrix.

    All functions are evaluated at Gauss-Legendre nodes on the common
    refinement of their breakpoints, so each column is an exact isometric
    image of the function (for functions on those breakpoints).
    """
    bps = merged_breakpoints(polys)
    if len(bps) < 2:
        return np.zeros((0, len(polys)))
    degree = max(p.degree for p in polys)
    edges = np.array([float(b) for b in bps])
    t, w = gauss_nodes(_nodes_for(2 * degree))
    width = np.diff(edges)
    x = (edges[:-1, None] + width[:, None] * t).ravel()
    sw = np.sqrt((width[:, None] * w).ravel())
    out = np.empty((x.size, len(polys)))
    for i, p in enumerate(polys):
        out[:, i] = sw * p(x)
    return out


def gram_matrix(polys: Sequence[PiecewisePoly]) -> np.ndarray:
    """Exact L2 Gram matrix of a list of piecewise polynomials."""
    b = quadrature_matrix(polys)
    g = b.T @ b
    return (g + g.T) / 2.0
