"""Coherence of dictionaries and verification that they span spline spaces.

Two independent routes certify that a family spans ``V_J``:

* numerically, from the singular values of the exact Gram factor
  (:func:`verify_span`);
* constructively, by writing every atom in the fine B-spline basis through
  the two-scale relations and either back-substituting
  (:func:`back_substitution`) or computing the exact rank of the resulting
  rational coefficient matrix modulo a large prime (:func:`exact_rank`).
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dictionary import Dictionary
from .mra import (
    SCALING,
    WAVELET,
    Atom,
    SpaceParams,
    basis_V,
    bspline_two_scale_exact,
    chui_wang_coefficients_exact,
    make_atom,
    wavelet_length,
)
from .poly import Dyadic, PiecewisePoly, linear_combination, quadrature_matrix

RANK_RTOL = 1e-8
PRIME = 2**31 - 1


# ---------------------------------------------------------------------------
# cumulative coherence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoherenceCurve:
    p: np.ndarray
    mu: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p", "mu"])
            for p, mu in zip(self.p, self.mu):
                writer.writerow([int(p), repr(float(mu))])


def cumulative_coherence(gram: np.ndarray, max_p: int) -> CoherenceCurve:
    """``mu(p)`` for ``p = 1 .. max_p`` from the Gram matrix of unit-norm atoms.

    For a fixed atom the worst set of ``p`` others is simply its ``p``
    largest absolute inner products, so the maximum over subsets reduces to
    sorting each row.
    """
    g = np.abs(np.asarray(gram, dtype=float))
    n = g.shape[0]
    if not 1 <= max_p < n:
        raise ValueError(f"max_p must lie in [1, {n - 1}], got {max_p}")
    np.fill_diagonal(g, -np.inf)
    top = -np.sort(-g, axis=1)[:, :max_p]
    sums = np.cumsum(top, axis=1)
    return CoherenceCurve(np.arange(1, max_p + 1), sums.max(axis=0))


# ---------------------------------------------------------------------------
# refinement masks and expansions
# ---------------------------------------------------------------------------


def _convolve_exact(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for k, y in enumerate(b):
                out[i + k] += x * y
    return out


@functools.lru_cache(maxsize=None)
def refinement_mask(kind: str, m: int, levels: int) -> tuple[Fraction, ...]:
    """Exact ``h`` with ``f(x) = sum_n h_n phi(2**levels x - n)``.

    ``f`` is the order-``m`` B-spline or Chui-Wang wavelet; ``levels >= 1``
    for wavelets, ``>= 0`` for B-splines.
    """
    p = bspline_two_scale_exact(m)
    if kind == SCALING:
        h = [Fraction(1)]
        steps = levels
    elif kind == WAVELET:
        if levels < 1:
            raise ValueError("a wavelet needs at least one refinement level")
        h = list(chui_wang_coefficients_exact(m))
        steps = levels - 1
    else:
        raise ValueError(f"unknown atom kind {kind!r}")
    for _ in range(steps):
        up = [Fraction(0)] * (2 * len(h) - 1)
        up[::2] = h
        h = _convolve_exact(up, p)
    return tuple(h)


def fine_index_range(m: int, c: int, d: int, scale: int) -> range:
    """Integers ``n`` in ``(2**scale c - m, 2**scale d)``: restricted basis of ``V_scale``."""
    return range(2**scale * c - m + 1, 2**scale * d)


def _fine_coordinates(atom: Atom, target: int) -> tuple[int, list[Fraction]]:
    """First fine index and exact mask (without the amplitude factor)."""
    levels = target - atom.scale
    shift = atom.translation.scaled(levels)
    if levels < 0 or not shift.is_integer():
        raise ValueError(f"{atom.label} does not lie in V_{target}")
    return shift.num, refinement_mask(atom.kind, atom.order, levels)


@dataclass(frozen=True)
class RefinementExpansion:
    """``atom = sum_n g[n] phi_{J,n}`` restricted to ``[c, d]``, ``J = scale + refine``."""

    scale: int
    translation: Dyadic
    refine: int
    order: int
    interval: tuple[int, int]
    indices: np.ndarray
    coeffs: np.ndarray

    @property
    def fine_scale(self) -> int:
        return self.scale + self.refine

    @property
    def window(self) -> tuple[int, int]:
        return int(self.indices[0]), int(self.indices[-1])

    def coefficient(self, n: int) -> float:
        lo, hi = self.window
        return float(self.coeffs[n - lo]) if lo <= n <= hi else 0.0

    def reconstruct(self) -> PiecewisePoly:
        fine = [
            make_atom(SCALING, self.order, self.fine_scale, int(n), self.interval).shape
            for n in self.indices
        ]
        return linear_combination(list(self.coeffs), fine)


def refinement_expansion(atom: Atom, ell: int) -> RefinementExpansion:
    """Coefficients of a wavelet atom ``psi_{j,k}``, ``k`` on ``Z / 2**ell``, in ``V_{j+ell}``.

    Indices outside ``(2**(j+ell) c - m, 2**(j+ell) d)`` vanish on ``[c, d]``
    and are dropped.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if atom.kind != WAVELET:
        raise ValueError("refinement_expansion expects a wavelet atom")
    c, d = atom.interval
    m, j, k = atom.order, atom.scale, atom.translation
    w = wavelet_length(m)
    if k.scaled(ell).exp != 0 or not (Dyadic(2**j * c - w) < k < Dyadic(2**j * d)):
        raise ValueError(f"translation {k} is not in the dictionary index set for ell={ell}")
    first, mask = _fine_coordinates(atom, j + ell)
    amp = 2.0 ** (-ell / 2)
    valid = fine_index_range(m, c, d, j + ell)
    idx = [first + t for t in range(len(mask)) if first + t in valid]
    g = [amp * float(mask[n - first]) for n in idx]
    return RefinementExpansion(j, k, ell, m, (c, d), np.array(idx), np.array(g))


# ---------------------------------------------------------------------------
# back-substitution
# ---------------------------------------------------------------------------


def _wavelet_family_params(atoms: Sequence[Atom]) -> tuple[int, int, int, int]:
    kinds = {a.kind for a in atoms}
    scales = {a.scale for a in atoms}
    orders = {a.order for a in atoms}
    intervals = {a.interval for a in atoms}
    if kinds != {WAVELET} or len(scales) != 1 or len(orders) != 1 or len(intervals) != 1:
        raise ValueError("expected the wavelet atoms of a single family W_{j,ell}")
    (c, d), = intervals
    return orders.pop(), scales.pop(), c, d


def back_substitution(atoms: Sequence[Atom], ell: int) -> tuple[range, np.ndarray]:
    """Write every ``phi_{j+ell,n}`` as a combination of the atoms of ``W_{j,ell}``.

    Returns the fine index range and a matrix ``X`` with
    ``phi_{j+ell,n} = sum_i X[n - n0, i] atoms[i].shape``.  Inner and right
    boundary indices are eliminated from the right, left boundary indices
    from the left, each step dividing by a pivot coefficient.
    """
    m, j, c, d = _wavelet_family_params(atoms)
    w = wavelet_length(m)
    fine = j + ell
    nrange = fine_index_range(m, c, d, fine)
    pos = {a.translation: i for i, a in enumerate(atoms)}
    x = np.zeros((len(nrange), len(atoms)))
    n0 = nrange.start

    def expansion(k: Dyadic) -> tuple[int, RefinementExpansion]:
        if k not in pos:
            raise ValueError(f"pivot atom with translation {k} is missing from the family")
        i = pos[k]
        return i, refinement_expansion(atoms[i], ell)

    for n in range(2**fine * d - 1, 2**fine * c - 1, -1):
        i, ex = expansion(Dyadic(n, ell))
        row = np.zeros(len(atoms))
        row[i] = 1.0
        for l, g in zip(ex.indices, ex.coeffs):
            if l > n:
                row -= g * x[l - n0]
        x[n - n0] = row / ex.coefficient(n)

    for n in range(2**fine * c - m + 1, 2**fine * c):
        i, ex = expansion(Dyadic(n + m, ell) - w)
        row = np.zeros(len(atoms))
        row[i] = 1.0
        for l, g in zip(ex.indices, ex.coeffs):
            if l < n:
                row -= g * x[l - n0]
        x[n - n0] = row / ex.coefficient(n)

    return nrange, x


def express_fine_scaling(n: int, atoms: Sequence[Atom], ell: int) -> np.ndarray:
    """Coefficients over ``atoms`` reproducing ``phi_{j+ell,n}`` on ``[c, d]``."""
    nrange, x = back_substitution(atoms, ell)
    if n not in nrange:
        raise ValueError(f"n={n} outside the fine index range [{nrange.start}, {nrange.stop - 1}]")
    return x[n - nrange.start]


def reconstruction_error(coeffs: np.ndarray, atoms: Sequence[Atom], target: PiecewisePoly, npoints: int = 4001) -> float:
    """Sup-norm error of ``sum coeffs[i] atoms[i]`` against ``target``, relative to ``sup |target|``."""
    keep = [(c, a.shape) for c, a in zip(coeffs, atoms) if c != 0.0]
    approx = linear_combination([c for c, _ in keep], [s for _, s in keep])
    c, d = atoms[0].interval
    xs = np.linspace(c, d, npoints)
    ref = target(xs)
    return float(np.max(np.abs(approx(xs) - ref)) / np.max(np.abs(ref)))


# ---------------------------------------------------------------------------
# rank and span
# ---------------------------------------------------------------------------


def singular_values(atoms_or_quadrature) -> np.ndarray:
    """Singular values of the unit-normalized exact Gram factor, descending.

    Their squares are the eigenvalues of the normalized Gram matrix; taking
    them from an SVD of the factor keeps the small ones accurate.
    """
    b = atoms_or_quadrature
    if not isinstance(b, np.ndarray):
        b = quadrature_matrix([a.shape for a in b])
    b = b / np.linalg.norm(b, axis=0)
    return np.linalg.svd(b, compute_uv=False)


def numerical_rank(values: np.ndarray, rtol: float = RANK_RTOL) -> int:
    values = np.asarray(values)
    if values.size == 0:
        return 0
    return int(np.sum(values > rtol * values.max()))


def gram_eigen_rank(gram: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Count of Gram eigenvalues above ``rtol`` times the largest."""
    return numerical_rank(np.linalg.eigvalsh(gram), rtol)


def _modinv(a: int, p: int = PRIME) -> int:
    return pow(a % p, p - 2, p)


def rank_mod_p(matrix: np.ndarray, p: int = PRIME) -> int:
    """Rank of an integer matrix over ``GF(p)`` by Gaussian elimination."""
    a = np.array(matrix, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(a[rank:, col])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        a[rank] = (a[rank] * _modinv(int(a[rank, col]), p)) % p
        below = np.nonzero(a[rank + 1 :, col])[0] + rank + 1
        if below.size:
            factors = a[below, col][:, None]
            a[below] = (a[below] - factors * a[rank]) % p
        rank += 1
    return rank


def coordinate_matrix_mod_p(atoms: Sequence[Atom], target: int, p: int = PRIME) -> np.ndarray:
    """Exact fine-basis coordinates of the atoms (up to column scaling), reduced mod ``p``."""
    m = atoms[0].order
    c, d = atoms[0].interval
    nrange = fine_index_range(m, c, d, target)
    out = np.zeros((len(atoms), len(nrange)), dtype=np.int64)
    for i, atom in enumerate(atoms):
        first, mask = _fine_coordinates(atom, target)
        for t, h in enumerate(mask):
            n = first + t
            if h and n in nrange:
                out[i, n - nrange.start] = h.numerator % p * _modinv(h.denominator, p) % p
    return out


def exact_rank(atoms: Sequence[Atom], target: int) -> int:
    """Rank of the atoms as elements of ``V_target``, certified in exact arithmetic.

    The rank over ``GF(p)`` never exceeds the rank over the rationals, and
    the rational rank never exceeds ``dim V_target``, so a full rank modulo
    ``p`` proves the atoms span ``V_target``.  A deficient result is only a
    lower bound.
    """
    return rank_mod_p(coordinate_matrix_mod_p(atoms, target))


@dataclass(frozen=True)
class SpanReport:
    size: int
    rank: int
    expected_dim: int
    smallest_signal: float
    largest_null: float
    max_projection_residual: float
    exact_rank: int | None = None

    @property
    def passed(self) -> bool:
        ok = self.rank == self.expected_dim and self.max_projection_residual <= RANK_RTOL
        if self.exact_rank is not None:
            ok = ok and self.exact_rank == self.expected_dim
        return ok

    def as_dict(self) -> dict:
        return {
            "size": self.size,
            "rank": self.rank,
            "expected_dim": self.expected_dim,
            "smallest_signal": self.smallest_signal,
            "largest_null": self.largest_null,
            "max_projection_residual": self.max_projection_residual,
            "exact_rank": self.exact_rank,
            "passed": self.passed,
        }


def gram_eigenvalues(atoms_or_quadrature) -> np.ndarray:
    """Eigenvalues of the unit-normalized exact Gram matrix, descending.

    Computed as squared singular values of the Gram factor, which resolves
    eigenvalues far below ``eps`` times the largest.
    """
    return singular_values(atoms_or_quadrature) ** 2


def verify_span(
    atoms: Sequence[Atom] | Dictionary, target: SpaceParams, exact: bool = False, rtol: float = RANK_RTOL
) -> SpanReport:
    """Check numerically that the atoms span ``V_target``.

    The rank counts eigenvalues of the normalized exact Gram matrix above
    ``rtol`` times the largest.  Independently, every restricted B-spline of
    the target basis is least-squares projected onto the span of the atoms
    (directions below rounding level dropped); the largest relative
    residual is reported.  With ``exact`` the rank is also certified in
    exact arithmetic.
    """
    atoms = list(atoms.atoms if isinstance(atoms, Dictionary) else atoms)
    fine = basis_V(target)
    b = quadrature_matrix([a.shape for a in atoms] + [a.shape for a in fine])
    bd, bf = b[:, : len(atoms)], b[:, len(atoms) :]
    bd = bd / np.linalg.norm(bd, axis=0)
    u, s, _ = np.linalg.svd(bd, full_matrices=False)
    eig = (s / s[0]) ** 2
    rank = numerical_rank(eig, rtol)
    ur = u[:, : numerical_rank(s, max(bd.shape) * np.finfo(float).eps)]
    resid = bf - ur @ (ur.T @ bf)
    rel = np.linalg.norm(resid, axis=0) / np.linalg.norm(bf, axis=0)
    dim = target.dim_V()
    return SpanReport(
        size=len(atoms),
        rank=rank,
        expected_dim=dim,
        smallest_signal=float(eig[min(dim, len(eig)) - 1]),
        largest_null=float(eig[dim]) if len(eig) > dim else 0.0,
        max_projection_residual=float(rel.max()),
        exact_rank=exact_rank(atoms, target.scale) if exact else None,
    )
