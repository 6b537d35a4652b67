"""Greedy atomic decomposition: forward selection, swapping, backward pruning.

All stages keep the coefficients equal to the orthogonal projection of the
signal onto the span of the selected atoms.  Forward selection uses the
optimized orthogonal criterion: the next atom is the one whose component
orthogonal to the current span makes the largest normalized angle with the
residual, which is the same as choosing the atom that minimizes the
post-projection residual.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

log = logging.getLogger(__name__)

# orthogonal remainders this small relative to the column are rounding noise
_DEPENDENT_RTOL = 1e-13


@dataclass(frozen=True)
class PursuitConfig:
    """Stopping and acceptance parameters for :func:`approximate`.

    ``tolerance`` is relative (``||f - f^N|| / ||f||``) unless
    ``relative=False``.  ``min_residual_gain`` is relative to ``||f||``: a
    swap must beat it, and forward selection stops once no atom can.
    ``in_span_threshold`` is relative to the atom norm.
    """

    tolerance: float = 1e-2
    relative: bool = True
    max_atoms: int | None = None
    swap_enabled: bool = True
    backward_enabled: bool = True
    min_residual_gain: float = 1e-12
    in_span_threshold: float = 1e-10
    max_swap_passes: int = 50
    crosscheck_every: int = 10

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.min_residual_gain < 0:
            raise ValueError("min_residual_gain must be non-negative")
        if self.max_atoms is not None and self.max_atoms < 0:
            raise ValueError("max_atoms must be non-negative")

    def threshold(self, signal_norm: float) -> float:
        """Absolute residual target."""
        return self.tolerance * signal_norm if self.relative else self.tolerance


@dataclass
class AtomicDecomposition:
    """Selected atoms with their joint projection coefficients.

    ``history`` maps a stage name to the residual norms recorded during that
    stage; ``stage_counts`` maps it to the atom count at its end.
    """

    indices: list[int]
    coefficients: np.ndarray
    residual_norm: float
    signal_norm: float
    target: float
    converged: bool
    signal: np.ndarray = field(repr=False)
    history: dict[str, list[float]] = field(default_factory=dict)
    stage_counts: dict[str, int] = field(default_factory=dict)
    crosscheck: float = 0.0

    @property
    def n_atoms(self) -> int:
        return len(self.indices)

    @property
    def relative_residual(self) -> float:
        return self.residual_norm / self.signal_norm if self.signal_norm else 0.0

    def approximation(self, matrix: np.ndarray) -> np.ndarray:
        if not self.indices:
            return np.zeros_like(self.signal)
        return matrix[:, self.indices] @ self.coefficients

    def residual(self, matrix: np.ndarray) -> np.ndarray:
        return self.signal - self.approximation(matrix)


class Projector:
    """Orthonormal basis of a growing column set, with twice-iterated Gram-Schmidt.

    Keeps ``Q`` (orthonormal columns) and upper triangular ``R`` with
    ``A[:, selected] = Q @ R``.
    """

    def __init__(self, nrows: int, capacity: int = 16):
        self._q = np.zeros((nrows, max(capacity, 1)))
        self._r = np.zeros((max(capacity, 1), max(capacity, 1)))
        self.size = 0

    @classmethod
    def from_columns(cls, columns: np.ndarray) -> "Projector":
        proj = cls(columns.shape[0], columns.shape[1])
        for col in columns.T:
            proj.append(col)
        return proj

    @property
    def Q(self) -> np.ndarray:
        return self._q[:, : self.size]

    @property
    def R(self) -> np.ndarray:
        return self._r[: self.size, : self.size]

    def orthogonal_part(self, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        q = self.Q
        beta = a.astype(float, copy=True)
        r = np.zeros(self.size)
        for _ in range(2):
            h = q.T @ beta
            beta -= q @ h
            r += h
        return beta, r

    def append(self, a: np.ndarray) -> float:
        """Add a column; returns the norm of its component orthogonal to the span."""
        beta, r = self.orthogonal_part(a)
        nb = float(np.linalg.norm(beta))
        if nb <= _DEPENDENT_RTOL * float(np.linalg.norm(a)):
            raise np.linalg.LinAlgError("column lies in the current span")
        n = self.size
        if n == self._q.shape[1]:
            grow = max(2 * n, 1)
            q = np.zeros((self._q.shape[0], grow))
            q[:, :n] = self._q[:, :n]
            rr = np.zeros((grow, grow))
            rr[:n, :n] = self._r[:n, :n]
            self._q, self._r = q, rr
        self._q[:, n] = beta / nb
        self._r[:n, n] = r
        self._r[n, n] = nb
        self.size += 1
        return nb

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        if self.size == 0:
            return np.zeros(0)
        return solve_triangular(self.R, self.Q.T @ f)

    def residual(self, f: np.ndarray) -> np.ndarray:
        q = self.Q
        r = f - q @ (q.T @ f)
        return r - q @ (q.T @ r)


def _matrix(dictionary) -> np.ndarray:
    if isinstance(dictionary, np.ndarray):
        return dictionary
    return dictionary.matrix


def lstsq_coefficients(matrix: np.ndarray, indices: Sequence[int], f: np.ndarray) -> np.ndarray:
    if not len(indices):
        return np.zeros(0)
    return np.linalg.lstsq(matrix[:, list(indices)], f, rcond=None)[0]


def coefficient_discrepancy(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(b)), 1e-300)
    return float(np.linalg.norm(a - b)) / scale


def _finish(matrix, f, indices, fnorm, target, history, counts, crosscheck, converged_hint=None):
    proj = Projector.from_columns(matrix[:, indices]) if indices else None
    coef = proj.coefficients(f) if proj else np.zeros(0)
    resid = f - matrix[:, indices] @ coef if indices else f.copy()
    rnorm = float(np.linalg.norm(resid))
    if indices:
        crosscheck = max(crosscheck, coefficient_discrepancy(coef, lstsq_coefficients(matrix, indices, f)))
    converged = rnorm <= target if converged_hint is None else converged_hint
    return AtomicDecomposition(
        indices=list(indices),
        coefficients=coef,
        residual_norm=rnorm,
        signal_norm=fnorm,
        target=target,
        converged=converged,
        signal=f,
        history=history,
        stage_counts=counts,
        crosscheck=crosscheck,
    )


def forward_select(f, dictionary, cfg: PursuitConfig) -> AtomicDecomposition:
    """Stage one: add atoms one at a time until the residual reaches the target."""
    a = _matrix(dictionary)
    f = np.asarray(f, dtype=float)
    nrows, natoms = a.shape
    fnorm = float(np.linalg.norm(f))
    target = cfg.threshold(fnorm)
    max_atoms = natoms if cfg.max_atoms is None else min(cfg.max_atoms, natoms)
    colnorm2 = np.einsum("ij,ij->j", a, a)
    thr2 = (cfg.in_span_threshold**2) * colnorm2

    proj = Projector(nrows, min(max_atoms, nrows) + 1)
    indices: list[int] = []
    excluded = np.zeros(natoms, dtype=bool)
    proj2 = np.zeros(natoms)
    r = f.copy()
    rnorm = fnorm
    history = [rnorm]
    crosscheck = 0.0

    min_gain = cfg.min_residual_gain * fnorm
    while rnorm > target and len(indices) < min(max_atoms, nrows):
        corr = a.T @ r
        beta2 = np.maximum(colnorm2 - proj2, 0.0)
        valid = ~excluded & (beta2 > thr2)
        if not valid.any():
            break
        score = np.full(natoms, -np.inf)
        score[valid] = np.abs(corr[valid]) / np.sqrt(beta2[valid])
        best = int(np.argmax(score))
        if rnorm - np.sqrt(max(rnorm**2 - score[best] ** 2, 0.0)) <= min_gain:
            break
        beta, _ = proj.orthogonal_part(a[:, best])
        if float(beta @ beta) <= thr2[best]:
            excluded[best] = True
            continue
        proj.append(a[:, best])
        indices.append(best)
        excluded[best] = True
        qn = proj.Q[:, -1]
        proj2 += (qn @ a) ** 2
        r = proj.residual(f)
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)
        if cfg.crosscheck_every and len(indices) % cfg.crosscheck_every == 0:
            crosscheck = max(
                crosscheck,
                coefficient_discrepancy(proj.coefficients(f), lstsq_coefficients(a, indices, f)),
            )

    dec = _finish(a, f, indices, fnorm, target, {"forward": history}, {"forward": len(indices)}, crosscheck)
    if not dec.converged:
        log.info("forward selection stopped at %d atoms above target", dec.n_atoms)
    return dec


def _removal_state(a, f, indices):
    proj = Projector.from_columns(a[:, indices])
    q, rmat = proj.Q, proj.R
    qf = q.T @ f
    p = q.T @ a
    r = proj.residual(f)
    return proj, rmat, qf, p, r


def swap_refine(dec: AtomicDecomposition, dictionary, cfg: PursuitConfig) -> AtomicDecomposition:
    """Stage two: replace held atoms by better dictionary atoms until no swap helps.

    For each held atom the best replacement is found in closed form from the
    factorization of the current selection; a swap is accepted only if the
    recomputed residual drops by more than ``min_residual_gain * ||f||``.
    """
    a = _matrix(dictionary)
    f = dec.signal
    indices = list(dec.indices)
    history = dict(dec.history)
    counts = dict(dec.stage_counts)
    curve = [dec.residual_norm]
    if len(indices) == 0:
        history["swap"] = curve
        counts["swap"] = 0
        return replace(dec, history=history, stage_counts=counts)

    delta = cfg.min_residual_gain * dec.signal_norm
    colnorm2 = np.einsum("ij,ij->j", a, a)
    thr2 = (cfg.in_span_threshold**2) * colnorm2
    proj, rmat, qf, p, r = _removal_state(a, f, indices)
    rnorm = float(np.linalg.norm(r))
    corr = a.T @ r
    p2 = np.einsum("ij,ij->j", p, p)

    for _ in range(cfg.max_swap_passes):
        accepted = False
        for s in range(len(indices)):
            e = np.zeros(len(indices))
            e[s] = 1.0
            z = solve_triangular(rmat, e, trans="T")
            z /= np.linalg.norm(z)
            w = float(z @ qf)
            v = z @ p
            base2 = rnorm**2 + w**2
            beta2 = colnorm2 - p2 + v**2
            num = corr + w * v
            valid = beta2 > thr2
            valid[indices] = False
            valid[indices[s]] = True
            gain = np.full(a.shape[1], -np.inf)
            gain[valid] = num[valid] ** 2 / beta2[valid]
            best = int(np.argmax(gain))
            if best == indices[s]:
                continue
            predicted = np.sqrt(max(base2 - gain[best], 0.0))
            if not predicted < rnorm - delta:
                continue
            trial = indices.copy()
            trial[s] = best
            try:
                state = _removal_state(a, f, trial)
            except np.linalg.LinAlgError:
                continue
            new_norm = float(np.linalg.norm(state[4]))
            if new_norm < rnorm - delta:
                indices = trial
                proj, rmat, qf, p, r = state
                rnorm = new_norm
                corr = a.T @ r
                p2 = np.einsum("ij,ij->j", p, p)
                curve.append(rnorm)
                accepted = True
        if not accepted:
            break

    history["swap"] = curve
    counts["swap"] = len(indices)
    return _finish(a, f, indices, dec.signal_norm, dec.target, history, counts, dec.crosscheck)


def backward_prune(dec: AtomicDecomposition, dictionary, budget: float | None = None) -> AtomicDecomposition:
    """Stage three: drop atoms while the residual stays within ``budget``.

    ``budget`` is an absolute residual norm and defaults to the target of the
    forward stage.  Each step removes the atom whose removal increases the
    residual the least.
    """
    a = _matrix(dictionary)
    f = dec.signal
    budget = dec.target if budget is None else budget
    indices = list(dec.indices)
    history = dict(dec.history)
    counts = dict(dec.stage_counts)
    curve = [dec.residual_norm]

    while indices:
        proj = Projector.from_columns(a[:, indices])
        coef = proj.coefficients(f)
        rinv = solve_triangular(proj.R, np.eye(len(indices)))
        increase = coef**2 / np.einsum("ij,ij->i", rinv, rinv)
        rnorm2 = float(np.linalg.norm(proj.residual(f)) ** 2)
        s = int(np.argmin(increase))
        if np.sqrt(rnorm2 + increase[s]) > budget:
            break
        trial = indices[:s] + indices[s + 1 :]
        if trial:
            new_norm = float(np.linalg.norm(Projector.from_columns(a[:, trial]).residual(f)))
        else:
            new_norm = float(np.linalg.norm(f))
        if new_norm > budget:
            break
        indices = trial
        curve.append(new_norm)

    history["backward"] = curve
    counts["backward"] = len(indices)
    return _finish(a, f, indices, dec.signal_norm, dec.target, history, counts, dec.crosscheck)


def approximate(f, dictionary, cfg: PursuitConfig) -> AtomicDecomposition:
    """Forward selection, then swapping and backward pruning if enabled."""
    dec = forward_select(f, dictionary, cfg)
    if cfg.swap_enabled:
        dec = swap_refine(dec, dictionary, cfg)
    if cfg.backward_enabled:
        dec = backward_prune(dec, dictionary, dec.target)
    return dec
