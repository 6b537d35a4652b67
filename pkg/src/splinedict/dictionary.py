"""Redundant spline and spline-wavelet dictionaries on a compact interval.

A dictionary ``D(j, l)`` spans the cardinal spline space ``V_j``.  For
``l = 0`` it is the classical cut-off wavelet basis
``V_0 + W_0 + ... + W_{j-1}``; for ``l >= 1`` every family is translated on
the finer lattice ``Z / 2**l`` and the top ``l - 1`` wavelet scales are
dropped, since translating at step ``2**-(i+l)`` already spans ``V_{i+l}``.
"""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .mra import SCALING, WAVELET, Atom, SpaceParams, basis_V, basis_W, make_atom
from .poly import dyadic_range, quadrature_matrix


def dict_scaling(params: SpaceParams, ell: int) -> list[Atom]:
    """B-splines ``phi_{j,k}`` with ``k`` on ``Z / 2**ell`` inside ``(2^j c - m, 2^j d)``."""
    if ell < 0:
        raise ValueError("refinement ell must be >= 0")
    if ell == 0:
        return basis_V(params)
    j, m = params.scale, params.order
    ks = dyadic_range(2**j * params.c - m, 2**j * params.d, ell)
    return [make_atom(SCALING, m, j, k, params.interval) for k in ks]


def dict_wavelet(params: SpaceParams, ell: int) -> list[Atom]:
    """Wavelets ``psi_{j,k}`` with ``k`` on ``Z / 2**ell`` inside ``(2^j c - w, 2^j d)``.

    Every translate whose support meets ``(c, d)`` is kept; nothing is cut.
    """
    if ell < 1:
        raise ValueError("dict_wavelet needs ell >= 1; use basis_W for ell = 0")
    j, w = params.scale, params.w
    ks = dyadic_range(2**j * params.c - w, 2**j * params.d, ell)
    return [make_atom(WAVELET, params.order, j, k, params.interval) for k in ks]


@dataclass(frozen=True)
class DictionarySpec:
    order: int
    c: int
    d: int
    scale: int
    refine: int = 0

    def __post_init__(self):
        if self.refine < 0:
            raise ValueError("refine must be >= 0")
        if self.refine > self.scale:
            raise ValueError(f"refine={self.refine} exceeds scale={self.scale}")
        self.params  # validates order/interval

    @property
    def params(self) -> SpaceParams:
        return SpaceParams(self.order, self.c, self.d, self.scale)

    @property
    def dim(self) -> int:
        return self.params.dim_V()

    @property
    def name(self) -> str:
        return f"D[{self.scale},{self.refine}]"


def _subspaces(spec: DictionarySpec) -> list[tuple[str, int]]:
    if spec.refine == 0:
        return [(SCALING, 0)] + [(WAVELET, i) for i in range(spec.scale)]
    return [(SCALING, 0)] + [(WAVELET, i) for i in range(spec.scale - spec.refine + 1)]


class Dictionary:
    """Ordered atoms of ``D(j, l)`` with cached Gram and sampled matrices.

    Atoms are ordered coarse to fine by subspace, then by translation.
    """

    def __init__(self, spec: DictionarySpec, atoms: Sequence[Atom]):
        self.spec = spec
        self.atoms = tuple(atoms)
        self._samples: dict[int, np.ndarray] = {}

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __getitem__(self, i):
        return self.atoms[i]

    def __repr__(self):
        return f"Dictionary({self.spec}, atoms={len(self)})"

    @property
    def default_resolution(self) -> int:
        return self.spec.scale + 1

    @functools.cached_property
    def quadrature(self) -> np.ndarray:
        """Weighted Gauss node values; ``B.T @ B`` is the exact Gram of the raw atoms."""
        return quadrature_matrix([a.shape for a in self.atoms])

    @functools.cached_property
    def norms(self) -> np.ndarray:
        return np.array([a.norm for a in self.atoms])

    @functools.cached_property
    def gram(self) -> np.ndarray:
        return gram(self)

    def grid(self, r: int | None = None) -> np.ndarray:
        r = self.default_resolution if r is None else r
        return sample_grid(self.spec.c, self.spec.d, r)

    def sample(self, r: int | None = None) -> np.ndarray:
        r = self.default_resolution if r is None else r
        if r not in self._samples:
            self._samples[r] = sample(self, r)
        return self._samples[r]

    @property
    def matrix(self) -> np.ndarray:
        """Unit-normalized sampled atoms on the default grid ``2**-(j+1)``."""
        return self.sample()

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for a in self.atoms:
            key = f"{a.kind}:{a.scale}"
            out[key] = out.get(key, 0) + 1
        return out

    def manifest(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "dim": self.spec.dim,
            "size": len(self),
            "counts": self.counts(),
            "atoms": [
                {
                    "index": i,
                    "kind": a.kind,
                    "scale": a.scale,
                    "translation": str(a.translation),
                    "support": [str(v) for v in a.shape.support] if a.shape.support else None,
                    "unrestricted_support": [str(v) for v in a.unrestricted_support],
                }
                for i, a in enumerate(self.atoms)
            ],
        }

    def write_manifest(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(), fh, indent=2)


def build_dictionary(spec: DictionarySpec) -> Dictionary:
    params = spec.params
    atoms: list[Atom] = []
    for kind, i in _subspaces(spec):
        p = params.at_scale(i)
        if spec.refine == 0:
            atoms += basis_V(p) if kind == SCALING else basis_W(p)
        else:
            atoms += dict_scaling(p, spec.refine) if kind == SCALING else dict_wavelet(p, spec.refine)
    return Dictionary(spec, atoms)


def normalized_gram(atoms_or_quadrature) -> np.ndarray:
    """Exact Gram matrix of unit-normalized atoms."""
    b = atoms_or_quadrature
    if not isinstance(b, np.ndarray):
        b = quadrature_matrix([a.shape for a in b])
    g = b.T @ b
    s = 1.0 / np.sqrt(np.diag(g))
    g = g * s[:, None] * s[None, :]
    g = (g + g.T) / 2.0
    np.fill_diagonal(g, 1.0)
    return g


def gram(dictionary: Dictionary) -> np.ndarray:
    return normalized_gram(dictionary.quadrature)


def sample_grid(c: float, d: float, r: int) -> np.ndarray:
    """Closed uniform grid on ``[c, d]`` with step ``2**-r``."""
    n = int(round((d - c) * 2**r))
    return c + np.arange(n + 1) / 2.0**r


def sample(dictionary: Dictionary, r: int) -> np.ndarray:
    """Atoms evaluated on the closed grid of step ``2**-r``, columns unit-normalized.

    The right endpoint ``d`` is sampled as a left limit so the grid sees the
    closed interval.
    """
    if r < dictionary.spec.scale + 1:
        raise ValueError(
            f"grid resolution r={r} must be >= scale + 1 = {dictionary.spec.scale + 1}"
        )
    x = sample_grid(dictionary.spec.c, dictionary.spec.d, r)
    out = np.empty((x.size, len(dictionary)))
    for i, a in enumerate(dictionary.atoms):
        col = a.shape(x)
        col[-1] = a.shape(x[-1], side="left")
        out[:, i] = col
    out /= np.linalg.norm(out, axis=0)
    return out
