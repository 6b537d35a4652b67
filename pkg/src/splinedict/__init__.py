"""Cardinal spline wavelet dictionaries on a compact interval and greedy sparse approximation."""

__version__ = "0.1.0"

from .poly import Dyadic, PiecewisePoly, evaluate, inner_product, linear_combination, restrict
from .mra import SpaceParams, Atom, bspline, chui_wang_wavelet, basis_V, basis_W
from .dictionary import Dictionary, DictionarySpec, build_dictionary, dict_scaling, dict_wavelet
from .pursuit import AtomicDecomposition, PursuitConfig, approximate

__all__ = [
    "Atom",
    "AtomicDecomposition",
    "Dictionary",
    "DictionarySpec",
    "Dyadic",
    "PiecewisePoly",
    "PursuitConfig",
    "SpaceParams",
    "approximate",
    "basis_V",
    "basis_W",
    "bspline",
    "build_dictionary",
    "chui_wang_wavelet",
    "dict_scaling",
    "dict_wavelet",
    "evaluate",
    "inner_product",
    "linear_combination",
    "restrict",
]
