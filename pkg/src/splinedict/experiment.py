"""End-to-end sparse approximation experiments and their reports."""

from __future__ import annotations

import functools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import cumulative_coherence
from .dictionary import Dictionary, DictionarySpec, build_dictionary
from .pursuit import AtomicDecomposition, PursuitConfig, approximate
from .signals import gen_chirp, load_signal

CHIRP = "chirp"
# forward selection maximizes |<a_i, r>| / ||a_i - P a_i||, not the plain |<a_i, r>|
SELECTION_RULE = "optimized-orthogonal"


@dataclass(frozen=True)
class SignalSpec:
    """Where the signal comes from and how it is put on the dictionary grid.

    With ``spline_projection`` the samples are replaced by their least
    squares projection onto the sampled space ``V_j``, so that every
    tolerance is reachable by both the basis and the dictionaries.
    """

    source: str = CHIRP
    c: int = 0
    d: int = 8
    resolution: int = 7
    spline_projection: bool = True

    @property
    def n_samples(self) -> int:
        return (self.d - self.c) * 2**self.resolution + 1


@functools.lru_cache(maxsize=8)
def cached_dictionary(spec: DictionarySpec) -> Dictionary:
    return build_dictionary(spec)


def make_signal(spec: SignalSpec, dict_spec: DictionarySpec) -> tuple[np.ndarray, dict]:
    if spec.resolution < dict_spec.scale + 1:
        raise ValueError("signal resolution must be at least dictionary scale + 1")
    if (spec.c, spec.d) != (dict_spec.c, dict_spec.d):
        raise ValueError("signal and dictionary intervals differ")
    if spec.source == CHIRP:
        f = gen_chirp((spec.c, spec.d), spec.n_samples)
        meta = {"source": CHIRP}
    else:
        f, meta = load_signal(spec.source, (spec.c, spec.d), spec.n_samples)
        meta["source"] = "file"
    meta["raw_norm"] = float(np.linalg.norm(f))
    if spec.spline_projection:
        basis = cached_dictionary(DictionarySpec(dict_spec.order, dict_spec.c, dict_spec.d, dict_spec.scale, 0))
        a = basis.sample(spec.resolution)
        proj = a @ np.linalg.lstsq(a, f, rcond=None)[0]
        meta["projection_residual"] = float(np.linalg.norm(f - proj) / max(np.linalg.norm(f), 1e-300))
        f = proj
    return f, meta


def decomposition_record(dec: AtomicDecomposition, dictionary: Dictionary) -> dict:
    return {
        "n_atoms": dec.n_atoms,
        "residual_norm": dec.residual_norm,
        "relative_residual": dec.relative_residual,
        "signal_norm": dec.signal_norm,
        "target": dec.target,
        "converged": dec.converged,
        "stage_counts": dec.stage_counts,
        "residual_history": dec.history,
        "projection_crosscheck": dec.crosscheck,
        "atoms": [
            {
                "index": int(i),
                "kind": dictionary[i].kind,
                "scale": dictionary[i].scale,
                "translation": str(dictionary[i].translation),
                "coefficient": float(c),
            }
            for i, c in zip(dec.indices, dec.coefficients)
        ],
    }


@dataclass
class ExperimentReport:
    signal: dict
    dictionary: dict
    config: dict
    decomposition: dict
    coherence: dict | None = None
    timing: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def n_atoms(self) -> int:
        return self.decomposition["n_atoms"]

    def to_dict(self) -> dict:
        return asdict(self)

    def reproducible_dict(self) -> dict:
        """Everything except wall-clock timing."""
        out = self.to_dict()
        out.pop("timing")
        return out

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))


def run_experiment(
    signal: SignalSpec,
    dict_spec: DictionarySpec,
    cfg: PursuitConfig,
    coherence_p: int | None = None,
    out_dir=None,
) -> ExperimentReport:
    """Build the dictionary, approximate the signal and collect a report.

    With ``out_dir`` the report, the residual curve and (if requested) the
    coherence curve are written there.
    """
    t0 = time.perf_counter()
    dictionary = cached_dictionary(dict_spec)
    f, meta = make_signal(signal, dict_spec)
    a = dictionary.sample(signal.resolution)
    t1 = time.perf_counter()
    dec = approximate(f, a, cfg)
    t2 = time.perf_counter()
    coherence = curve = None
    if coherence_p:
        curve = cumulative_coherence(dictionary.gram, coherence_p)
        coherence = {"max_p": coherence_p, "mu_1": float(curve.mu[0]), "mu_max_p": float(curve.mu[-1])}
    report = ExperimentReport(
        signal={**asdict(signal), **meta},
        dictionary={**asdict(dict_spec), "size": len(dictionary), "dim": dict_spec.dim},
        config={**asdict(cfg), "selection_rule": SELECTION_RULE},
        decomposition=decomposition_record(dec, dictionary),
        coherence=coherence,
        timing={"setup_s": t1 - t0, "pursuit_s": t2 - t1},
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write(out / "report.json")
        with open(out / "residual.csv", "w") as fh:
            fh.write("stage,step,residual\n")
            for stage, curve_vals in dec.history.items():
                for k, v in enumerate(curve_vals):
                    fh.write(f"{stage},{k},{v!r}\n")
        if curve is not None:
            curve.to_csv(out / "coherence.csv")
    return report


def sweep_tolerance(f: np.ndarray, matrices: dict, tolerances, cfg: PursuitConfig) -> list[dict]:
    """Atom counts for each named matrix at each tolerance."""
    rows = []
    for tol in tolerances:
        row = {"tolerance": float(tol)}
        c = PursuitConfig(**{**asdict(cfg), "tolerance": float(tol)})
        for name, a in matrices.items():
            dec = approximate(f, a, c)
            row[name] = dec.n_atoms
            row[f"{name}_converged"] = dec.converged
        rows.append(row)
    return rows


def calibrate_tolerance(
    f: np.ndarray,
    matrix: np.ndarray,
    target_atoms: int,
    cfg: PursuitConfig,
    lo: float = 1e-3,
    hi: float = 1e-1,
    iterations: int = 14,
) -> tuple[float, AtomicDecomposition]:
    """Bisect ``log(tolerance)`` for a decomposition with about ``target_atoms`` atoms.

    Assumes the atom count decreases as the tolerance grows; returns the
    closest hit seen.
    """
    best = None

    def run(tol):
        nonlocal best
        dec = approximate(f, matrix, PursuitConfig(**{**asdict(cfg), "tolerance": tol}))
        if best is None or abs(dec.n_atoms - target_atoms) < abs(best[1].n_atoms - target_atoms):
            best = (tol, dec)
        return dec.n_atoms

    a, b = math.log(lo), math.log(hi)
    run(lo)
    run(hi)
    for _ in range(iterations):
        mid = (a + b) / 2
        n = run(math.exp(mid))
        if n == target_atoms:
            break
        if n > target_atoms:
            a = mid
        else:
            b = mid
    return best
