"""Forward selection, swapping and backward pruning against brute-force oracles."""

from itertools import combinations

import numpy as np
import pytest

from splinedict.pursuit import (
    AtomicDecomposition,
    Projector,
    PursuitConfig,
    approximate,
    backward_prune,
    forward_select,
    lstsq_coefficients,
    swap_refine,
)

FORWARD_ONLY = PursuitConfig(tolerance=1e-12, swap_enabled=False, backward_enabled=False)


def _unit_columns(rng, n, k):
    a = rng.standard_normal((n, k))
    return a / np.linalg.norm(a, axis=0)


def _residual_norm(a, idx, f):
    if not idx:
        return float(np.linalg.norm(f))
    c = np.linalg.lstsq(a[:, idx], f, rcond=None)[0]
    return float(np.linalg.norm(f - a[:, idx] @ c))


def _orthogonality(a, dec):
    if not dec.indices:
        return 0.0
    r = dec.residual(a)
    return float(np.max(np.abs(a[:, dec.indices].T @ r)) / dec.signal_norm)


class TestProjector:
    def test_qr_factorization(self, rng):
        a = rng.standard_normal((30, 8))
        proj = Projector.from_columns(a)
        np.testing.assert_allclose(proj.Q.T @ proj.Q, np.eye(8), atol=1e-14)
        np.testing.assert_allclose(proj.Q @ proj.R, a, atol=1e-13)
        assert np.allclose(proj.R, np.triu(proj.R))

    def test_dependent_column_rejected(self, rng):
        a = rng.standard_normal((10, 2))
        proj = Projector.from_columns(a)
        with pytest.raises(np.linalg.LinAlgError):
            proj.append(a @ [1.0, -2.0])

    def test_ill_conditioned_columns_stay_orthogonal(self):
        x = np.linspace(0, 1, 200)
        a = np.vander(x, 12, increasing=True)
        proj = Projector.from_columns(a)
        np.testing.assert_allclose(proj.Q.T @ proj.Q, np.eye(12), atol=1e-12)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"tolerance": 0.0}, {"min_residual_gain": -1.0}, {"max_atoms": -1}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            PursuitConfig(**kw)

    def test_threshold(self):
        assert PursuitConfig(tolerance=0.1).threshold(5.0) == pytest.approx(0.5)
        assert PursuitConfig(tolerance=0.1, relative=False).threshold(5.0) == 0.1


class TestForward:
    def test_single_atom(self, rng):
        a = _unit_columns(rng, 20, 10)
        dec = forward_select(3 * a[:, 5], a, FORWARD_ONLY)
        assert dec.indices == [5]
        assert dec.coefficients[0] == pytest.approx(3.0)
        assert dec.residual_norm < 1e-12

    def test_two_orthogonal_atoms(self):
        a = np.eye(6)
        dec = forward_select(2 * a[:, 1] - a[:, 4], a, FORWARD_ONLY)
        assert sorted(dec.indices) == [1, 4]
        assert dec.residual_norm == 0.0
        assert dec.converged

    def test_zero_signal(self, rng):
        a = _unit_columns(rng, 12, 6)
        dec = approximate(np.zeros(12), a, PursuitConfig())
        assert dec.n_atoms == 0 and dec.residual_norm == 0.0 and dec.converged

    def test_unreachable_returns_best_so_far(self, rng):
        a = _unit_columns(rng, 20, 10)
        f = rng.standard_normal(20)
        dec = forward_select(f, a, PursuitConfig(tolerance=1e-6, max_atoms=4))
        assert dec.n_atoms == 4 and not dec.converged
        assert dec.residual_norm == pytest.approx(_residual_norm(a, dec.indices, f))

    def test_stops_at_tolerance(self, rng):
        a = _unit_columns(rng, 30, 40)
        f = rng.standard_normal(30)
        dec = forward_select(f, a, PursuitConfig(tolerance=0.3))
        assert dec.converged and dec.relative_residual <= 0.3
        assert dec.history["forward"][-2] > 0.3 * dec.signal_norm

    def test_matches_brute_force_per_step(self, rng):
        for trial in range(100):
            n, k = int(rng.integers(8, 25)), int(rng.integers(5, 51))
            a = _unit_columns(rng, n, k) * rng.uniform(0.5, 2.0, k)
            f = rng.standard_normal(n)
            steps = min(6, n - 1, k)
            dec = forward_select(f, a, PursuitConfig(tolerance=1e-12, max_atoms=steps))
            chosen: list[int] = []
            for step, idx in enumerate(dec.indices):
                norms = [
                    _residual_norm(a, chosen + [i], f) if i not in chosen else np.inf for i in range(k)
                ]
                assert idx == int(np.argmin(norms)), f"trial {trial}, step {step}"
                chosen.append(idx)
                assert dec.history["forward"][step + 1] == pytest.approx(min(norms), rel=1e-9, abs=1e-12)

    def test_skips_atoms_in_span(self):
        a = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        a /= np.linalg.norm(a, axis=0)
        f = np.array([1.0, 2.0, 0.0, 0.0])
        dec = forward_select(f, a, FORWARD_ONLY)
        assert dec.n_atoms == 2 and dec.residual_norm < 1e-12

    def test_accepts_dictionary_objects(self):
        class Wrapped:
            matrix = np.eye(3)

        dec = forward_select(np.array([0.0, 1.0, 0.0]), Wrapped(), FORWARD_ONLY)
        assert dec.indices == [1]


class TestSwap:
    @pytest.fixture
    def toy(self):
        e = np.eye(3)
        c = e[:, 0] + e[:, 1] + 0.3 * e[:, 2]
        a = np.column_stack([e[:, 0], e[:, 1], c / np.linalg.norm(c)])
        return a, e[:, 0] + e[:, 1]

    def test_adversarial_toy(self, toy):
        a, f = toy
        cfg = PursuitConfig(tolerance=1e-12, max_atoms=2, backward_enabled=False, swap_enabled=False)
        dec = forward_select(f, a, cfg)
        assert dec.indices[0] == 2 and dec.residual_norm > 0.1
        swapped = swap_refine(dec, a, cfg)
        assert sorted(swapped.indices) == [0, 1]
        assert swapped.residual_norm < 1e-12

    def test_fixed_point(self, rng):
        a = np.eye(5)
        f = np.array([3.0, 2.0, 0.0, 0.0, 0.0])
        cfg = PursuitConfig(tolerance=1e-12)
        dec = forward_select(f, a, cfg)
        out = swap_refine(dec, a, cfg)
        assert out.indices == dec.indices
        np.testing.assert_array_equal(out.coefficients, dec.coefficients)

    def test_never_increases_residual(self, rng):
        for _ in range(40):
            a = _unit_columns(rng, 15, 30)
            f = rng.standard_normal(15)
            cfg = PursuitConfig(tolerance=1e-9, max_atoms=int(rng.integers(1, 8)))
            dec = forward_select(f, a, cfg)
            out = swap_refine(dec, a, cfg)
            assert out.n_atoms == dec.n_atoms
            assert out.residual_norm <= dec.residual_norm * (1 + 1e-12)
            curve = out.history["swap"]
            assert all(y < x for x, y in zip(curve, curve[1:]))
            assert _orthogonality(a, out) < 1e-8

    def test_finds_best_single_swap(self, rng):
        # after swapping no single replacement improves the residual
        for _ in range(10):
            a = _unit_columns(rng, 10, 14)
            f = rng.standard_normal(10)
            cfg = PursuitConfig(tolerance=1e-9, max_atoms=3)
            out = swap_refine(forward_select(f, a, cfg), a, cfg)
            base = _residual_norm(a, out.indices, f)
            for s in range(out.n_atoms):
                for i in set(range(14)) - set(out.indices):
                    trial = out.indices[:s] + [i] + out.indices[s + 1 :]
                    assert _residual_norm(a, trial, f) >= base - 1e-10

    def test_empty(self):
        dec = forward_select(np.zeros(3), np.eye(3), PursuitConfig())
        assert swap_refine(dec, np.eye(3), PursuitConfig()).n_atoms == 0


class TestBackward:
    def test_zero_coefficient_atom_removed(self):
        a = np.eye(4)
        f = np.array([1.0, 2.0, 0.0, 0.0])
        dec = AtomicDecomposition([0, 1, 2], np.array([1.0, 2.0, 0.0]), 0.0, float(np.linalg.norm(f)), 1e-9, True, f)
        out = backward_prune(dec, a)
        assert sorted(out.indices) == [0, 1]
        assert out.residual_norm == 0.0

    def test_all_essential(self):
        a = np.eye(3)
        f = np.array([1.0, 1.0, 1.0])
        dec = forward_select(f, a, PursuitConfig(tolerance=1e-6))
        out = backward_prune(dec, a)
        assert sorted(out.indices) == [0, 1, 2]

    def test_respects_budget(self, rng):
        for _ in range(40):
            a = _unit_columns(rng, 20, 35)
            f = rng.standard_normal(20)
            cfg = PursuitConfig(tolerance=float(rng.uniform(0.05, 0.6)))
            dec = swap_refine(forward_select(f, a, cfg), a, cfg)
            out = backward_prune(dec, a)
            assert out.residual_norm <= dec.target * (1 + 1e-12)
            assert out.n_atoms <= dec.n_atoms
            assert set(out.indices) <= set(dec.indices)
            assert _orthogonality(a, out) < 1e-8

    def test_removal_is_optimal(self, rng):
        # each removal picks the atom whose loss hurts least
        a = _unit_columns(rng, 12, 12)
        f = rng.standard_normal(12)
        dec = forward_select(f, a, PursuitConfig(tolerance=1e-9, max_atoms=6))
        out = backward_prune(dec, a, budget=np.inf)
        assert out.n_atoms == 0
        curve = out.history["backward"]
        idx = list(dec.indices)
        want = [_residual_norm(a, idx, f)]
        while idx:
            costs = [_residual_norm(a, idx[:s] + idx[s + 1 :], f) for s in range(len(idx))]
            s = int(np.argmin(costs))
            want.append(costs[s])
            idx.pop(s)
        np.testing.assert_allclose(curve, want, rtol=1e-9)

    def test_optimal_subset_small(self, rng):
        # pruning from the full set on a tiny problem reaches the brute-force minimum size
        a = np.eye(4)
        f = np.array([3.0, 0.1, 2.0, 0.05])
        dec = forward_select(f, a, PursuitConfig(tolerance=1e-12))
        out = backward_prune(dec, a, budget=0.2)
        best = min(
            len(s) for r in range(5) for s in combinations(range(4), r) if _residual_norm(a, list(s), f) <= 0.2
        )
        assert out.n_atoms == best


class TestApproximate:
    def test_pipeline_properties(self, rng):
        a = _unit_columns(rng, 40, 80)
        f = rng.standard_normal(40)
        dec = approximate(f, a, PursuitConfig(tolerance=0.2))
        assert dec.converged and dec.relative_residual <= 0.2
        assert set(dec.stage_counts) == {"forward", "swap", "backward"}
        assert dec.stage_counts["backward"] <= dec.stage_counts["forward"]
        assert _orthogonality(a, dec) < 1e-8
        assert dec.crosscheck <= 1e-8

    def test_coefficients_match_lstsq(self, rng):
        a = _unit_columns(rng, 40, 80)
        f = rng.standard_normal(40)
        dec = approximate(f, a, PursuitConfig(tolerance=0.05))
        ref = lstsq_coefficients(a, dec.indices, f)
        np.testing.assert_allclose(dec.coefficients, ref, rtol=1e-8, atol=1e-10)

    def test_deterministic(self, rng):
        a = _unit_columns(rng, 30, 60)
        f = rng.standard_normal(30)
        d1 = approximate(f, a, PursuitConfig(tolerance=0.1))
        d2 = approximate(f.copy(), a.copy(), PursuitConfig(tolerance=0.1))
        assert d1.indices == d2.indices
        np.testing.assert_array_equal(d1.coefficients, d2.coefficients)

    def test_absolute_tolerance(self, rng):
        a = _unit_columns(rng, 20, 40)
        f = 10 * rng.standard_normal(20)
        dec = approximate(f, a, PursuitConfig(tolerance=2.0, relative=False))
        assert dec.residual_norm <= 2.0
        assert dec.target == 2.0
