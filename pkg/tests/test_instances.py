import numpy as np
import pytest

from conftest import oracle_left_vectors, oracle_projection_energy
from leverkit.bench import figure1_sweep
from leverkit.exceptions import LeverkitError
from leverkit.instances import (
    altschuler_instance,
    powerlaw_instance,
    powerlaw_targets,
    random_lowrank_instance,
)
from leverkit.leverage import rank_k_scores
from leverkit.linalg import svd

THETAS = [1.0, 0.5, 0.2, 0.1, 0.05, 0.01]


class TestAltschuler:
    def test_construction(self):
        inst = altschuler_instance(10, 0.5)
        assert inst.a.shape == (11, 11) and inst.b.shape == (11, 1)
        e = np.eye(11)
        np.testing.assert_array_equal(inst.a[:, 0], e[1])
        np.testing.assert_array_equal(inst.a[:, 1], 0.5 * e[0] + e[1])
        np.testing.assert_array_equal(inst.a[:, 4], e[0] + e[4])
        np.testing.assert_array_equal(inst.b[:, 0], e[0])

    @pytest.mark.parametrize("theta", THETAS)
    def test_first_two_columns_span_b(self, theta):
        inst = altschuler_instance(10, theta)
        assert oracle_projection_energy(inst.a[:, :2], inst.b) == pytest.approx(1.0, abs=1e-12)

    def test_last_vector_alignment_trend(self):
        vals = []
        for theta in THETAS:
            inst = altschuler_instance(10, theta)
            u, _ = oracle_left_vectors(inst.a)
            vals.append(float((u[:, -1] @ inst.b[:, 0]) ** 2))
        assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))
        assert vals[-1] > 0.99
        # the sweep agrees with the independent evaluation
        rows = figure1_sweep(10, THETAS)
        np.testing.assert_allclose([r["last_vector_energy"] for r in rows], vals, atol=1e-12)

    @pytest.mark.parametrize("n,theta", [(1, 0.5), (3, 0.0), (3, 1.5)])
    def test_invalid(self, n, theta):
        with pytest.raises(ValueError):
            altschuler_instance(n, theta)


class TestPowerlaw:
    def test_targets_eta0(self):
        t = powerlaw_targets(4, 1, 0.0)
        base = np.array([1, 1 / 2, 1 / 3, 1 / 4])
        np.testing.assert_allclose(t, base / base.sum())

    def test_infeasible_pure(self):
        with pytest.raises(ValueError, match="infeasible"):
            powerlaw_targets(30, 5, 1.0)

    def test_capped_targets(self):
        t = powerlaw_targets(30, 5, 1.0, cap=True)
        assert t.sum() == pytest.approx(5.0, abs=1e-9) and t.max() <= 1.0
        # uncapped tail keeps the power-law ratio
        tail = t[t < 1.0]
        idx = np.flatnonzero(t < 1.0) + 1
        np.testing.assert_allclose(tail * idx**2, tail[0] * idx[0] ** 2, rtol=1e-12)

    def test_instance_scores(self):
        inst = powerlaw_instance(40, 30, 2, 0.5, seed=3)
        scores = rank_k_scores(svd(inst.a), 2).scores
        assert scores.sum() == pytest.approx(2.0, abs=1e-6)
        assert np.max(np.abs(scores - inst.target_scores) / inst.target_scores) <= 0.05
        np.testing.assert_allclose(scores, inst.achieved_scores, atol=1e-12)

    def test_instance_capped(self):
        inst = powerlaw_instance(50, 40, 5, 1.0, seed=0, cap=True)
        assert inst.metadata["max_relative_error"] <= 0.05

    def test_deterministic(self):
        a1 = powerlaw_instance(20, 15, 1, 1.0, seed=9).a
        a2 = powerlaw_instance(20, 15, 1, 1.0, seed=9).a
        assert a1.tobytes() == a2.tobytes()

    def test_unreached_raises(self):
        with pytest.raises(LeverkitError):
            powerlaw_instance(20, 15, 2, 0.5, seed=0, cap=True, iters=1, rtol=1e-6)


class TestLowrank:
    def test_rank(self):
        pair = random_lowrank_instance(12, 9, 4, 0.0, seed=1)
        assert svd(pair.a).numerical_rank == 4

    def test_same_seed(self):
        p1 = random_lowrank_instance(8, 6, 3, 0.1, seed=5)
        p2 = random_lowrank_instance(8, 6, 3, 0.1, seed=5)
        assert p1.a.tobytes() == p2.a.tobytes() and p1.b.tobytes() == p2.b.tobytes()

    def test_b_in_range(self):
        pair = random_lowrank_instance(10, 7, 3, 0.0, seed=2)
        assert oracle_projection_energy(pair.a, pair.b) == pytest.approx(
            float(np.sum(pair.b**2)), rel=1e-8)

    def test_out_of_range_component(self):
        pair = random_lowrank_instance(10, 7, 3, 0.0, seed=2, out_of_range=1.0)
        assert oracle_projection_energy(pair.a, pair.b) < float(np.sum(pair.b**2)) * 0.999
