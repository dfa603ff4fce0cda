import numpy as np
import pytest

from tailored_bell.bases import OverlapMatrix, conj_overlap_3, qubit_mub_blocks
from tailored_bell.errors import InvalidConfig, NotUnitary
from tailored_bell.localvalue import local_value, lower_bound
from tailored_bell.matcore import haar_unitary, is_unitary
from tailored_bell.search import (
    SearchConfig,
    compare_families,
    minimize_local_value,
    permutation_distance,
    permutation_equivalent,
    perturb_unitary,
)


def beta(u):
    return local_value(OverlapMatrix(np.abs(u))).beta_L


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"d": 1},
            {"d": 3, "restarts": 0},
            {"d": 3, "step_init": 1e-3, "step_min": 1e-2},
            {"d": 3, "temperatures": (0.1, -1)},
            {"d": 3, "patience": 0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidConfig):
            SearchConfig(**kwargs)

    def test_defaults(self):
        cfg = SearchConfig(4)
        assert (cfg.restarts, cfg.max_iters) == (100, 2000)
        assert cfg.effective_patience == 16


class TestPerturb:
    def test_zero_step(self):
        u = haar_unitary(3, 0)
        np.testing.assert_array_equal(perturb_unitary(u, 0.0, 1), u)

    def test_stays_unitary(self):
        rng = np.random.default_rng(0)
        for step in (1e-6, 0.1, 1.0, 10.0):
            assert is_unitary(perturb_unitary(haar_unitary(4, rng), step, 3), 1e-10)

    def test_seeded(self):
        u = haar_unitary(3, 1)
        np.testing.assert_array_equal(perturb_unitary(u, 0.2, 5), perturb_unitary(u, 0.2, 5))

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitary):
            perturb_unitary(np.ones((2, 2)), 0.1, 0)

    def test_small_steps_small_jumps(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for i in range(1000):
            u = haar_unitary(3, rng)
            worst = max(worst, abs(beta(perturb_unitary(u, 1e-3, i)) - beta(u)))
        assert worst < 0.1


class TestSearch:
    def test_qubit(self):
        res = minimize_local_value(SearchConfig(2, restarts=20, seed=0))
        assert abs(res.best_beta_L - (np.sqrt(2) - 0.5)) < 1e-6

    def test_result_invariants(self):
        res = minimize_local_value(SearchConfig(3, restarts=3, max_iters=300, seed=4))
        assert abs(res.best_beta_L - local_value(res.best_overlap).beta_L) < 1e-10
        assert res.best_beta_L >= lower_bound(3) - 1e-9
        assert is_unitary(res.best_unitary, 1e-10)
        assert len(res.restart_values) == 3
        assert res.best_beta_L == min(res.restart_values)
        assert res.trajectory[0][0] == 0
        values = [v for _, v in res.trajectory]
        assert values[-1] == pytest.approx(res.best_beta_L, abs=1e-12)

    def test_reproducible(self):
        cfg = SearchConfig(3, restarts=2, max_iters=200, seed=9)
        a, b = minimize_local_value(cfg), minimize_local_value(cfg)
        np.testing.assert_array_equal(a.best_unitary, b.best_unitary)
        assert a.trajectory == b.trajectory and a.restart_values == b.restart_values

    def test_parallel_matches_serial(self):
        cfg = SearchConfig(3, restarts=2, max_iters=200, seed=9)
        par = minimize_local_value(SearchConfig(3, restarts=2, max_iters=200, seed=9, workers=2))
        ser = minimize_local_value(cfg)
        np.testing.assert_array_equal(par.best_unitary, ser.best_unitary)

    def test_restart_seeds_are_offsets(self):
        # restart r of seed s equals restart 0 of seed s + r
        a = minimize_local_value(SearchConfig(3, restarts=2, max_iters=150, seed=10))
        b = minimize_local_value(SearchConfig(3, restarts=1, max_iters=150, seed=11))
        assert a.restart_values[1] == b.restart_values[0]


class TestPermutationEquivalence:
    def test_detects_permutations(self):
        rng = np.random.default_rng(0)
        o = qubit_mub_blocks(4).entries
        p = o[rng.permutation(4)][:, rng.permutation(4)]
        assert permutation_distance(o, p) < 1e-15
        assert not permutation_equivalent(o, np.full((4, 4), 0.5))

    def test_conj(self):
        o = conj_overlap_3().entries
        assert permutation_equivalent(o, o[[2, 0, 1]][:, [1, 0, 2]], 1e-12)


class TestCompareFamilies:
    def test_d3(self):
        rows = compare_families(3, SearchConfig(3, restarts=5, max_iters=600, seed=1))
        by_name = {r.family: r for r in rows}
        assert by_name["odd_blocks"].beta_L < by_name["mub"].beta_L
        assert abs(by_name["mub"].beta_L - 1.932653) < 1e-6
        assert [r.beta_L for r in rows] == sorted(r.beta_L for r in rows)

    def test_d4(self):
        rows = compare_families(4, SearchConfig(4, restarts=2, max_iters=300, seed=1))
        by_name = {r.family: r for r in rows}
        assert abs(by_name["qubit_mub_blocks"].beta_L - 2.914214) < 1e-6
        assert abs(by_name["mub"].beta_L - 2.946152) < 1e-6
        for r in rows:
            assert abs(r.nu_star - 0.5 * (1 + r.beta_L / 3)) < 1e-15

    def test_d5(self):
        rows = compare_families(5, SearchConfig(5, restarts=1, max_iters=100, seed=1))
        by_name = {r.family: r for r in rows}
        assert abs(by_name["odd_blocks"].beta_L - 3.931886) < 1e-6
        assert by_name["odd_blocks"].beta_L < by_name["mub"].beta_L


@pytest.mark.slow
def test_d4_reaches_blocks():
    res = minimize_local_value(SearchConfig(4, restarts=50, seed=7))
    assert res.best_beta_L <= 2.914214 + 1e-4
    assert permutation_equivalent(res.best_overlap.entries, qubit_mub_blocks(4).entries, 5e-3)
