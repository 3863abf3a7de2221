import math

import pytest

from precs import (
    NotDecoheredError,
    QubitBoson,
    QubitSpinJ,
    born_statistics,
    branch_mass,
    branch_supports,
    build_plane_grid,
    build_sphere_grid,
    chi_squared,
    classical_trajectory,
    default_horizon,
    make_branch_pair,
    manifold_of,
    pointer_symbol,
    reduce_state,
    sample_outcome,
)
from precs.outcome import BranchMass, total_contested
from precs.dynamics import BranchSpec


def masses_at(model, branches, t, grid, eps=1e-3):
    chi2 = chi_squared(model, branches, t, grid)
    return branch_mass(chi2, branch_supports(model, branches, t, grid, eps))


class TestBranchMass:
    def test_single_branch(self, boson, boson_grid):
        branches = (BranchSpec("+", 1.0, 1.0 + 0j), BranchSpec("-", -1.0, 0.0 + 0j))
        masses = masses_at(boson, branches, math.pi, boson_grid)
        assert masses[0].mass == pytest.approx(1.0, abs=1e-6)
        assert masses[1].mass == pytest.approx(0.0, abs=1e-6)

    def test_born_masses_when_disjoint(self, boson, born_pair, boson_grid):
        masses = masses_at(boson, born_pair, math.pi, boson_grid)
        assert masses[0].mass == pytest.approx(0.7, abs=1e-2)
        assert masses[1].mass == pytest.approx(0.3, abs=1e-2)
        assert total_contested(masses) < 1e-6

    def test_initial_time_fully_contested(self, boson, born_pair, boson_grid):
        masses = masses_at(boson, born_pair, 0.0, boson_grid)
        assert total_contested(masses) > 0.99

    @pytest.mark.parametrize("t", [0.0, 0.9, math.pi / 2, math.pi])
    def test_partition_exact(self, boson, born_pair, boson_grid, t):
        masses = masses_at(boson, born_pair, t, boson_grid)
        total = sum(m.mass for m in masses) + total_contested(masses)
        assert abs(total - 1.0) < 1e-9

    def test_partition_exact_spin(self, spin, equal_pair, spin_grid):
        for t in (0.0, 1.2, 0.5 * default_horizon(spin)):
            masses = masses_at(spin, equal_pair, t, spin_grid)
            total = sum(m.mass for m in masses) + total_contested(masses)
            assert abs(total - 1.0) < 1e-9

    def test_born_error_shrinks_with_coupling(self, born_pair):
        errors = []
        for g in (1.0, 2.0, 4.0):
            m = QubitBoson(1.0, g)
            grid = build_plane_grid(manifold_of(m).half_width, 128)
            masses = masses_at(m, born_pair, math.pi, grid)
            born = {b.gamma: abs(b.c) ** 2 for b in born_pair}
            errors.append(max(abs(mm.mass - born[mm.gamma]) for mm in masses))
        # monotone decrease, with slack for floating-point ties near zero
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
        assert errors[-1] < errors[0]

    def test_grid_mismatch_rejected(self, boson, born_pair, boson_grid):
        other = build_plane_grid(manifold_of(boson).half_width, 64)
        chi2 = chi_squared(boson, born_pair, math.pi, boson_grid)
        sups = branch_supports(boson, born_pair, math.pi, other, 1e-3)
        with pytest.raises(ValueError):
            branch_mass(chi2, sups)

    def test_time_mismatch_rejected(self, boson, born_pair, boson_grid):
        chi2 = chi_squared(boson, born_pair, math.pi, boson_grid)
        sups = branch_supports(boson, born_pair, 2.0, boson_grid, 1e-3)
        with pytest.raises(ValueError):
            branch_mass(chi2, sups)


class TestSampleOutcome:
    def test_certain_branch(self, boson, born_pair):
        masses = [BranchMass("+", 1.0, 0.0), BranchMass("-", 0.0, 0.0)]
        for seed in (0, 1, 999):
            rec = sample_outcome(masses, boson, born_pair, math.pi, seed)
            assert rec.gamma_out == "+"

    def test_replay_deterministic(self, boson, born_pair, boson_grid):
        masses = masses_at(boson, born_pair, math.pi, boson_grid)
        a = sample_outcome(masses, boson, born_pair, math.pi, seed=7, run_index=3)
        b = sample_outcome(masses, boson, born_pair, math.pi, seed=7, run_index=3)
        assert a == b
        c = sample_outcome(masses, boson, born_pair, math.pi, seed=8, run_index=3)
        d = sample_outcome(masses, boson, born_pair, math.pi, seed=7, run_index=4)
        assert {a.gamma_out, c.gamma_out, d.gamma_out} <= {"+", "-"}

    def test_not_decohered_rejected(self, boson, born_pair, boson_grid):
        masses = masses_at(boson, born_pair, 0.0, boson_grid)
        with pytest.raises(NotDecoheredError):
            sample_outcome(masses, boson, born_pair, 0.0, seed=1)

    def test_pointer_consistency(self, boson, born_pair, boson_grid, rng):
        masses = masses_at(boson, born_pair, math.pi, boson_grid)
        for i in range(20):
            rec = sample_outcome(masses, boson, born_pair, math.pi, seed=11, run_index=i)
            point = classical_trajectory(boson, rec.gamma_out, math.pi)
            assert rec.pointer_value == pointer_symbol(boson, point)
            assert rec.reduced_state == rec.gamma_out

    def test_spin_pointer_in_yz_plane_reads_zero(self):
        # precession about x keeps the trajectory in the y-z plane, so the
        # pointer symbol J n_x vanishes even though branches are separated
        m = QubitSpinJ(0.0, 1.0, 10)
        branches = make_branch_pair(math.sqrt(0.5), math.sqrt(0.5))
        grid = build_sphere_grid(96, 96, 10)
        masses = masses_at(m, branches, math.pi / 2, grid)
        rec = sample_outcome(masses, m, branches, math.pi / 2, seed=3)
        assert rec.pointer_value == pytest.approx(0.0, abs=1e-12)


class TestReduceState:
    def test_returns_outcome_label_and_passes_check(self, boson, born_pair, boson_grid):
        masses = masses_at(boson, born_pair, math.pi, boson_grid)
        rec = sample_outcome(masses, boson, born_pair, math.pi, seed=5)
        label, ok = reduce_state(rec, boson, born_pair, epsilon=1e-3)
        assert label == rec.gamma_out
        assert ok


class TestBornStatistics:
    def test_certain_branch_exact(self, boson, boson_grid):
        branches = (BranchSpec("+", 1.0, 1.0 + 0j), BranchSpec("-", -1.0, 0.0 + 0j))
        records, stats = born_statistics(
            boson, branches, math.pi, boson_grid, 1e-3, 200, seed=1
        )
        by_gamma = {b["gamma"]: b for b in stats["branches"]}
        assert by_gamma["+"]["frequency"] == 1.0
        assert by_gamma["-"]["frequency"] == 0.0
        assert stats["p_value"] > 0.9

    def test_binomial_concentration(self, boson, boson_grid):
        branches = make_branch_pair(math.sqrt(0.5), math.sqrt(0.5))
        n = 10000
        records, stats = born_statistics(
            boson, branches, math.pi, boson_grid, 1e-3, n, seed=20260808
        )
        for b in stats["branches"]:
            assert abs(b["frequency"] - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_p_value_sane_over_seeds(self, boson, born_pair, boson_grid):
        low = 0
        for seed in range(20):
            _, stats = born_statistics(
                boson, born_pair, math.pi, boson_grid, 1e-3, 400, seed=seed
            )
            if stats["p_value"] < 0.05:
                low += 1
        assert low <= 2

    def test_replay_identical(self, boson, born_pair, boson_grid):
        r1, s1 = born_statistics(boson, born_pair, math.pi, boson_grid, 1e-3, 100, seed=9)
        r2, s2 = born_statistics(boson, born_pair, math.pi, boson_grid, 1e-3, 100, seed=9)
        assert r1 == r2
        assert s1 == s2

    def test_draw_order_independent(self, boson, born_pair, boson_grid):
        # run i depends only on (seed, i), not on the other runs
        masses = masses_at(boson, born_pair, math.pi, boson_grid)
        records, _ = born_statistics(boson, born_pair, math.pi, boson_grid, 1e-3, 25, seed=13)
        solo = sample_outcome(masses, boson, born_pair, math.pi, seed=13, run_index=17)
        assert records[17] == solo

    def test_rejects_bad_run_count(self, boson, born_pair, boson_grid):
        with pytest.raises(ValueError):
            born_statistics(boson, born_pair, math.pi, boson_grid, 1e-3, 0, seed=1)
