import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdsp import ArcKind, build_model, build_multigraph, preprocess_time_windows
from cdsp.formulation import (
    SENSE_EQ,
    SENSE_LE,
    big_m_completion,
    big_m_shift,
    big_m_visit,
    solution_column_values,
)
from cdsp.network import Arc, TimeWindows
from cdsp.oracle import exact_solve_tiny

from gen import random_instance


def _windows(release, deadline):
    return TimeWindows(release=np.array(release), deadline=np.array(deadline))


class TestBigM:
    def test_visit_direct(self):
        arc = Arc(0, 1, 2, ArcKind.INTER, 5.0)
        w = _windows([0, 0, 4], [30, 10, 30])
        assert big_m_visit(arc, w) == 11.0

    def test_visit_clamped_at_zero(self):
        arc = Arc(0, 1, 2, ArcKind.INTER, 1.0)
        w = _windows([0, 0, 20], [30, 3, 30])
        assert big_m_visit(arc, w) == 0.0

    def test_visit_tiny2_replenishment(self, tiny2):
        g = build_multigraph(tiny2)
        arc = next(a for a in g.arcs if a.kind is ArcKind.REPLENISH and a.source == 1)
        assert big_m_visit(arc, g.windows) == 13.0

    def test_visit_rejects_depot_arc(self, tiny2):
        g = build_multigraph(tiny2)
        with pytest.raises(ValueError, match="points of care"):
            big_m_visit(g.arcs[0], g.windows)

    def test_completion_direct(self):
        w = _windows([0, 0], [30, 10])
        travel = np.array([[0.0, 3.0], [3.0, 0.0]])
        assert big_m_completion(1, w, travel) == 13.0

    def test_completion_zero_case(self):
        w = _windows([0, 0], [30, 0])
        travel = np.zeros((2, 2))
        assert big_m_completion(1, w, travel) == 0.0

    def test_completion_tiny2(self, tiny2):
        g = build_multigraph(tiny2)
        assert big_m_completion(2, g.windows, tiny2.travel) == 14.0

    def test_shift_direct(self):
        arc = Arc(0, 2, 1, ArcKind.INTER, 1.0)
        w = _windows([0, 3, 0], [30, 10, 30])
        travel = np.array([[0.0, 3.0, 1.0], [3.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        assert big_m_shift(arc, w, travel) == 7.0

    def test_shift_boundary_zero(self):
        arc = Arc(0, 2, 1, ArcKind.INTER, 1.0)
        w = _windows([0, 3, 0], [30, 3, 30])
        travel = np.array([[0.0, 3.0, 1.0], [3.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        assert big_m_shift(arc, w, travel) == 0.0

    def test_shift_tiny2(self, tiny2):
        g = build_multigraph(tiny2)
        arc = next(a for a in g.arcs if a.kind is ArcKind.INTER and a.target == 2)
        assert big_m_shift(arc, g.windows, tiny2.travel) == 6.0

    def test_shift_rejects_depot_arc(self, tiny2):
        g = build_multigraph(tiny2)
        with pytest.raises(ValueError, match="points of care"):
            big_m_shift(g.arcs[0], g.windows, tiny2.travel)


class TestBuildModel:
    def test_tiny2_carry_rows(self, tiny2):
        model = build_model(build_multigraph(tiny2), tiny2)
        assert len(model.rows_by_family("carry")) == 2

    def test_variable_counts_n25(self):
        rng = np.random.default_rng(3)
        inst = random_instance(rng, 25, 10)
        model = build_model(build_multigraph(inst), inst)
        assert model.count_binary() == 1875
        assert model.count_continuous() == 75

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    def test_row_count_formulas(self, n):
        rng = np.random.default_rng(n)
        inst = random_instance(rng, n, 2)
        model = build_model(build_multigraph(inst), inst)
        assert model.count_binary() == 3 * n * n
        assert model.count_continuous() == 3 * n
        assert len(model.rows_by_family("tprop")) == 2 * n * (n - 1)
        assert len(model.rows_by_family("carry")) == n * (n - 1) ** 2
        assert len(model.rows_by_family("compl")) == n * n
        assert len(model.rows_by_family("sprop")) == 2 * n * (n - 1)
        assert len(model.rows_by_family("visit_out")) == n
        assert len(model.rows_by_family("visit_in")) == n
        assert len(model.rows_by_family("depot_balance")) == 0  # exact-name row
        assert sum(1 for c in model.constraints if c.name == "depot_balance") == 1
        assert sum(1 for c in model.constraints if c.name == "fleet_cap") == 1

    def test_objective_touches_exactly_completion_columns(self, tiny2):
        model = build_model(build_multigraph(tiny2), tiny2)
        lay = model.layout
        assert model.objective == {lay.completion(1): 1.0, lay.completion(2): 1.0}

    def test_bounds_embed_windows_and_shift(self, tiny2):
        model = build_model(build_multigraph(tiny2), tiny2)
        by_name = {v.name: v for v in model.variables}
        assert (by_name["z_1"].lower, by_name["z_1"].upper) == (3.0, 10.0)
        assert (by_name["z_2"].lower, by_name["z_2"].upper) == (4.0, 10.0)
        assert (by_name["tau_1"].lower, by_name["tau_1"].upper) == (3.0, 27.0)
        assert (by_name["y_1_1"].lower, by_name["y_1_1"].upper) == (1.0, 1.0)
        assert (by_name["y_1_2"].lower, by_name["y_1_2"].upper) == (0.0, 1.0)
        assert by_name["C_1"].upper == math.inf

    def test_explicit_rows_mode(self, tiny2):
        model = build_model(build_multigraph(tiny2), tiny2, explicit_bounds=True)
        n = 2
        assert len(model.rows_by_family("window_lo")) == n
        assert len(model.rows_by_family("window_hi")) == n
        assert len(model.rows_by_family("collect")) == n
        assert len(model.rows_by_family("shift_lo")) == n
        assert len(model.rows_by_family("shift_cap")) == n
        by_name = {v.name: v for v in model.variables}
        assert (by_name["z_1"].lower, by_name["z_1"].upper) == (0.0, math.inf)
        assert (by_name["y_1_1"].lower, by_name["y_1_1"].upper) == (0.0, 1.0)
        collect = next(c for c in model.constraints if c.name == "collect_1")
        assert collect.sense == SENSE_EQ and collect.rhs == 1.0

    def test_explicit_rows_solve_to_same_optimum(self, tiny2):
        from cdsp import SolveLimits, solve

        g = build_multigraph(tiny2)
        default = solve(build_model(g, tiny2), SolveLimits(time_limit_s=60))
        explicit = solve(
            build_model(g, tiny2, explicit_bounds=True), SolveLimits(time_limit_s=60)
        )
        assert default.objective == pytest.approx(explicit.objective, abs=1e-9)
        assert explicit.objective == pytest.approx(20.0, abs=1e-6)

    def test_no_zero_coefficients_stored(self):
        rng = np.random.default_rng(8)
        inst = random_instance(rng, 5, 2)
        model = build_model(build_multigraph(inst), inst)
        for row in model.constraints:
            assert all(v != 0.0 for v in row.coeffs.values())

    def test_unique_names_and_column_bijection(self):
        rng = np.random.default_rng(9)
        inst = random_instance(rng, 4, 2)
        model = build_model(build_multigraph(inst), inst)
        names = [c.name for c in model.constraints]
        assert len(set(names)) == len(names)
        assert [v.column for v in model.variables] == list(range(model.num_columns))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_big_m_coefficients_are_tightest(self, seed):
        # recomputing every big-M from windows reproduces the stored
        # coefficients exactly
        rng = np.random.default_rng(seed)
        inst = random_instance(rng, int(rng.integers(2, 7)), 2)
        g = build_multigraph(inst)
        model = build_model(g, inst)
        lay = model.layout
        arc_by_id = {a.id: a for a in g.arcs}
        for row in model.rows_by_family("tprop"):
            arc = arc_by_id[int(row.name.split("_")[1])]
            m = big_m_visit(arc, g.windows)
            assert row.coeffs.get(lay.x(arc.id), 0.0) == m
            assert row.rhs == m - arc.cost
        for row in model.rows_by_family("sprop"):
            arc = arc_by_id[int(row.name.split("_")[1])]
            m = big_m_shift(arc, g.windows, inst.travel)
            assert row.coeffs.get(lay.x(arc.id), 0.0) == m
            assert row.rhs == m
        for row in model.rows_by_family("compl"):
            _, i, j = row.name.split("_")
            m = big_m_completion(int(i), g.windows, inst.travel)
            assert row.coeffs.get(lay.y(int(i), int(j)), 0.0) == m


class TestModelAdmitsOracleSolutions:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_oracle_solution_satisfies_every_constraint(self, seed):
        rng = np.random.default_rng(seed)
        inst = random_instance(rng, int(rng.integers(1, 6)), int(rng.integers(1, 3)))
        w = preprocess_time_windows(inst)
        g = build_multigraph(inst, w)
        model = build_model(g, inst)
        result = exact_solve_tiny(inst, w)
        assert result.solution is not None
        vec = solution_column_values(result.solution, model, g)
        tol = 1e-7
        for var in model.variables:
            assert var.lower - tol <= vec[var.column] <= var.upper + tol, var.name
        for row in model.constraints:
            lhs = sum(coef * vec[col] for col, coef in row.coeffs.items())
            if row.sense == SENSE_LE:
                assert lhs <= row.rhs + tol, row.name
            elif row.sense == SENSE_EQ:
                assert lhs == pytest.approx(row.rhs, abs=tol), row.name
            else:
                assert lhs >= row.rhs - tol, row.name
        objective = sum(vec[col] * coef for col, coef in model.objective.items())
        assert objective == pytest.approx(result.best_total, abs=1e-6)
