"""Two-index MIP over the replenishment-arc multigraph.

Variables: one binary per arc (x), one carry binary per ordered request
pair (y), and per point of care the visit time (z), elapsed-shift time
(tau) and completion time (C). The objective is the sum of completion
times. Constraint deactivation uses the tightest big-M constants derivable
from the preprocessed windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..instances import Instance
from ..network import Arc, ArcKind, Multigraph, TimeWindows

SENSE_LE = "<="
SENSE_EQ = "="
SENSE_GE = ">="

BINARY = "binary"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class VariableRef:
    name: str
    family: str  # "x" (arc), "y" (carry pair), "z", "tau" or "completion"
    index: tuple
    column: int
    kind: str
    lower: float
    upper: float


@dataclass(slots=True)
class LinearConstraint:
    name: str
    coeffs: dict[int, float]  # column -> coefficient, no stored zeros
    sense: str
    rhs: float


class ColumnLayout:
    """Bijection of the variable families onto columns [0, 3n^2 + 3n).

    x over arc ids (2n^2 binaries), then y over ordered pairs including
    i = j (n^2 binaries), then z, tau, C blocks (n continuous each).
    """

    def __init__(self, n: int):
        self.n = n
        self.num_arcs = 2 * n * n
        self.num_binary = 3 * n * n
        self.num_continuous = 3 * n
        self.num_columns = self.num_binary + self.num_continuous

    def x(self, arc_id: int) -> int:
        return arc_id

    def y(self, i: int, j: int) -> int:
        return self.num_arcs + (i - 1) * self.n + (j - 1)

    def z(self, j: int) -> int:
        return self.num_binary + (j - 1)

    def tau(self, j: int) -> int:
        return self.num_binary + self.n + (j - 1)

    def completion(self, j: int) -> int:
        return self.num_binary + 2 * self.n + (j - 1)


@dataclass
class MipModel:
    n: int
    fleet_size: int
    layout: ColumnLayout
    variables: list[VariableRef]
    constraints: list[LinearConstraint]
    objective: dict[int, float]  # column -> cost; 1 on every completion column
    metadata: dict = field(default_factory=dict)

    @property
    def num_columns(self) -> int:
        return len(self.variables)

    def count_binary(self) -> int:
        return sum(1 for v in self.variables if v.kind == BINARY)

    def count_continuous(self) -> int:
        return sum(1 for v in self.variables if v.kind == CONTINUOUS)

    def rows_by_family(self, family: str) -> list[LinearConstraint]:
        prefix = family + "_"
        return [c for c in self.constraints if c.name.startswith(prefix)]


def big_m_visit(arc: Arc, windows: TimeWindows) -> float:
    """Deactivation constant for time propagation along a movement arc."""
    if arc.kind is ArcKind.DEPOT:
        raise ValueError("visit big-M is defined only between points of care")
    return max(0.0, float(windows.deadline[arc.source] + arc.cost - windows.release[arc.target]))


def big_m_completion(i: int, windows: TimeWindows, travel: np.ndarray) -> float:
    """Deactivation constant for the completion link of carrier node i."""
    return float(windows.deadline[i] + travel[i, 0])


def big_m_shift(arc: Arc, windows: TimeWindows, travel: np.ndarray) -> float:
    """Deactivation constant for elapsed-shift propagation along a movement arc.

    Nonnegative for preprocessed windows; a negative value signals a window
    preprocessing should have flagged as empty.
    """
    if arc.kind is ArcKind.DEPOT:
        raise ValueError("shift big-M is defined only between points of care")
    return float(windows.deadline[arc.target] - travel[0, arc.target])


def build_model(
    graph: Multigraph, inst: Instance, explicit_bounds: bool = False
) -> MipModel:
    """Generate the complete model for a built multigraph.

    By default the window, carry-start and shift-cap clauses become variable
    bounds/fixings (mathematically identical, smaller model); with
    explicit_bounds=True they are emitted as rows for one-to-one audits.
    """
    n = graph.n
    windows = graph.windows
    travel = inst.travel
    release, deadline = windows.release, windows.deadline
    lay = ColumnLayout(n)
    inf = math.inf

    variables: list[VariableRef] = []
    for arc in graph.arcs:
        variables.append(
            VariableRef(f"x_{arc.id}", "x", (arc.id,), lay.x(arc.id), BINARY, 0.0, 1.0)
        )
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            fixed = i == j and not explicit_bounds
            variables.append(
                VariableRef(
                    f"y_{i}_{j}", "y", (i, j), lay.y(i, j), BINARY, 1.0 if fixed else 0.0, 1.0
                )
            )
    for j in range(1, n + 1):
        lo = 0.0 if explicit_bounds else float(release[j])
        up = inf if explicit_bounds else float(deadline[j])
        variables.append(VariableRef(f"z_{j}", "z", (j,), lay.z(j), CONTINUOUS, lo, up))
    for j in range(1, n + 1):
        lo = 0.0 if explicit_bounds else float(travel[0, j])
        up = inf if explicit_bounds else float(inst.shift_cap - travel[j, 0])
        variables.append(VariableRef(f"tau_{j}", "tau", (j,), lay.tau(j), CONTINUOUS, lo, up))
    for j in range(1, n + 1):
        variables.append(
            VariableRef(f"C_{j}", "completion", (j,), lay.completion(j), CONTINUOUS, 0.0, inf)
        )

    rows: list[LinearConstraint] = []

    def add(name: str, coeffs: dict[int, float], sense: str, rhs: float):
        rows.append(
            LinearConstraint(
                name=name,
                coeffs={c: v for c, v in coeffs.items() if v != 0.0},
                sense=sense,
                rhs=rhs,
            )
        )

    depot_out = {lay.x(a): 1.0 for a in graph.out_arcs(0)}
    balance = dict(depot_out)
    for a in graph.in_arcs(0):
        balance[lay.x(a)] = balance.get(lay.x(a), 0.0) - 1.0
    add("depot_balance", balance, SENSE_EQ, 0.0)
    add("fleet_cap", depot_out, SENSE_LE, float(inst.fleet_size))

    for j in range(1, n + 1):
        add("visit_out_%d" % j, {lay.x(a): 1.0 for a in graph.out_arcs(j)}, SENSE_EQ, 1.0)
        add("visit_in_%d" % j, {lay.x(a): 1.0 for a in graph.in_arcs(j)}, SENSE_EQ, 1.0)

    movement = graph.movement_arcs
    for arc in movement:
        m_e = big_m_visit(arc, windows)
        add(
            "tprop_%d" % arc.id,
            {lay.z(arc.source): 1.0, lay.z(arc.target): -1.0, lay.x(arc.id): m_e},
            SENSE_LE,
            m_e - arc.cost,
        )

    if explicit_bounds:
        for j in range(1, n + 1):
            add("window_lo_%d" % j, {lay.z(j): 1.0}, SENSE_GE, float(release[j]))
            add("window_hi_%d" % j, {lay.z(j): 1.0}, SENSE_LE, float(deadline[j]))
        for j in range(1, n + 1):
            add("collect_%d" % j, {lay.y(j, j): 1.0}, SENSE_EQ, 1.0)

    for arc in movement:
        if arc.kind is not ArcKind.INTER:
            continue
        for j in range(1, n + 1):
            if j == arc.target:
                continue
            add(
                "carry_%d_%d" % (arc.id, j),
                {lay.y(arc.source, j): 1.0, lay.y(arc.target, j): -1.0, lay.x(arc.id): 1.0},
                SENSE_LE,
                1.0,
            )

    for i in range(1, n + 1):
        m_i = big_m_completion(i, windows, travel)
        for j in range(1, n + 1):
            add(
                "compl_%d_%d" % (i, j),
                {lay.z(i): 1.0, lay.completion(j): -1.0, lay.y(i, j): m_i},
                SENSE_LE,
                m_i - float(travel[i, 0]),
            )

    if explicit_bounds:
        for j in range(1, n + 1):
            add("shift_lo_%d" % j, {lay.tau(j): 1.0}, SENSE_GE, float(travel[0, j]))

    for arc in movement:
        m_s = big_m_shift(arc, windows, travel)
        add(
            "sprop_%d" % arc.id,
            {
                lay.tau(arc.source): 1.0,
                lay.tau(arc.target): -1.0,
                lay.z(arc.target): 1.0,
                lay.z(arc.source): -1.0,
                lay.x(arc.id): m_s,
            },
            SENSE_LE,
            m_s,
        )

    if explicit_bounds:
        for j in range(1, n + 1):
            add(
                "shift_cap_%d" % j,
                {lay.tau(j): 1.0},
                SENSE_LE,
                float(inst.shift_cap - travel[j, 0]),
            )

    objective = {lay.completion(j): 1.0 for j in range(1, n + 1)}
    assert len(objective) == n
    assert all(variables[col].family == "completion" for col in objective)

    names = [r.name for r in rows]
    assert len(set(names)) == len(names), "constraint names must be unique"
    assert all(v.column == idx for idx, v in enumerate(variables))
    assert len(variables) == lay.num_columns

    return MipModel(
        n=n,
        fleet_size=inst.fleet_size,
        layout=lay,
        variables=variables,
        constraints=rows,
        objective=objective,
        metadata={
            "label": inst.label,
            "n": n,
            "fleet_size": inst.fleet_size,
            "explicit_bounds": explicit_bounds,
        },
    )
