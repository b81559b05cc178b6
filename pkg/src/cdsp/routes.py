"""Multi-trip tours: timing, feasibility validation and objective evaluation.

A tour is a sequence of depot-to-depot trips driven by one vehicle. Visit
times must respect the (tightened) windows; a vehicle arriving early waits
at the point of care. The shift of a vehicle runs from its first depot
departure to its final return and is capped. The objective is the sum of
request completion times, where a request completes when the trip carrying
it returns to the depot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instances import Instance
from .network import TimeWindows, preprocess_time_windows

#: Absolute tolerance for all time comparisons.
TIME_TOL = 1e-6


class InfeasibleTourError(Exception):
    """No feasible timing exists for a fixed tour."""

    def __init__(self, node: int | None, reason: str):
        where = f"node {node}" if node is not None else "shift"
        super().__init__(f"tour infeasible at {where}: {reason}")
        self.node = node
        self.reason = reason


@dataclass(frozen=True)
class Trip:
    """One depot-to-depot segment; nodes are points of care in visit order."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not self.nodes:
            raise ValueError("trip must visit at least one point of care")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"repeated node within trip {self.nodes}")


@dataclass(frozen=True)
class Tour:
    vehicle: int
    trips: tuple[Trip, ...]
    departure: float

    def __post_init__(self):
        object.__setattr__(self, "trips", tuple(self.trips))
        if not self.trips:
            raise ValueError("tour must contain at least one trip")

    @property
    def visited(self) -> tuple[int, ...]:
        return tuple(node for trip in self.trips for node in trip.nodes)


@dataclass(frozen=True)
class TourTiming:
    """Schedule of a single tour: departure, visit times, trip return times."""

    departure: float
    visit: dict[int, float]
    deliveries: tuple[float, ...]

    @property
    def shift(self) -> float:
        return self.deliveries[-1] - self.departure


@dataclass(frozen=True)
class Timing:
    """Solution-wide schedule: visit times, per-trip deliveries, completions."""

    visit: dict[int, float]
    deliveries: tuple[tuple[float, ...], ...]  # [tour][trip]
    completion: dict[int, float]


@dataclass(frozen=True)
class EvaluatedSolution:
    tours: tuple[Tour, ...]
    timing: Timing
    total_completion: float  # F
    net_completion: float  # F', release-corrected

    @property
    def trips_by_vehicle(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        return tuple(tuple(t.nodes for t in tour.trips) for tour in sorted_by_vehicle(self.tours))


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def sorted_by_vehicle(tours) -> list[Tour]:
    return sorted(tours, key=lambda t: t.vehicle)


def schedule_tour(
    tour, inst: Instance, windows: TimeWindows | None = None
) -> TourTiming:
    """Optimal timing of a fixed tour: minimize the sum of trip return times.

    A forward pass computes earliest visit times (wait when early). If the
    resulting shift fits the cap, the departure is delayed by the largest
    amount that leaves every visit and delivery unchanged (the minimum
    accumulated waiting), shortening the shift for free. Otherwise the exact
    timing relaxation, a small LP over visit times and the departure, is
    solved. Raises InfeasibleTourError when no timing exists.
    """
    trips = _trip_lists(tour)
    if windows is None:
        windows = preprocess_time_windows(inst)
    flat = [node for trip in trips for node in trip]
    if len(set(flat)) != len(flat):
        raise ValueError(f"node repeated across trips: {trips}")

    visit, deliveries, min_cum_wait = _forward_pass(trips, inst, windows, departure=0.0)
    # Delaying by the minimum accumulated waiting keeps every visit and
    # delivery in place, so it is free; take it whenever it already meets
    # the cap, otherwise visits must move and the LP decides how.
    if deliveries[-1] - min_cum_wait <= inst.shift_cap + TIME_TOL:
        return TourTiming(departure=min_cum_wait, visit=visit, deliveries=tuple(deliveries))
    return _schedule_lp(trips, inst, windows)


def _trip_lists(tour) -> list[list[int]]:
    if isinstance(tour, Tour):
        return [list(t.nodes) for t in tour.trips]
    out = []
    for trip in tour:
        nodes = list(trip.nodes) if isinstance(trip, Trip) else list(trip)
        if not nodes:
            raise ValueError("empty trip")
        out.append(nodes)
    if not out:
        raise ValueError("empty tour")
    return out


def _forward_pass(trips, inst, windows, departure):
    """Earliest feasible visit times from a fixed departure.

    Returns (visit, deliveries, min_cum_wait) where min_cum_wait is the
    minimum over visits of accumulated waiting up to that visit; it is the
    largest departure delay that changes nothing downstream.
    """
    travel = inst.travel
    release, deadline = windows.release, windows.deadline
    visit: dict[int, float] = {}
    deliveries: list[float] = []
    clock = departure
    at = 0
    cum_wait = 0.0
    min_cum_wait = math.inf
    for trip in trips:
        for node in trip:
            arrive = float(clock + travel[at, node])
            z = max(arrive, float(release[node]))
            if z > deadline[node] + TIME_TOL:
                raise InfeasibleTourError(
                    node, f"earliest visit {z:.6g} beyond deadline {deadline[node]:.6g}"
                )
            cum_wait += z - arrive
            min_cum_wait = min(min_cum_wait, cum_wait)
            visit[node] = z
            clock, at = z, node
        clock = float(clock + travel[at, 0])
        deliveries.append(clock)
        at = 0
    return visit, deliveries, min_cum_wait


def _schedule_lp(trips, inst, windows) -> TourTiming:
    """Exact timing relaxation when the earliest schedule busts the shift cap.

    min sum of trip returns s.t. leg precedences, windows, shift cap;
    variables are the departure and one visit time per node.
    """
    from scipy.optimize import linprog

    travel = inst.travel
    release, deadline = windows.release, windows.deadline
    order = [node for trip in trips for node in trip]
    col = {node: i + 1 for i, node in enumerate(order)}  # column 0 = departure

    ncols = len(order) + 1
    c = np.zeros(ncols)
    rows, rhs = [], []

    def leg(u_col: int, v_col: int, cost: float):
        row = np.zeros(ncols)
        row[u_col], row[v_col] = 1.0, -1.0
        rows.append(row)
        rhs.append(-cost)

    last_node = None
    for trip in trips:
        if last_node is None:
            leg(0, col[trip[0]], travel[0, trip[0]])
        else:
            # depot pass-through: return leg plus outbound leg of the next trip
            leg(col[last_node], col[trip[0]], travel[last_node, 0] + travel[0, trip[0]])
        for u, v in zip(trip, trip[1:]):
            leg(col[u], col[v], travel[u, v])
        last_node = trip[-1]
        c[col[last_node]] = 1.0
    # shift cap: z_last + return leg - departure <= cap
    row = np.zeros(ncols)
    row[col[last_node]], row[0] = 1.0, -1.0
    rows.append(row)
    rhs.append(inst.shift_cap - travel[last_node, 0])

    bounds = [(0.0, None)] + [(release[node], deadline[node]) for node in order]
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if not res.success:
        raise InfeasibleTourError(None, "no timing satisfies the shift cap")
    x = res.x
    visit = {node: float(x[col[node]]) for node in order}
    deliveries = tuple(float(x[col[trip[-1]]] + travel[trip[-1], 0]) for trip in trips)
    return TourTiming(departure=float(x[0]), visit=visit, deliveries=deliveries)


def assemble_solution(
    vehicle_trips,
    inst: Instance,
    windows: TimeWindows | None = None,
    raw_release: bool = False,
) -> EvaluatedSolution:
    """Schedule one tour per vehicle and assemble the evaluated solution.

    vehicle_trips: sequence of tours, each a sequence of trips (node lists).
    Raises InfeasibleTourError if any tour has no feasible timing.
    """
    if windows is None:
        windows = preprocess_time_windows(inst)
    tours: list[Tour] = []
    visit: dict[int, float] = {}
    deliveries: list[tuple[float, ...]] = []
    completion: dict[int, float] = {}
    for k, trips in enumerate(vehicle_trips, start=1):
        timing = schedule_tour(trips, inst, windows)
        trip_objs = tuple(Trip(tuple(t)) for t in _trip_lists(trips))
        tours.append(Tour(vehicle=k, trips=trip_objs, departure=timing.departure))
        visit.update(timing.visit)
        deliveries.append(timing.deliveries)
        for trip, delivered in zip(trip_objs, timing.deliveries):
            for node in trip.nodes:
                completion[node] = delivered
    total = float(sum(completion.values()))
    release_sum = _release_sum(inst, windows, raw_release)
    timing = Timing(visit=visit, deliveries=tuple(deliveries), completion=completion)
    return EvaluatedSolution(
        tours=tuple(tours),
        timing=timing,
        total_completion=total,
        net_completion=total - release_sum,
    )


def evaluate(
    sol: EvaluatedSolution,
    inst: Instance,
    windows: TimeWindows | None = None,
    raw_release: bool = False,
) -> tuple[float, float]:
    """Recompute (F, F') from the solution's completion times.

    F' subtracts the release-time constant; tightened releases by default,
    the raw file values behind raw_release.
    """
    if not sol.timing.completion:
        raise ValueError("solution has no schedule attached")
    if windows is None:
        windows = preprocess_time_windows(inst)
    total = float(sum(sol.timing.completion.values()))
    return total, total - _release_sum(inst, windows, raw_release)


def _release_sum(inst, windows, raw_release):
    if raw_release:
        return float(sum(site.release for site in inst.sites[1:]))
    return float(np.sum(windows.release[1:]))


def validate_solution(
    sol: EvaluatedSolution,
    inst: Instance,
    windows: TimeWindows | None = None,
    raw_release: bool = False,
) -> ValidationReport:
    """Check a solution against every feasibility clause; collect all violations.

    Checks: request partition, fleet bound, window containment, leg-by-leg
    time consistency (waiting allowed), shift caps, depot deadline,
    completion/delivery consistency, and the reported objectives.
    """
    if windows is None:
        windows = preprocess_time_windows(inst)
    travel = inst.travel
    release, deadline = windows.release, windows.deadline
    bad: list[str] = []

    seen: dict[int, int] = {}
    for tour in sol.tours:
        for node in tour.visited:
            seen[node] = seen.get(node, 0) + 1
    for node, count in sorted(seen.items()):
        if node < 1 or node > inst.n:
            bad.append(f"unknown node {node} visited")
        elif count > 1:
            bad.append(f"node {node} visited {count} times")
    for node in inst.points_of_care:
        if node not in seen:
            bad.append(f"node {node} never visited")

    if len(sol.tours) > inst.fleet_size:
        bad.append(f"{len(sol.tours)} tours exceed fleet size {inst.fleet_size}")

    visit = sol.timing.visit
    if len(sol.timing.deliveries) != len(sol.tours):
        bad.append("deliveries do not match the number of tours")

    for ti, tour in enumerate(sol.tours):
        delivered = sol.timing.deliveries[ti] if ti < len(sol.timing.deliveries) else ()
        if len(delivered) != len(tour.trips):
            bad.append(f"vehicle {tour.vehicle}: delivery count mismatch")
            continue
        if tour.departure < -TIME_TOL:
            bad.append(f"vehicle {tour.vehicle}: negative departure {tour.departure:.6g}")
        clock = tour.departure
        at = 0
        broken = False
        for trip, ret in zip(tour.trips, delivered):
            for node in trip.nodes:
                z = visit.get(node)
                if z is None:
                    bad.append(f"node {node} routed but has no visit time")
                    broken = True
                    break
                if z < release[node] - TIME_TOL or z > deadline[node] + TIME_TOL:
                    bad.append(
                        f"node {node} visited at {z:.6g} outside window "
                        f"[{release[node]:.6g}, {deadline[node]:.6g}]"
                    )
                if z < clock + travel[at, node] - TIME_TOL:
                    bad.append(
                        f"vehicle {tour.vehicle}: visit of {node} at {z:.6g} "
                        f"before reachable time {clock + travel[at, node]:.6g}"
                    )
                clock, at = z, node
            if broken:
                break
            expected = clock + travel[at, 0]
            if abs(ret - expected) > TIME_TOL:
                bad.append(
                    f"vehicle {tour.vehicle}: trip return {ret:.6g} != "
                    f"last visit + depot leg {expected:.6g}"
                )
            clock, at = ret, 0
        if broken:
            continue
        if delivered:
            shift = delivered[-1] - tour.departure
            if shift > inst.shift_cap + TIME_TOL:
                bad.append(
                    f"vehicle {tour.vehicle}: shift {shift:.6g} exceeds cap {inst.shift_cap:.6g}"
                )
            if delivered[-1] > inst.depot_deadline + TIME_TOL:
                bad.append(
                    f"vehicle {tour.vehicle}: final return {delivered[-1]:.6g} "
                    f"after depot deadline {inst.depot_deadline:.6g}"
                )
        for trip, ret in zip(tour.trips, delivered):
            for node in trip.nodes:
                got = sol.timing.completion.get(node)
                if got is None:
                    bad.append(f"node {node} has no completion time")
                elif abs(got - ret) > TIME_TOL:
                    bad.append(
                        f"node {node}: completion {got:.6g} != trip delivery {ret:.6g}"
                    )

    total = float(sum(sol.timing.completion.values()))
    if abs(sol.total_completion - total) > TIME_TOL:
        bad.append(
            f"reported total completion {sol.total_completion:.6g} != recomputed {total:.6g}"
        )
    net = total - _release_sum(inst, windows, raw_release)
    if abs(sol.net_completion - net) > TIME_TOL:
        bad.append(
            f"reported net completion {sol.net_completion:.6g} != recomputed {net:.6g}"
        )

    return ValidationReport(violations=tuple(bad))


def solution_to_json(sol: EvaluatedSolution, fingerprint: dict | None = None) -> dict:
    """JSON-serializable form: tours, timing, objectives, config fingerprint."""
    return {
        "tours": [
            {
                "vehicle": tour.vehicle,
                "departure": tour.departure,
                "trips": [list(trip.nodes) for trip in tour.trips],
            }
            for tour in sol.tours
        ],
        "timing": {
            "visit": {str(node): t for node, t in sorted(sol.timing.visit.items())},
            "deliveries": [list(d) for d in sol.timing.deliveries],
            "completion": {str(node): t for node, t in sorted(sol.timing.completion.items())},
        },
        "F": sol.total_completion,
        "F_prime": sol.net_completion,
        "config": dict(fingerprint or {}),
    }
