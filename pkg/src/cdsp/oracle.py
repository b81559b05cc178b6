"""Exhaustive exact solver for desk-scale instances.

Ground truth for tests: enumerates every assignment of requests to at most
K vehicles, every visiting order per vehicle and every trip-split pattern,
times each candidate with the fixed-route scheduler and keeps the minimum
total completion time. Exponential; refuses instances beyond a small size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .instances import Instance
from .network import TimeWindows, preprocess_time_windows
from .routes import EvaluatedSolution, InfeasibleTourError, assemble_solution, schedule_tour

DEFAULT_LIMIT = 7


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class OracleResult:
    solution: EvaluatedSolution | None
    best_total: float  # objective F; infinity when nothing is feasible
    candidates: int  # routing candidates covered by the search

    @property
    def feasible(self) -> bool:
        return self.solution is not None


def exact_solve_tiny(
    inst: Instance,
    windows: TimeWindows | None = None,
    limit: int = DEFAULT_LIMIT,
) -> OracleResult:
    """Globally optimal solution by exhaustive enumeration (n <= limit).

    Enumeration is deterministic; ties between equal-objective candidates
    break to the lexicographically smallest route encoding, so golden values
    derived from this solver are stable.
    """
    n = inst.n
    if n > limit:
        raise OracleSizeError(f"n={n} exceeds the exhaustive-search limit {limit}")
    if windows is None:
        windows = preprocess_time_windows(inst)

    # Tours of different vehicles interact only through the request
    # partition, so the best tour per request set can be computed once and
    # reused across partitions.
    best_tour_cache: dict[frozenset[int], tuple[float, tuple[tuple[int, ...], ...]] | None] = {}

    def best_tour(block: frozenset[int]):
        if block in best_tour_cache:
            return best_tour_cache[block]
        best: tuple[float, tuple[tuple[int, ...], ...]] | None = None
        for perm in itertools.permutations(sorted(block)):
            for split_bits in range(1 << (len(perm) - 1)):
                trips = _split(perm, split_bits)
                try:
                    timing = schedule_tour(trips, inst, windows)
                except InfeasibleTourError:
                    continue
                total = sum(
                    delivered * len(trip) for trip, delivered in zip(trips, timing.deliveries)
                )
                key = (total, trips)
                if best is None or total < best[0] or (total == best[0] and trips < best[1]):
                    best = key
        best_tour_cache[block] = best
        return best

    def tour_count(size: int) -> int:
        return math.factorial(size) * (1 << (size - 1))

    best_total = math.inf
    best_routes: tuple[tuple[tuple[int, ...], ...], ...] | None = None
    candidates = 0
    max_blocks = min(inst.fleet_size, n)
    for partition in _set_partitions(list(inst.points_of_care), max_blocks):
        candidates += math.prod(tour_count(len(block)) for block in partition)
        total = 0.0
        routes = []
        feasible = True
        for block in partition:
            found = best_tour(frozenset(block))
            if found is None:
                feasible = False
                break
            total += found[0]
            routes.append(found[1])
        if not feasible:
            continue
        encoding = tuple(sorted(routes))
        if total < best_total or (
            total == best_total and best_routes is not None and encoding < best_routes
        ):
            best_total = total
            best_routes = encoding

    if best_routes is None:
        return OracleResult(solution=None, best_total=math.inf, candidates=candidates)
    solution = assemble_solution(best_routes, inst, windows)
    return OracleResult(solution=solution, best_total=best_total, candidates=candidates)


def _split(perm: tuple[int, ...], bits: int) -> tuple[tuple[int, ...], ...]:
    """Cut an ordered visit sequence into trips; set bit i splits after stop i."""
    trips: list[list[int]] = [[perm[0]]]
    for i, node in enumerate(perm[1:]):
        if bits >> i & 1:
            trips.append([node])
        else:
            trips[-1].append(node)
    return tuple(tuple(t) for t in trips)


def _set_partitions(items: list[int], max_blocks: int):
    """All partitions of items into at most max_blocks nonempty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest, max_blocks):
        for i in range(len(part)):
            yield [*part[:i], [first, *part[i]], *part[i + 1 :]]
        if len(part) < max_blocks:
            yield [[first], *part]
