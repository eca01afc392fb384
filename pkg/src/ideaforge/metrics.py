"""Agreement and significance statistics for judgment data.

All functions are pure and operate on plain sequences; nothing here knows
about run directories or HTTP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .errors import StatsError

Code = Hashable  # nominal rating code; None marks a missing cell


def krippendorff_alpha(matrix: Sequence[Sequence[Code]], level: str = "nominal") -> float:
    """Krippendorff's alpha for nominal codes with missing cells.

    ``matrix`` is items x raters; ``None`` cells are missing. Units rated by
    fewer than two raters carry no pairable information and are dropped. If
    every pairable value is the same code, expected disagreement is zero and
    alpha is 1.0 by convention.
    """
    if level != "nominal":
        raise StatsError(f"unsupported measurement level {level!r}")
    if len(matrix) < 2:
        raise StatsError("alpha needs at least 2 items")

    units = []
    for row in matrix:
        values = [v for v in row if v is not None]
        if len(values) >= 2:
            units.append(values)
    if not units:
        raise StatsError("alpha undefined: no item is rated by 2 or more raters")

    # Coincidence counts: each ordered pair of values within a unit of size m
    # contributes 1/(m-1).
    pair_counts: dict[tuple[Code, Code], float] = {}
    totals: dict[Code, float] = {}
    for values in units:
        m = len(values)
        weight = 1.0 / (m - 1)
        for i, a in enumerate(values):
            totals[a] = totals.get(a, 0.0) + 1.0
            for j, b in enumerate(values):
                if i != j:
                    pair_counts[(a, b)] = pair_counts.get((a, b), 0.0) + weight

    n = sum(totals.values())
    observed = sum(count for (a, b), count in pair_counts.items() if a != b)
    expected = sum(
        totals[a] * totals[b] for a in totals for b in totals if a != b
    )
    if expected == 0.0:
        return 1.0
    return 1.0 - (n - 1.0) * observed / expected


def matrix_from_triples(
    triples: Iterable[tuple[Hashable, Hashable, Code]],
) -> list[list[Code]]:
    """Items x raters matrix from (unit, rater, code) records.

    Row/column order follows first appearance; a duplicate (unit, rater) cell
    is a caller bug and raises.
    """
    units: list[Hashable] = []
    raters: list[Hashable] = []
    cells: dict[tuple[Hashable, Hashable], Code] = {}
    for unit, rater, code in triples:
        if (unit, rater) in cells:
            raise StatsError(f"duplicate rating for unit {unit!r} by rater {rater!r}")
        if unit not in units:
            units.append(unit)
        if rater not in raters:
            raters.append(rater)
        cells[(unit, rater)] = code
    return [[cells.get((u, r)) for r in raters] for u in units]


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) != len(y):
        raise StatsError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise StatsError("pearson needs at least 2 points")
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    var_x = math.fsum(d * d for d in dx)
    var_y = math.fsum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise StatsError("pearson undefined for zero-variance input")
    cov = math.fsum(a * b for a, b in zip(dx, dy))
    r = cov / math.sqrt(var_x * var_y)
    return max(-1.0, min(1.0, r))


def phi(z: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class ZTestResult:
    z: float
    p: float


def win_rate_ztest(wins_a: int, wins_b: int) -> ZTestResult:
    """Two-tailed sign test on win counts, normal approximation.

    z = (a - b)/sqrt(a + b); ties must be excluded by the caller. For small
    counts the approximation is coarse; see binomial_exact.
    """
    if wins_a < 0 or wins_b < 0:
        raise StatsError("win counts must be non-negative")
    n = wins_a + wins_b
    if n == 0:
        raise StatsError("ztest undefined with zero decisive outcomes")
    z = (wins_a - wins_b) / math.sqrt(n)
    p = 2.0 * (1.0 - phi(abs(z)))
    return ZTestResult(z=z, p=min(1.0, p))


def binomial_exact(wins_a: int, wins_b: int) -> float:
    """Exact two-sided sign-test p: doubled smaller tail of Binomial(n, 1/2)."""
    if wins_a < 0 or wins_b < 0:
        raise StatsError("win counts must be non-negative")
    n = wins_a + wins_b
    if n == 0:
        raise StatsError("binomial test undefined with zero decisive outcomes")
    m = min(wins_a, wins_b)
    tail = sum(math.comb(n, k) for k in range(m + 1))
    return min(1.0, 2.0 * tail / 2.0**n)
