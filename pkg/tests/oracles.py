"""Independent reference implementations used as test oracles.

Deliberately written with plain Python loops, straight from the textbook
definitions, so they share no code path with the package.
"""

from __future__ import annotations

import math
from typing import Sequence


def reference_topsis(
    values: Sequence[Sequence[float]],
    weights: Sequence[float],
    benefit: Sequence[bool],
) -> list[float]:
    """Step-by-step TOPSIS closeness coefficients.

    1. vector-normalize each column (all-zero columns stay zero)
    2. multiply by weights
    3. ideal = per-column best, anti-ideal = per-column worst
    4. Euclidean distances, closeness = d_minus / (d_plus + d_minus)
    """
    n = len(values)
    m = len(values[0])
    assert len(weights) == m and len(benefit) == m

    norms = [math.sqrt(sum(values[i][j] ** 2 for i in range(n))) for j in range(m)]
    r = [
        [values[i][j] / norms[j] if norms[j] > 0 else 0.0 for j in range(m)]
        for i in range(n)
    ]
    v = [[r[i][j] * weights[j] for j in range(m)] for i in range(n)]

    ideal = [
        max(v[i][j] for i in range(n)) if benefit[j] else min(v[i][j] for i in range(n))
        for j in range(m)
    ]
    anti = [
        min(v[i][j] for i in range(n)) if benefit[j] else max(v[i][j] for i in range(n))
        for j in range(m)
    ]

    closeness = []
    for i in range(n):
        d_plus = math.sqrt(sum((v[i][j] - ideal[j]) ** 2 for j in range(m)))
        d_minus = math.sqrt(sum((v[i][j] - anti[j]) ** 2 for j in range(m)))
        total = d_plus + d_minus
        closeness.append(d_minus / total if total > 0 else 0.0)
    return closeness
