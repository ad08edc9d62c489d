from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.stats import qmc


def neville_to_zero(
    x: Sequence[float], y: Sequence[float]
) -> Tuple[float, List[List[float]]]:
    """
    Extrapolate the samples (x_i, y_i) to x = 0 with Neville's scheme.

    Returns the last diagonal entry and the full tableau; tableau[k][i] is the value at 0
    of the polynomial through points i-k..i.
    """
    xs = np.asarray(x, dtype=float)
    if len(xs) != len(y) or len(xs) < 2:
        raise ValueError(f"need at least two matching samples, got {len(xs)}/{len(y)}")
    table: List[List[float]] = [[float(v) for v in y]]
    for k in range(1, len(xs)):
        prev = table[-1]
        row = [float("nan")] * len(xs)
        for i in range(k, len(xs)):
            # P(0) from the two overlapping interpolants of order k-1
            row[i] = (xs[i] * prev[i - 1] - xs[i - k] * prev[i]) / (xs[i] - xs[i - k])
        table.append(row)
    return table[-1][-1], table


def diagonal(table: List[List[float]]) -> List[float]:
    """Diagonal estimates tableau[k][k] of a Neville tableau."""
    return [table[k][k] for k in range(len(table))]


def loglog_slope(
    r: Sequence[float], values: Sequence[float]
) -> Tuple[float, float, float]:
    """
    Least-squares slope of log|values| against log r.

    Returns (slope, intercept, stderr of slope).
    """
    r = np.asarray(r, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if len(r) < 2:
        raise ValueError("a slope needs at least two samples")
    if len(r) == 2:
        slope = float(np.diff(np.log(v))[0] / np.diff(np.log(r))[0])
        return slope, float(np.log(v[0]) - slope * np.log(r[0])), 0.0
    fit = stats.linregress(np.log(r), np.log(v))
    return float(fit.slope), float(fit.intercept), float(fit.stderr)


def successive_orders(h: Sequence[float], errors: Sequence[float]) -> List[float]:
    """Local orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}) for consecutive refinements."""
    out = []
    for i in range(len(h) - 1):
        out.append(
            float(np.log(errors[i] / errors[i + 1]) / np.log(h[i] / h[i + 1]))
        )
    return out


def low_discrepancy_points(
    count: int, dim: int, seed: int = 42, box: Optional[Tuple[float, float]] = None
) -> np.ndarray:
    """Scrambled Halton points in [0, 1]^dim (or the given box), shape (count, dim)."""
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    pts = sampler.random(count)
    if box is not None:
        lo, hi = box
        pts = lo + (hi - lo) * pts
    return pts


def relative_error(value: float, reference: float) -> float:
    if reference == 0.0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def as_points(x, n: int) -> np.ndarray:
    """Coerce a scalar, a single point or a stack of points to shape (m, n)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if n == 1 else arr.reshape(1, -1)
    if arr.shape[-1] != n:
        raise ValueError(f"points must have {n} coordinate(s), got shape {arr.shape}")
    return arr
