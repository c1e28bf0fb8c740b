"""Deterministic derivative-free maximizers for cheap 1-D and 2-D objectives.

Objectives may return ``-inf`` (or NaN) to mark infeasible arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class InfeasibleError(ValueError):
    """Every evaluated point was infeasible."""


@dataclass(frozen=True)
class OptConfig:
    coarse_points: int = 256
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.coarse_points < 8:
            raise ValueError("coarse_points must be >= 8")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


def _safe(f: Callable[[float], float]) -> Callable[[float], float]:
    def wrapped(x):
        y = f(x)
        y = float(y)
        return -math.inf if math.isnan(y) else y

    return wrapped


def golden_section_max(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200) -> Tuple[float, float]:
    """Golden-section search for a maximum of a unimodal ``f`` on ``[a, b]``.

    Ties between the two interior probes keep the left sub-interval.
    """
    f = _safe(f)
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize_1d(
    f: Callable[[float], float],
    interval: Sequence[float],
    cfg: OptConfig = OptConfig(),
    tie_break: str = "middle",
) -> Tuple[float, float]:
    """Coarse scan followed by golden-section refinement around the best bracket.

    The returned value is never below the best coarse-scan point.  Exact ties
    on the coarse grid are broken toward the middle of the interval (so a
    constant objective returns the midpoint) or, with ``tie_break="left"``,
    toward the lower end.  Separate peaks narrower than the grid spacing can
    be missed.

    Raises:
        InfeasibleError: if every coarse point is infeasible.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    f = _safe(f)
    # odd grid so that the midpoint is a grid point
    n = cfg.coarse_points | 1
    xs = np.linspace(lo, hi, n)
    ys = np.array([f(x) for x in xs])
    if not np.any(np.isfinite(ys)):
        raise InfeasibleError("objective is infeasible on the whole coarse grid")
    best = ys.max()
    ties = np.flatnonzero(ys == best)
    if tie_break == "left":
        i = int(ties[0])
    elif tie_break == "middle":
        mid = (n - 1) / 2.0
        i = int(ties[np.argmin(np.abs(ties - mid))])
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}")
    x_best, y_best = float(xs[i]), float(ys[i])
    if len(ties) > 1:
        return x_best, y_best
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n - 1)]
    x_ref, y_ref = golden_section_max(f, a, b, cfg.tol, cfg.max_iter)
    if y_ref > y_best:
        return float(x_ref), float(y_ref)
    return x_best, y_best


def maximize_grid_2d(f: Callable[[float, float], float], box, resolution) -> Tuple[Tuple[float, float], float]:
    """Exhaustive grid search; the first maximum in row-major order wins.

    Args:
        box: ``((x_lo, x_hi), (y_lo, y_hi))``.
        resolution: points per axis, an int or a pair.
    """
    if np.isscalar(resolution):
        resolution = (int(resolution), int(resolution))
    (x_lo, x_hi), (y_lo, y_hi) = box
    xs = np.linspace(x_lo, x_hi, resolution[0])
    ys = np.linspace(y_lo, y_hi, resolution[1])
    f = _safe_2d(f)
    best, arg = -math.inf, (float("nan"), float("nan"))
    for x in xs:
        for y in ys:
            v = f(x, y)
            if v > best:
                best, arg = v, (float(x), float(y))
    return arg, best


def _safe_2d(f):
    def wrapped(x, y):
        v = float(f(x, y))
        return -math.inf if math.isnan(v) else v

    return wrapped
