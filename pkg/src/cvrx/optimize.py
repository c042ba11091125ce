"""Deterministic derivative-free minimisers.

Both wrappers sit on top of ``scipy.optimize``: bounded Brent (golden-section
with parabolic steps) for scalars, and bounded Nelder-Mead with seeded
restarts for vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as _sp

from .errors import NumericError


@dataclass(frozen=True)
class OptimizeReport:
    best_point: np.ndarray
    best_value: float
    evaluations: int
    converged: bool
    restarts: list[float] = field(default_factory=list, compare=False)


class _Counted:
    def __init__(self, f):
        self.f = f
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        v = float(self.f(x))
        if not math.isfinite(v):
            raise NumericError(f"objective returned {v} at {x!r}")
        return v


def minimize_scalar(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10, maxiter: int = 500
) -> OptimizeReport:
    """Minimise ``f`` on ``[lo, hi]``; endpoints are also evaluated so monotone
    objectives return the boundary exactly."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    fc = _Counted(f)
    res = _sp.minimize_scalar(
        fc, bounds=(lo, hi), method="bounded", options={"xatol": tol, "maxiter": maxiter}
    )
    candidates = [(fc(lo), lo), (fc(hi), hi), (fc(float(res.x)), float(res.x))]
    # ties go to the interior point, then the lower endpoint
    value, x = min(candidates, key=lambda c: (c[0], c[1] in (lo, hi)))
    return OptimizeReport(
        best_point=np.array([x]), best_value=value, evaluations=fc.calls, converged=bool(res.success)
    )


def minimize_multi(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    bounds: Sequence[tuple[float, float]],
    tol: float = 1e-8,
    restarts: int = 0,
    seed: int = 0,
    max_evals: int = 2000,
) -> OptimizeReport:
    """Bounded Nelder-Mead from ``x0`` plus ``restarts`` seeded random starts.

    ``max_evals`` applies to each start. The report carries the best point over
    all starts; ``converged`` is false if any start ran out of budget before
    meeting ``tol``.
    """
    x0 = np.asarray(x0, dtype=float)
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    if x0.shape != lo.shape or np.any(x0 < lo) or np.any(x0 > hi):
        raise ValueError("x0 must lie within bounds")
    fc = _Counted(f)
    rng = np.random.default_rng(seed)
    starts = [x0] + [rng.uniform(lo, hi) for _ in range(restarts)]

    best_x, best_v = x0.copy(), fc(x0)
    converged = True
    finals = []
    for start in starts:
        res = _sp.minimize(
            fc,
            start,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={"xatol": tol, "fatol": tol, "maxfev": max_evals},
        )
        converged &= bool(res.success)
        x = np.clip(res.x, lo, hi)
        v = fc(x)
        finals.append(v)
        if v < best_v:
            best_x, best_v = x, v
    return OptimizeReport(
        best_point=best_x,
        best_value=best_v,
        evaluations=fc.calls,
        converged=converged,
        restarts=finals,
    )
