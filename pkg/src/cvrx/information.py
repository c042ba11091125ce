"""Binary asymmetric channel capacity and photon information efficiency (bits per photon)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .optimize import minimize_scalar
from .receivers import ErrorRateResult, helstrom


def binary_entropy(p: float) -> float:
    """``-p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``."""
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    if p in (0.0, 1.0):
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


@dataclass(frozen=True)
class BinaryChannel:
    """Crossover probabilities: ``p01`` = P(decide - | + sent), ``p10`` = P(decide + | - sent)."""

    p01: float
    p10: float

    def __post_init__(self):
        for name in ("p01", "p10"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    @classmethod
    def from_result(cls, r: ErrorRateResult) -> "BinaryChannel":
        return cls(min(max(r.p_wrong_given_plus, 0.0), 1.0), min(max(r.p_wrong_given_minus, 0.0), 1.0))

    @property
    def matrix(self) -> np.ndarray:
        """Row ``i`` is the output distribution given input ``i`` (0 is "+")."""
        return np.array([[1 - self.p01, self.p01], [self.p10, 1 - self.p10]])

    def swapped(self) -> "BinaryChannel":
        return BinaryChannel(self.p10, self.p01)


def mutual_information(ch: BinaryChannel, q: float) -> float:
    """Mutual information in bits for input prior ``q`` on "+"."""
    out = q * (1 - ch.p01) + (1 - q) * ch.p10
    return binary_entropy(min(max(out, 0.0), 1.0)) - q * binary_entropy(ch.p01) - (1 - q) * binary_entropy(ch.p10)


def bac_capacity(ch: BinaryChannel, tol: float = 1e-12) -> tuple[float, float]:
    """Capacity and capacity-achieving prior by maximising the (concave) mutual information."""
    rep = minimize_scalar(lambda q: -mutual_information(ch, q), 0.0, 1.0, tol=tol)
    return max(-rep.best_value, 0.0), float(rep.best_point[0])


def bac_capacity_closed_form(ch: BinaryChannel) -> tuple[float, float]:
    """Closed-form capacity of a binary channel.

    With row entropies ``h`` and channel matrix ``W``, set ``c = -W^{-1} h``.
    Then ``C = log2(2^{c_0} + 2^{c_1})``; the optimal output distribution is
    ``2^{c_j - C}`` and the prior follows by inverting ``W^T``. Rows that are
    equal (``p01 + p10 = 1``) carry no information.
    """
    w = ch.matrix
    if abs(1 - ch.p01 - ch.p10) < 1e-15:
        return 0.0, 0.5
    h = np.array([binary_entropy(ch.p01), binary_entropy(ch.p10)])
    c = -np.linalg.solve(w, h)
    cap = float(np.logaddexp2(c[0], c[1]))
    out = np.exp2(c - cap)
    q = np.linalg.solve(w.T, out)
    return cap, float(np.clip(q[0], 0.0, 1.0))


def pie(ch: BinaryChannel, nbar: float) -> float:
    """Photon information efficiency: capacity per mean photon number."""
    if not nbar > 0:
        raise DegenerateInputError(f"mean photon number must be positive, got {nbar!r}")
    return bac_capacity(ch)[0] / nbar


def pie_bound(alpha: float) -> float:
    """Symbol-by-symbol bound ``(1 - H2(p_helstrom)) / |alpha|^2``."""
    nbar = abs(alpha) ** 2
    if nbar == 0:
        raise DegenerateInputError("mean photon number must be positive")
    return (1 - binary_entropy(helstrom(alpha))) / nbar
