"""Sasaki-Hirota generator for binary coherent-state discrimination.

The generator of order ``M`` acts after the receiver displaces the signal by
``-alpha``, so the two hypotheses arrive as ``|0>`` and ``|-2 alpha>``. It has
the form ``X - X^dag`` with

    X = sum_{l=0}^{M} (-a^dag)^l a^l / l!  *  sum_{n=1}^{M} d_n a^n / sqrt(n!)

which is anti-Hermitian, and the receiver unitary is ``exp(t K)`` with ``K`` the
generator and ``t`` the interaction time from :func:`optimal_time`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import DegenerateInputError


@dataclass(frozen=True)
class SHCoefficients:
    c: np.ndarray  # c_0 .. c_M
    d: np.ndarray  # d_1 .. d_M

    @property
    def order(self) -> int:
        return len(self.d)


def _check_order(m) -> None:
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"order M must be an integer >= 1, got {m!r}")


def coefficients(alpha: float, m: int) -> SHCoefficients:
    """Expansion coefficients ``c_n`` and normalised ``d_n = c_n / sqrt(1 - c_0^2)``.

    The normalising sum over ``|<k|-2 alpha>|^2`` runs over ``k = 0..M`` only,
    which makes ``sum(c_n^2) = 1`` exact at every order.
    """
    _check_order(m)
    alpha = abs(float(alpha))
    if alpha == 0:
        raise DegenerateInputError("alpha = 0 gives c_0 = 1 and undefined d_n")
    n = np.arange(m + 1)
    lfact = np.array([math.lgamma(k + 1) for k in n])
    # |<k|-2a>|^2 = exp(-4a^2) (4a^2)^k / k!
    log_w = -4 * alpha**2 + n * math.log(4 * alpha**2) - lfact
    log_norm = np.logaddexp.reduce(log_w) / 2
    mag = np.exp(n * math.log(2 * alpha) - lfact / 2 - 2 * alpha**2 - log_norm)
    c = mag * (-1.0) ** n
    d = c[1:] / math.sqrt(1 - c[0] ** 2)
    return SHCoefficients(c=c, d=d)


def generator(alpha: float, m: int, d: int) -> np.ndarray:
    """Anti-Hermitian generator ``K = X - X^dag`` of order ``m`` on ``d`` levels.

    Normal-ordered ladder products map the truncated space into itself, so the
    result is the exact ``d x d`` block of the untruncated operator.
    """
    coef = coefficients(alpha, m)
    a = fock.annihilation_op(d)
    ad = a.conj().T
    proj = np.zeros((d, d), dtype=complex)
    raise_l = np.eye(d, dtype=complex)
    lower_l = np.eye(d, dtype=complex)
    for l in range(m + 1):
        proj += (-1) ** l * (raise_l @ lower_l) / math.factorial(l)
        raise_l = raise_l @ ad
        lower_l = lower_l @ a
    lower = np.zeros((d, d), dtype=complex)
    a_n = np.eye(d, dtype=complex)
    for k in range(1, m + 1):
        a_n = a_n @ a
        lower += coef.d[k - 1] * a_n / math.sqrt(math.factorial(k))
    x = proj @ lower
    return x - x.conj().T


def optimal_time(alpha: float) -> float:
    """Interaction time trading off the two conditional errors; lies in ``(-pi/4, 0)``."""
    alpha = abs(float(alpha))
    if alpha == 0:
        raise DegenerateInputError("interaction time is undefined at alpha = 0")
    one_minus_e = -math.expm1(-4 * alpha**2)  # 1 - exp(-4 alpha^2) without cancellation
    root = math.sqrt(one_minus_e)
    ratio = (root - one_minus_e) / (root + one_minus_e)
    return -math.atan(math.sqrt(ratio))


def m1_generator(d: int) -> np.ndarray:
    """The order-one generator written in quadratures, ``-4ip + 2ip^3 + i(x^2 p + p x^2)``."""
    return fock.polynomial({"p": -4j, "ppp": 2j, "xxp": 1j, "pxx": 1j}, d)


def exact_unitary_m1(t: float, d: int) -> np.ndarray:
    """``exp[(-4ip + 2ip^3 + i x^2 p + i p x^2) t]`` on ``d`` levels."""
    return fock.unitary_from_generator(m1_generator(d), t)


def sh_unitary(alpha: float, m: int, d: int, t: float | None = None) -> np.ndarray:
    if t is None:
        t = optimal_time(alpha)
    return fock.unitary_from_generator(generator(alpha, m, d), t)
