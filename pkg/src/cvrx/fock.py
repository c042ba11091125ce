"""Linear algebra on a truncated single-mode Fock space.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``; states are
length-``d`` vectors or ``(d, d)`` density matrices. Quadratures follow the
convention ``a = x + i p`` with ``[x, p] = i/2``, so the vacuum has
``<x^2> = <p^2> = 1/4``.

Polynomials in ``x`` and ``p`` are built as *compressions*: the product is
formed in a padded space and then cropped, so every entry of the returned
``d x d`` block equals the matrix element of the untruncated operator.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammainc

from .errors import (
    ContractViolation,
    InvalidDimensionError,
    NumericError,
    TruncationError,
)

DEFAULT_DIM = 40
COHERENT_TAIL_TOL = 1e-10


def default_dim() -> int:
    """Working dimension, overridable through ``CVRX_DEFAULT_DIM``."""
    raw = os.environ.get("CVRX_DEFAULT_DIM")
    if raw is None:
        return DEFAULT_DIM
    try:
        d = int(raw)
    except ValueError:
        raise InvalidDimensionError(f"CVRX_DEFAULT_DIM={raw!r} is not an integer") from None
    _check_dim(d)
    return d


def _check_dim(d) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")


def low_block(d: int) -> int:
    """Number of Fock levels trusted when comparing operator identities.

    Cubic-phase dynamics push amplitude from level ``n`` out to roughly
    ``n + (kick)^2`` levels, so only the bottom tenth of the basis is free of
    truncation artefacts for the gate strengths used here.
    """
    return max(2, d // 10)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def _ladder(d: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)
    return _readonly(a)


def annihilation_op(d: int) -> np.ndarray:
    """Truncated annihilation operator with ``<n-1|a|n> = sqrt(n)``."""
    _check_dim(d)
    return _ladder(d).copy()


def creation_op(d: int) -> np.ndarray:
    _check_dim(d)
    return _ladder(d).T.conj().copy()


def number_op(d: int) -> np.ndarray:
    _check_dim(d)
    return np.diag(np.arange(d, dtype=float)).astype(complex)


def quadrature_ops(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(x, p)`` with ``x = (a + a^dag)/2`` and ``p = (a - a^dag)/(2i)``."""
    _check_dim(d)
    a = _ladder(d)
    ad = a.T.conj()
    return (a + ad) / 2, (a - ad) / 2j


@lru_cache(maxsize=256)
def _monomial(word: str, d: int) -> np.ndarray:
    big = d + len(word)
    x, p = quadrature_ops(big)
    out = np.eye(big, dtype=complex)
    for ch in word:
        out = out @ (x if ch == "x" else p)
    return _readonly(np.ascontiguousarray(out[:d, :d]))


def monomial(word: str, d: int) -> np.ndarray:
    """Exact ``d x d`` block of an ordered product of quadratures.

    ``word`` is read left to right, so ``monomial("xxp", d)`` is ``x x p``.
    """
    _check_word(word)
    _check_dim(d)
    return _monomial(word, d).copy()


def _check_word(word: str) -> None:
    if not word or set(word) - {"x", "p"}:
        raise ValueError(f"word must be a non-empty string over 'x'/'p', got {word!r}")


def polynomial(terms: dict[str, complex], d: int) -> np.ndarray:
    """Linear combination ``sum(coef * monomial(word))`` of quadrature words."""
    _check_dim(d)
    for word in terms:
        _check_word(word)
    out = np.zeros((d, d), dtype=complex)
    for word, coef in terms.items():
        out += coef * _monomial(word, d)
    return out


def adjoint(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def is_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(np.linalg.norm(a), 1.0)
    return np.linalg.norm(a - adjoint(a)) <= tol * scale


def is_anti_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(np.linalg.norm(a), 1.0)
    return np.linalg.norm(a + adjoint(a)) <= tol * scale


def coherent_tail_mass(alpha: complex, d: int) -> float:
    """Poisson weight ``P(n >= d)`` of a coherent state with amplitude ``alpha``."""
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 0.0
    return float(gammainc(d, lam))


def coherent_state(alpha: complex, d: int, tol: float = COHERENT_TAIL_TOL) -> np.ndarray:
    """Closed-form coherent state ``|alpha>`` on ``d`` levels, renormalised.

    Raises:
        TruncationError: if more than ``tol`` of the photon-number distribution
            lies at or above level ``d``.
    """
    _check_dim(d)
    tail = coherent_tail_mass(alpha, d)
    if tail > tol:
        raise TruncationError(f"coherent state alpha={alpha} does not fit in d={d}", tail)
    n = np.arange(d)
    alpha = complex(alpha)
    if alpha == 0:
        psi = np.zeros(d, dtype=complex)
        psi[0] = 1.0
        return psi
    # log-space coefficients avoid overflow of alpha^n / sqrt(n!)
    logmag = n * math.log(abs(alpha)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    psi = np.exp(logmag - abs(alpha) ** 2 / 2) * np.exp(1j * n * np.angle(alpha))
    return psi / np.linalg.norm(psi)


def fock_state(n: int, d: int) -> np.ndarray:
    _check_dim(d)
    psi = np.zeros(d, dtype=complex)
    psi[n] = 1.0
    return psi


def density_matrix(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def validate_density_matrix(rho: np.ndarray, herm_tol=1e-12, trace_tol=1e-10, eig_tol=1e-10) -> None:
    if not is_hermitian(rho, herm_tol):
        raise ContractViolation("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise ContractViolation(f"density matrix trace {tr} != 1")
    lo = np.linalg.eigvalsh((rho + adjoint(rho)) / 2).min()
    if lo < -eig_tol:
        raise ContractViolation(f"density matrix has negative eigenvalue {lo}")


class HermitianPropagator:
    """Spectral form of ``exp(i s H)`` for a fixed Hermitian ``H``.

    The eigendecomposition is computed once; each call with a new ``s`` costs a
    single scaled matrix product.
    """

    def __init__(self, h: np.ndarray):
        try:
            w, v = np.linalg.eigh(h)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"eigensolver failed: {exc}") from exc
        self.eigenvalues = _readonly(w)
        self.eigenvectors = _readonly(v)
        self.dim = h.shape[0]

    def __call__(self, s: float) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.exp(1j * s * self.eigenvalues)) @ v.conj().T


@lru_cache(maxsize=256)
def monomial_propagator(word: str, d: int) -> HermitianPropagator:
    """Cached propagator for ``exp(i s W)`` where ``W`` is a Hermitian quadrature word."""
    h = _monomial(word, d)
    return HermitianPropagator((h + adjoint(h)) / 2)


def unitary_from_generator(g: np.ndarray, t: float = 1.0, tol: float = 1e-10) -> np.ndarray:
    """Return ``exp(t G)`` for an anti-Hermitian generator ``G``.

    ``-iG`` is Hermitian, so the exponential is formed from its
    eigendecomposition and is unitary to roundoff.
    """
    g = np.asarray(g, dtype=complex)
    scale = np.linalg.norm(g)
    if scale == 0:
        return np.eye(g.shape[0], dtype=complex)
    if np.linalg.norm(g + adjoint(g)) > tol * scale:
        raise ContractViolation("generator is not anti-Hermitian")
    h = -1j * g
    return HermitianPropagator((h + adjoint(h)) / 2)(t)


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.linalg.norm(adjoint(u) @ u - np.eye(u.shape[0])))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def partial_trace_second(rho: np.ndarray, d2: int) -> np.ndarray:
    """Trace out the second factor of a bipartite operator on ``d1 * d2`` levels."""
    n = rho.shape[0]
    if n % d2:
        raise InvalidDimensionError(f"dimension {n} is not divisible by {d2}")
    d1 = n // d2
    return np.einsum("ikjk->ij", rho.reshape(d1, d2, d1, d2))


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise InvalidDimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def block_distance(a: np.ndarray, b: np.ndarray, k: int | None = None) -> float:
    """Frobenius distance restricted to the lowest ``k`` Fock levels (default :func:`low_block`)."""
    if a.shape != b.shape:
        raise InvalidDimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    if k is None:
        k = low_block(a.shape[0])
    return float(np.linalg.norm((a - b)[:k, :k]))


@dataclass(frozen=True)
class ConvergenceReport:
    dim: int
    value: float
    doubled_dim: int
    doubled_value: float
    tol: float

    @property
    def delta(self) -> float:
        return abs(self.doubled_value - self.value)

    @property
    def converged(self) -> bool:
        return self.delta <= self.tol


def doubling_check(compute: Callable[[int], float], d: int, tol: float = 1e-8) -> ConvergenceReport:
    """Evaluate ``compute(d)`` and ``compute(2d)`` and report the change."""
    _check_dim(d)
    return ConvergenceReport(d, float(compute(d)), 2 * d, float(compute(2 * d)), tol)
