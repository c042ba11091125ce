"""Photon loss and imperfect on/off detection."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from . import fock
from .errors import TruncationError

KRAUS_COMPLETENESS_TOL = 1e-14


@dataclass(frozen=True)
class DetectorModel:
    """On/off detector with dark-count parameter ``nu`` and quantum efficiency ``eta_q``."""

    nu: float = 0.0
    eta_q: float = 1.0

    def __post_init__(self):
        if not (self.nu >= 0 and math.isfinite(self.nu)):
            raise ValueError(f"dark-count parameter must be finite and >= 0, got {self.nu!r}")
        if not 0 <= self.eta_q <= 1:
            raise ValueError(f"quantum efficiency must lie in [0, 1], got {self.eta_q!r}")

    @property
    def is_ideal(self) -> bool:
        return self.nu == 0 and self.eta_q == 1

    def off_diagonal(self, d: int) -> np.ndarray:
        """Diagonal of the no-click element, ``exp(-nu) (1 - eta_q)^m``."""
        m = np.arange(d)
        if self.eta_q == 1:
            base = (m == 0).astype(float)
        else:
            base = (1 - self.eta_q) ** m
        return math.exp(-self.nu) * base


@dataclass(frozen=True)
class LossModel:
    """Beamsplitter loss with reflectivity ``eta_bs`` placed after every cubic gate."""

    eta_bs: float = 0.0

    def __post_init__(self):
        if not 0 <= self.eta_bs < 1:
            raise ValueError(f"beamsplitter reflectivity must lie in [0, 1), got {self.eta_bs!r}")

    @property
    def transmissivity(self) -> float:
        return 1.0 - self.eta_bs

    @property
    def is_lossless(self) -> bool:
        return self.eta_bs == 0


def detector_povm(model: DetectorModel, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Pi_off, Pi_on)`` with ``Pi_on = I - Pi_off``."""
    off = np.diag(model.off_diagonal(d)).astype(complex)
    return off, np.eye(d, dtype=complex) - off


def _check_transmissivity(t: float) -> None:
    if not 0 < t <= 1:
        raise ValueError(f"transmissivity must lie in (0, 1], got {t!r}")


@lru_cache(maxsize=32)
def _loss_tables(t: float, d: int) -> tuple[np.ndarray, ...]:
    """Elementwise weights of each Kraus term, truncated once completeness is reached.

    Term ``k`` maps ``rho[m+k, n+k]`` to ``rho'[m, n]`` with weight
    ``sqrt(C(m+k, k) C(n+k, k)) (1-t)^k t^{(m+n)/2}``.
    """
    m = np.arange(d)
    tables = []
    completeness = np.zeros(d)
    for k in range(d):
        mm = m[: d - k]
        log_binom = gammaln(mm + k + 1) - gammaln(mm + 1) - gammaln(k + 1)
        half = 0.5 * log_binom + 0.5 * mm * math.log(t)
        if k:
            half = half + 0.5 * k * math.log1p(-t)
        w = np.exp(half[:, None] + half[None, :])
        w.setflags(write=False)
        tables.append(w)
        completeness[k:] += np.diag(w)
        if t == 1 or completeness.min() >= 1 - KRAUS_COMPLETENESS_TOL:
            break
    return tuple(tables)


def loss_channel(t: float, rho: np.ndarray) -> np.ndarray:
    """Pure-loss channel with transmissivity ``t`` applied to ``rho``.

    ``rho`` may carry leading batch axes (``(..., d, d)``).
    """
    _check_transmissivity(t)
    if t == 1:
        return rho.copy()
    d = rho.shape[-1]
    out = np.zeros_like(rho)
    for k, w in enumerate(_loss_tables(float(t), d)):
        out[..., : d - k, : d - k] += w * rho[..., k:, k:]
    return out


def loss_kraus(t: float, d: int) -> list[np.ndarray]:
    """Kraus operators ``sqrt((1-t)^k / k!) t^{n/2} a^k`` for the loss channel."""
    _check_transmissivity(t)
    a = fock.annihilation_op(d)
    damp = np.diag(t ** (np.arange(d) / 2)).astype(complex)
    ops = []
    a_k = np.eye(d, dtype=complex)
    for k in range(len(_loss_tables(float(t), d))):
        ops.append(math.sqrt((1 - t) ** k / math.factorial(k)) * damp @ a_k)
        a_k = a_k @ a
    return ops


def mean_photon_number(rho: np.ndarray) -> float:
    return float(np.real(np.sum(np.diag(rho) * np.arange(rho.shape[0]))))


def beamsplitter_loss_oracle(t: float, rho: np.ndarray, d_anc: int) -> np.ndarray:
    """Loss via an explicit beamsplitter with a vacuum ancilla, then tracing the ancilla out.

    Raises:
        TruncationError: if more than ``1e-10`` of the population would need
            ``d_anc`` or more photons in the ancilla.
    """
    _check_transmissivity(t)
    if d_anc < 8:
        raise ValueError(f"ancilla dimension must be >= 8, got {d_anc}")
    d = rho.shape[0]
    levels = np.arange(d)
    pops = np.clip(np.real(np.diag(rho)), 0, None)
    leaked = float(np.sum(pops * binom.sf(d_anc - 1, levels, 1 - t)))
    if leaked > 1e-10:
        raise TruncationError(f"ancilla with {d_anc} levels is too small", leaked)
    theta = math.acos(math.sqrt(t))
    a = fock.annihilation_op(d)
    b = fock.annihilation_op(d_anc)
    gen = theta * (np.kron(a, b.conj().T) - np.kron(a.conj().T, b))
    u = fock.unitary_from_generator(gen)
    vac = np.zeros((d_anc, d_anc), dtype=complex)
    vac[0, 0] = 1
    joint = u @ np.kron(rho, vac) @ u.conj().T
    return fock.partial_trace_second(joint, d_anc)
