"""Receivers for the binary alphabet ``{|alpha>, |-alpha>}`` with equal priors.

Closed-form baselines (Helstrom, homodyne, Kennedy), displacement-based
receivers optimised numerically, and the Sasaki-Hirota receivers: the exact
unitary of any order and its gate decomposition, with or without loss and
detector noise.

All Fock-space receivers first displace by ``-alpha`` so the hypotheses arrive
as ``|0>`` ("+" sent) and ``|-2 alpha>`` ("-" sent); "no click" decides "+".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fock
from .decomposition import iterated_unitary, receiver_plan
from .errors import NumericError
from .gates import GateSpec, gate_matrix
from .noise import DetectorModel, LossModel, loss_channel
from .optimize import OptimizeReport, minimize_multi, minimize_scalar
from .sasaki_hirota import generator, optimal_time

IDEAL_DETECTOR = DetectorModel()
#: default search box for squeezing parameters
SQUEEZE_BOUND = 1.5
MITIGATION_MODES = ("position", "global", "gate")
CUBIC_SLOTS_PER_STEP = 4


@dataclass(frozen=True)
class ErrorRateResult:
    """Conditional error probabilities and their equal-prior average.

    ``p_wrong_given_plus`` is the probability of deciding "-" when ``|alpha>``
    was sent; ``p_wrong_given_minus`` the converse.
    """

    p_wrong_given_plus: float
    p_wrong_given_minus: float
    p_err: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_err", 0.5 * (self.p_wrong_given_plus + self.p_wrong_given_minus))

    @classmethod
    def symmetric(cls, p: float) -> "ErrorRateResult":
        return cls(p, p)


def helstrom(alpha: float) -> float:
    """Minimum error probability over all measurements."""
    return 0.5 * (1 - math.sqrt(-math.expm1(-4 * abs(alpha) ** 2)))


def homodyne(alpha: float) -> float:
    """x-quadrature homodyne with threshold 0.

    Uses ``math.erfc``, which is accurate to a few ulps (far inside 1e-7).
    """
    return 0.5 * math.erfc(math.sqrt(2) * abs(alpha))


def kennedy(alpha: float) -> float:
    return 0.5 * math.exp(-4 * abs(alpha) ** 2)


def kennedy_result(alpha: float) -> ErrorRateResult:
    return ErrorRateResult(0.0, math.exp(-4 * abs(alpha) ** 2))


def onoff_result(p_off_plus: float, p_off_minus: float) -> ErrorRateResult:
    """Error rates for a no-click decision assigned to the likelier hypothesis."""
    if p_off_plus >= p_off_minus:
        return ErrorRateResult(1 - p_off_plus, p_off_minus)
    return ErrorRateResult(p_off_plus, 1 - p_off_minus)


def _dim(d):
    return fock.default_dim() if d is None else d


def _p_off(psi: np.ndarray, off_diag: np.ndarray) -> float:
    return float(np.sum(off_diag * np.abs(psi) ** 2))


def error_rate_for_unitary(
    u: np.ndarray, alpha: float, detector: DetectorModel = IDEAL_DETECTOR
) -> ErrorRateResult:
    """Error rate of a receiver that applies ``u`` after the ``-alpha`` displacement."""
    d = u.shape[0]
    off = detector.off_diagonal(d)
    plus = u @ fock.fock_state(0, d)
    minus = u @ fock.coherent_state(-2 * abs(alpha), d)
    return ErrorRateResult(1 - _p_off(plus, off), _p_off(minus, off))


def sh_exact(alpha: float, m: int = 1, d: int | None = None) -> ErrorRateResult:
    """Sasaki-Hirota receiver of order ``m`` at the optimal interaction time."""
    d = _dim(d)
    u = fock.unitary_from_generator(generator(alpha, m, d), optimal_time(alpha))
    return error_rate_for_unitary(u, alpha)


def decomposed(alpha: float, iterations: int = 10, d: int | None = None) -> ErrorRateResult:
    """Ideal gate-decomposed order-one receiver with ``iterations`` splitting steps."""
    d = _dim(d)
    u = iterated_unitary(receiver_plan(alpha, iterations), d)
    return error_rate_for_unitary(u, alpha)


# --- displacement-based receivers -------------------------------------------


@dataclass(frozen=True)
class OptimizedReceiver:
    p: float
    beta: float
    r: float | None
    result: ErrorRateResult
    report: OptimizeReport | None = None


def _displacement_closed_form(alpha: float, beta: float) -> tuple[float, float]:
    """No-click probabilities after displacing ``|+-alpha>`` by real ``beta``."""
    return math.exp(-((alpha + beta) ** 2)), math.exp(-((beta - alpha) ** 2))


def _displacement_error(alpha: float, beta: float) -> float:
    a, b = _displacement_closed_form(alpha, beta)
    return 0.5 * (1 - abs(a - b))


def _onoff_fock(alpha: float, beta: float, r: float, d: int) -> tuple[float, float]:
    """No-click probabilities for displacement by ``beta`` then squeezing ``r``, in Fock space."""
    disp = gate_matrix(GateSpec("displacement", beta), d)
    row = gate_matrix(GateSpec("squeeze", r), d)[0] if r else None
    out = []
    for sign in (1, -1):
        psi = disp @ fock.coherent_state(sign * alpha, d)
        amp = psi[0] if row is None else row @ psi
        out.append(abs(amp) ** 2)
    return out[0], out[1]


def optimized_displacement(alpha: float, d: int | None = None) -> OptimizedReceiver:
    """Displacement receiver with the displacement chosen to minimise the error.

    The search runs over ``beta`` in ``[-(3 alpha + 1), 0]``; the error is even
    in ``beta`` so this loses nothing, and ``beta = -alpha`` is Kennedy. The
    closed-form optimum is re-evaluated in Fock space as a cross-check.
    """
    alpha = abs(float(alpha))
    if alpha == 0:
        raise ValueError("alpha must be positive")
    d = _dim(d)
    lo = -(3 * alpha + 1)
    grid = np.linspace(lo, 0.0, 401)
    vals = [_displacement_error(alpha, b) for b in grid]
    i = int(np.argmin(vals))
    rep = minimize_scalar(
        lambda b: _displacement_error(alpha, b), grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)], tol=1e-12
    )
    beta = float(rep.best_point[0])
    p = rep.best_value
    fock_p = 0.5 * (1 - abs(np.subtract(*_onoff_fock(alpha, beta, 0.0, d))))
    if abs(fock_p - p) > 1e-8:
        raise NumericError(f"closed form {p} and Fock simulation {fock_p} disagree")
    result = onoff_result(*_displacement_closed_form(alpha, beta))
    return OptimizedReceiver(p=p, beta=beta, r=None, result=result, report=rep)


def optimized_displacement_squeezing(
    alpha: float,
    d: int | None = None,
    restarts: int = 4,
    seed: int = 0,
    beta_bound: float | None = None,
    r_bound: float = SQUEEZE_BOUND,
) -> OptimizedReceiver:
    """Displacement followed by squeezing, both optimised, before on/off detection."""
    alpha = abs(float(alpha))
    d = _dim(d)
    start = optimized_displacement(alpha, d)
    if beta_bound is None:
        beta_bound = 3 * alpha + 1

    def objective(v):
        a, b = _onoff_fock(alpha, v[0], v[1], d)
        return 0.5 * (1 - abs(a - b))

    rep = minimize_multi(
        objective,
        [start.beta, 0.0],
        bounds=[(-beta_bound, beta_bound), (-r_bound, r_bound)],
        tol=1e-10,
        restarts=restarts,
        seed=seed,
        max_evals=3000,
    )
    beta, r = (float(v) for v in rep.best_point)
    return OptimizedReceiver(
        p=rep.best_value, beta=beta, r=r, result=onoff_result(*_onoff_fock(alpha, beta, r, d)), report=rep
    )


# --- noisy decomposed receiver ---------------------------------------------


@dataclass(frozen=True)
class ReceiverConfig:
    """Configuration of the gate-decomposed receiver under loss and detector noise.

    ``squeeze`` holds mitigation parameters: one per cubic-gate position within
    a step (``mode="position"``, 4 values), a single shared value
    (``"global"``), or one per cubic gate overall (``"gate"``, ``4 K`` values).
    ``None`` disables mitigation. With ``sandwich`` the squeezer is undone after
    the lossy cubic gate.
    """

    alpha: float
    iterations: int = 10
    detector: DetectorModel = IDEAL_DETECTOR
    loss: LossModel = LossModel()
    squeeze: tuple[float, ...] | None = None
    mode: str = "position"
    sandwich: bool = False
    d: int | None = None

    def __post_init__(self):
        if self.mode not in MITIGATION_MODES:
            raise ValueError(f"unknown mitigation mode {self.mode!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.squeeze is not None:
            object.__setattr__(self, "squeeze", tuple(float(r) for r in self.squeeze))
            if len(self.squeeze) != self.n_squeeze_params:
                raise ValueError(
                    f"mode {self.mode!r} needs {self.n_squeeze_params} squeezing parameters, "
                    f"got {len(self.squeeze)}"
                )

    @property
    def n_squeeze_params(self) -> int:
        return {"position": CUBIC_SLOTS_PER_STEP, "global": 1, "gate": CUBIC_SLOTS_PER_STEP * self.iterations}[
            self.mode
        ]

    def squeeze_for(self, step: int, slot: int) -> float:
        if self.squeeze is None:
            return 0.0
        if self.mode == "global":
            return self.squeeze[0]
        if self.mode == "position":
            return self.squeeze[slot]
        return self.squeeze[step * CUBIC_SLOTS_PER_STEP + slot]

    @classmethod
    def reference_noise(cls, alpha: float, **kw) -> "ReceiverConfig":
        """Loss 1e-2 per cubic gate, detector efficiency 0.8, dark counts 1e-3."""
        return cls(alpha, detector=DetectorModel(nu=1e-3, eta_q=0.8), loss=LossModel(eta_bs=1e-2), **kw)


def _noisy_program(cfg: ReceiverConfig, d: int) -> list[np.ndarray | None]:
    """Flatten the circuit into unitaries and loss markers (``None``), merging adjacent unitaries."""
    step = receiver_plan(cfg.alpha, cfg.iterations).step()
    lossy = not cfg.loss.is_lossless
    ops: list[np.ndarray | None] = []
    pending = np.eye(d, dtype=complex)
    for k in range(cfg.iterations):
        slot = 0
        for g in step:
            if g.is_cubic:
                r = cfg.squeeze_for(k, slot)
                sq = gate_matrix(GateSpec("squeeze", r), d) if r else None
                if sq is not None:
                    pending = sq @ pending
                pending = gate_matrix(g, d) @ pending
                if lossy:
                    ops.append(pending)
                    ops.append(None)
                    pending = np.eye(d, dtype=complex)
                if sq is not None and cfg.sandwich:
                    pending = sq.conj().T @ pending
                slot += 1
            else:
                pending = gate_matrix(g, d) @ pending
    ops.append(pending)
    return ops


def decomposed_noisy(cfg: ReceiverConfig) -> ErrorRateResult:
    """Density-matrix simulation of the decomposed receiver with loss after every cubic gate."""
    d = _dim(cfg.d)
    t = cfg.loss.transmissivity
    rho = np.stack(
        [
            fock.density_matrix(fock.fock_state(0, d)),
            fock.density_matrix(fock.coherent_state(-2 * abs(cfg.alpha), d)),
        ]
    )
    for op in _noisy_program(cfg, d):
        if op is None:
            rho = loss_channel(t, rho)
        else:
            rho = op @ rho @ op.conj().T
    off = cfg.detector.off_diagonal(d)
    p_off = np.real(np.einsum("kii,i->k", rho, off))
    return ErrorRateResult(float(1 - p_off[0]), float(p_off[1]))


@dataclass(frozen=True)
class MitigationResult:
    params: tuple[float, ...]
    result: ErrorRateResult
    unmitigated: ErrorRateResult
    report: OptimizeReport

    @property
    def converged(self) -> bool:
        return self.report.converged


def optimize_squeezing_mitigation(
    cfg: ReceiverConfig,
    restarts: int = 2,
    seed: int = 0,
    max_evals: int = 400,
    bound: float = SQUEEZE_BOUND,
    tol: float = 1e-6,
) -> MitigationResult:
    """Search squeezing parameters minimising the noisy error, starting from no squeezing."""
    n = cfg.n_squeeze_params
    base = replace(cfg, squeeze=None)
    unmitigated = decomposed_noisy(base)

    def objective(v):
        return decomposed_noisy(replace(cfg, squeeze=tuple(v))).p_err

    rep = minimize_multi(
        objective,
        np.zeros(n),
        bounds=[(-bound, bound)] * n,
        tol=tol,
        restarts=restarts,
        seed=seed,
        max_evals=max_evals,
    )
    params = tuple(float(v) for v in rep.best_point)
    result = decomposed_noisy(replace(cfg, squeeze=params))
    return MitigationResult(params=params, result=result, unmitigated=unmitigated, report=rep)
