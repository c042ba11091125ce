"""Gate-level decompositions of the order-one receiver unitary.

Two schemes approximate ``U(t) = exp[(-4ip + 2ip^3 + i x^2 p + i p x^2) t]``:

* ``splitting``: seven gates per step, first-order product formula, the mixed
  term ``x^2 p + p x^2`` obtained exactly from cubic conjugation of ``p^2``.
  Error per step is O(t^2).
* ``commutator``: six gates per step; the mixed term comes from a group
  commutator of ``p^2`` and ``x^3`` and the step realises ``U(t^2)`` with error
  O(t^3).

Both are concatenated ``K`` times to reach the full interaction time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import ContractViolation, InsufficientSignalError
from .gates import GateSequence, GateSpec, sequence_matrix
from .sasaki_hirota import exact_unitary_m1, optimal_time

SCHEMES = ("splitting", "commutator")


def splitting_sequence(t: float) -> GateSequence:
    """One splitting step approximating ``U(t)``, in application order."""
    t = float(t)
    return GateSequence(
        (
            GateSpec("cubic-x", 1 / 3),
            GateSpec("quadratic-p", t),
            GateSpec("cubic-x", -2 / 3),
            GateSpec("quadratic-p", -t),
            GateSpec("cubic-x", 1 / 3),
            GateSpec("cubic-p", 2 * t),
            GateSpec("linear-p", -4 * t),
        )
    )


def commutator_sequence(t: float) -> GateSequence:
    """One group-commutator step approximating ``U(t |t|)``, in application order.

    For ``t > 0`` this is ``U(t^2)``. A negative ``t`` flips the sign of the
    cubic strengths in the commutator core, which reverses the commutator and
    yields ``U(-t^2)``; the receiver needs this because its interaction time
    is negative.
    """
    t = float(t)
    a = abs(t)
    s = t * a
    return GateSequence(
        (
            GateSpec("cubic-x", -t),
            GateSpec("quadratic-p", -2 * a / 3),
            GateSpec("cubic-x", t),
            GateSpec("quadratic-p", 2 * a / 3),
            GateSpec("cubic-p", 2 * s),
            GateSpec("linear-p", -4 * s),
        )
    )


def step_sequence(scheme: str, t: float) -> GateSequence:
    if scheme == "splitting":
        return splitting_sequence(t)
    if scheme == "commutator":
        return commutator_sequence(t)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def step_target_time(scheme: str, t: float) -> float:
    """Interaction time realised by one step of strength ``t``."""
    return t if scheme == "splitting" else t * abs(t)


@dataclass(frozen=True)
class DecompositionPlan:
    scheme: str
    t_total: float
    iterations: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not isinstance(self.iterations, (int, np.integer)) or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations!r}")

    @property
    def step_strength(self) -> float:
        """Elementary strength per step; for ``commutator`` ``K * tau^2 = |t_total|``."""
        if self.scheme == "splitting":
            return self.t_total / self.iterations
        return math.copysign(math.sqrt(abs(self.t_total) / self.iterations), self.t_total)

    def step(self) -> GateSequence:
        return step_sequence(self.scheme, self.step_strength)

    def sequence(self) -> GateSequence:
        return self.step().repeat(self.iterations)

    def census(self) -> "ResourceCount":
        c = self.sequence().census()
        return ResourceCount(c["linear"], c["quadratic"], c["cubic"])


def iterated_unitary(plan: DecompositionPlan, d: int) -> np.ndarray:
    step = sequence_matrix(plan.step(), d)
    return np.linalg.matrix_power(step, plan.iterations)


def receiver_plan(alpha: float, iterations: int, scheme: str = "splitting") -> DecompositionPlan:
    return DecompositionPlan(scheme, optimal_time(alpha), iterations)


def approximation_error(plan: DecompositionPlan, d: int, k: int | None = None) -> float:
    """Low-Fock-block distance between the iterated circuit and the exact order-one unitary."""
    return fock.block_distance(iterated_unitary(plan, d), exact_unitary_m1(plan.t_total, d), k)


def step_error(scheme: str, t: float, d: int) -> float:
    u = sequence_matrix(step_sequence(scheme, t), d)
    return fock.block_distance(u, exact_unitary_m1(step_target_time(scheme, t), d))


def scaling_order(err_full: float, err_half: float) -> float:
    """``log2`` of the error ratio between strengths ``t`` and ``t/2``."""
    if err_full < 1e-12 or err_half < 1e-12:
        raise InsufficientSignalError(
            f"errors {err_full:.3e}, {err_half:.3e} are too small to estimate a scaling order"
        )
    return math.log2(err_full / err_half)


def error_scaling_exponent(scheme: str, t_ref: float = 0.05, d: int = 60) -> float:
    """Empirical order of the single-step error, from halving ``t_ref``.

    A splitting step should give about 2, a commutator step about 3.
    """
    full = step_error(scheme, t_ref, d)
    if full >= 0.1:
        raise ContractViolation(f"step error {full:.3g} at t_ref={t_ref} is outside the asymptotic regime")
    half = step_error(scheme, t_ref / 2, d)
    return scaling_order(full, half)


@dataclass(frozen=True)
class ResourceCount:
    linear: int
    quadratic: int
    cubic: int

    def __post_init__(self):
        if min(self.linear, self.quadratic, self.cubic) < 0:
            raise ValueError("gate counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.linear + self.quadratic + self.cubic

    def scaled(self, k: int) -> "ResourceCount":
        return ResourceCount(self.linear * k, self.quadratic * k, self.cubic * k)


def _ceil(x: float) -> int:
    # 1/0.01**2 evaluates to 10000.000000000002; do not let roundoff add a step
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def per_step_resources(scheme: str) -> ResourceCount:
    c = step_sequence(scheme, 0.0).census()
    return ResourceCount(c["linear"], c["quadratic"], c["cubic"])


def resource_table(scheme: str, t_elem: float) -> ResourceCount:
    """Gates needed to reach an interaction strength of order one.

    With elementary strength ``t_elem``, splitting needs ``ceil(1/t)`` steps and
    the commutator scheme ``ceil(1/t^2)`` steps.
    """
    if not t_elem > 0:
        raise ValueError(f"t_elem must be positive, got {t_elem!r}")
    steps = _ceil(1 / t_elem) if scheme == "splitting" else _ceil(1 / t_elem**2)
    return per_step_resources(scheme).scaled(steps)


@dataclass(frozen=True)
class GateCountRow:
    nbar: float
    splitting_steps: int
    commutator_steps: int
    splitting_count: int
    commutator_count: int


def gate_count_comparison(alphas, error_budget: float) -> list[GateCountRow]:
    """Model-based total gate counts for a receiver at each amplitude.

    The target strength is ``T = |optimal_time(alpha)|``. Summing per-step
    errors, splitting needs ``K >= T^2 / budget`` steps (7 gates each) and the
    commutator scheme ``K >= T^3 / budget^2`` steps (6 gates each).
    """
    if not 0 < error_budget < 0.5:
        raise ValueError(f"error budget must lie in (0, 0.5), got {error_budget!r}")
    split_gates = len(splitting_sequence(0.0))
    comm_gates = len(commutator_sequence(0.0))
    rows = []
    for alpha in alphas:
        big_t = abs(optimal_time(alpha))
        k_split = max(1, _ceil(big_t**2 / error_budget))
        k_comm = max(1, _ceil(big_t**3 / error_budget**2))
        rows.append(
            GateCountRow(
                nbar=float(alpha) ** 2,
                splitting_steps=k_split,
                commutator_steps=k_comm,
                splitting_count=split_gates * k_split,
                commutator_count=comm_gates * k_comm,
            )
        )
    return rows
