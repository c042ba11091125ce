"""Elementary continuous-variable gates and their truncated matrix forms.

A :class:`GateSpec` is symbolic (kind + strength); :func:`gate_matrix` turns it
into a ``d x d`` unitary. Gate kinds and the unitaries they denote:

=============  ==============================================
linear-x       ``exp(i s x)``
linear-p       ``exp(i s p)``
quadratic-x    ``exp(i s x^2)``
quadratic-p    ``exp(i s p^2)``
cubic-x        ``exp(i s x^3)``
cubic-p        ``exp(i s p^3)``
squeeze        ``exp(i r (x p + p x))``; ``r > 0`` contracts the x variance
fourier        ``exp(i pi/2 n)`` (quarter turn in phase space, no parameter)
displacement   ``exp(beta a^dag - beta^* a)``, complex ``beta``
=============  ==============================================
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from . import fock
from .errors import InvalidDimensionError

KINDS = (
    "linear-x",
    "linear-p",
    "quadratic-x",
    "quadratic-p",
    "cubic-x",
    "cubic-p",
    "squeeze",
    "fourier",
    "displacement",
)

_WORDS = {
    "linear-x": "x",
    "linear-p": "p",
    "quadratic-x": "xx",
    "quadratic-p": "pp",
    "cubic-x": "xxx",
    "cubic-p": "ppp",
}

# gate-kind census classes used for resource counting
ORDER_CLASS = {
    "linear-x": "linear",
    "linear-p": "linear",
    "displacement": "linear",
    "quadratic-x": "quadratic",
    "quadratic-p": "quadratic",
    "squeeze": "quadratic",
    "fourier": "quadratic",
    "cubic-x": "cubic",
    "cubic-p": "cubic",
}


@dataclass(frozen=True)
class GateSpec:
    kind: str
    strength: complex = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "fourier":
            if self.strength != 0:
                raise ValueError("the Fourier gate takes no parameter")
        elif not np.isfinite(self.strength):
            raise ValueError(f"gate strength must be finite, got {self.strength!r}")
        if self.kind != "displacement" and np.iscomplexobj(self.strength):
            if complex(self.strength).imag != 0:
                raise ValueError(f"{self.kind} needs a real strength")
            object.__setattr__(self, "strength", complex(self.strength).real)

    @property
    def is_cubic(self) -> bool:
        return self.kind in ("cubic-x", "cubic-p")

    def inverse(self) -> "GateSequence":
        if self.kind == "fourier":
            return GateSequence((self, self, self))
        return GateSequence((GateSpec(self.kind, -self.strength),))

    def render(self) -> str:
        if self.kind == "fourier":
            return "fourier"
        s = self.strength
        if self.kind == "displacement" and complex(s).imag != 0:
            s = complex(s)
            return f"{self.kind} {s.real:.17g}{s.imag:+.17g}j"
        return f"{self.kind} {float(np.real(s)):.17g}"


@dataclass(frozen=True)
class GateSequence:
    """Ordered gates; ``gates[0]`` acts on the state first."""

    gates: tuple[GateSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __iter__(self) -> Iterator[GateSpec]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __getitem__(self, i):
        return self.gates[i]

    def __add__(self, other: "GateSequence") -> "GateSequence":
        return GateSequence(self.gates + tuple(other))

    def repeat(self, k: int) -> "GateSequence":
        return GateSequence(self.gates * k)

    def inverse(self) -> "GateSequence":
        out: tuple[GateSpec, ...] = ()
        for g in reversed(self.gates):
            out += g.inverse().gates
        return GateSequence(out)

    def census(self) -> dict[str, int]:
        """Count gates by polynomial order of their generator."""
        counts = {"linear": 0, "quadratic": 0, "cubic": 0}
        for g in self.gates:
            counts[ORDER_CLASS[g.kind]] += 1
        return counts

    def render(self) -> str:
        """Canonical listing: one ``kind strength`` line per gate, in application order."""
        return "".join(g.render() + "\n" for g in self.gates)

    @classmethod
    def parse(cls, text: str) -> "GateSequence":
        gates = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            kind, *rest = line.split()
            if kind == "fourier":
                gates.append(GateSpec("fourier"))
            elif kind == "displacement":
                gates.append(GateSpec(kind, complex(rest[0])))
            else:
                gates.append(GateSpec(kind, float(rest[0])))
        return cls(tuple(gates))


@lru_cache(maxsize=64)
def _squeeze_propagator(d: int) -> fock.HermitianPropagator:
    return fock.HermitianPropagator(fock.polynomial({"xp": 1.0, "px": 1.0}, d))


def fourier_matrix(d: int) -> np.ndarray:
    n = np.arange(d)
    return np.diag(1j ** (n % 4)).astype(complex)


def gate_matrix(g: GateSpec, d: int) -> np.ndarray:
    """Unitary matrix of ``g`` on ``d`` Fock levels."""
    fock._check_dim(d)
    s = g.strength
    if g.kind in _WORDS:
        return fock.monomial_propagator(_WORDS[g.kind], d)(float(s))
    if g.kind == "squeeze":
        return _squeeze_propagator(d)(float(s))
    if g.kind == "fourier":
        return fourier_matrix(d)
    # displacement: beta a^dag - beta^* a = i (2 Im(beta) x - 2 Re(beta) p)
    beta = complex(s)
    if beta.imag == 0:
        return fock.monomial_propagator("p", d)(-2 * beta.real)
    h = fock.polynomial({"x": 2 * beta.imag, "p": -2 * beta.real}, d)
    return fock.HermitianPropagator(h)(1.0)


def sequence_matrix(seq: Iterable[GateSpec], d: int) -> np.ndarray:
    gates = tuple(seq)
    if not gates:
        raise ValueError("cannot realise an empty gate sequence")
    out = gate_matrix(gates[0], d)
    for g in gates[1:]:
        out = gate_matrix(g, d) @ out
    return out


def fourier_conjugate(g: GateSpec, d: int) -> np.ndarray:
    """Realise a p-type gate as ``F^dag exp(i s' x^k) F``; used to cross-check :func:`gate_matrix`.

    ``F^dag x F = -p``, so ``exp(i s p^k) = F^dag exp(i s (-1)^k x^k) F``.
    """
    order = {"linear-p": 1, "quadratic-p": 2, "cubic-p": 3}
    if g.kind not in order:
        raise ValueError(f"{g.kind} is not a p-type gate")
    k = order[g.kind]
    f = fourier_matrix(d)
    xg = gate_matrix(GateSpec(g.kind.replace("-p", "-x"), (-1) ** k * g.strength), d)
    return f.conj().T @ xg @ f


def conjugation_identity_check(t: float, s: float, d: int, k: int | None = None) -> float:
    """Residual of ``e^{itx^3} e^{isp^2} e^{-itx^3} = exp[is(p - 3t x^2/2)^2]`` on the low-Fock block.

    The identity is exact for the untruncated operators; what remains is a
    truncation artefact that shrinks as ``d`` grows.
    """
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    lhs = sequence_matrix(
        [GateSpec("cubic-x", -t), GateSpec("quadratic-p", s), GateSpec("cubic-x", t)], d
    )
    c = 1.5 * t
    h = fock.polynomial({"pp": 1.0, "pxx": -c, "xxp": -c, "xxxx": c * c}, d)
    rhs = fock.HermitianPropagator((h + h.conj().T) / 2)(s)
    return fock.block_distance(lhs, rhs, k)


def squeezed_variance(r: float) -> float:
    """x variance of squeezed vacuum under the ``squeeze`` convention."""
    return math.exp(-2 * r) / 4
