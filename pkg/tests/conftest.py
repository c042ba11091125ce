import math
import sys

import numpy as np
import pytest


def alpha_of(nbar):
    return math.sqrt(nbar)


def random_density(d, rank=3, energy_levels=6, seed=0):
    """Random mixed state supported on the lowest ``energy_levels`` Fock levels."""
    rng = np.random.default_rng(seed)
    vecs = np.zeros((rank, d), dtype=complex)
    k = min(energy_levels, d)
    vecs[:, :k] = rng.normal(size=(rank, k)) + 1j * rng.normal(size=(rank, k))
    weights = rng.uniform(size=rank)
    rho = sum(w * np.outer(v, v.conj()) for w, v in zip(weights, vecs))
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
