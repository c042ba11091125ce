import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.stats import poisson

from cvrx import fock
from cvrx.errors import ContractViolation, InvalidDimensionError, TruncationError

from conftest import random_density


class TestLadder:
    def test_small_entries(self):
        assert fock.annihilation_op(2)[0, 1] == 1
        assert fock.annihilation_op(4)[2, 3] == pytest.approx(math.sqrt(3), abs=1e-15)

    @pytest.mark.parametrize("d", [2, 5, 40])
    def test_vacuum_annihilated(self, d):
        assert np.all(fock.annihilation_op(d) @ fock.fock_state(0, d) == 0)

    @pytest.mark.parametrize("d", [0, 1, -3])
    def test_bad_dimension(self, d):
        with pytest.raises(InvalidDimensionError):
            fock.annihilation_op(d)

    def test_returned_matrix_is_a_copy(self):
        a = fock.annihilation_op(5)
        a[0, 1] = 99
        assert fock.annihilation_op(5)[0, 1] == 1

    def test_number_operator(self):
        assert np.allclose(np.diag(fock.number_op(6)), np.arange(6))


class TestQuadratures:
    def test_matrix_element(self):
        x, _ = fock.quadrature_ops(2)
        assert x[0, 1] == pytest.approx(0.5)

    def test_hermitian(self):
        x, p = fock.quadrature_ops(30)
        assert fock.is_hermitian(x) and fock.is_hermitian(p)

    @pytest.mark.parametrize("d", [5, 20, 40])
    def test_commutator_interior(self, d):
        x, p = fock.quadrature_ops(d)
        c = x @ p - p @ x
        k = d - 2
        assert np.max(np.abs(c[:k, :k] - 0.5j * np.eye(k))) <= 1e-12

    def test_vacuum_variances(self):
        x, p = fock.quadrature_ops(10)
        assert (p @ p)[0, 0].real == pytest.approx(0.25, abs=1e-15)
        assert (x @ x)[0, 0].real == pytest.approx(0.25, abs=1e-15)

    def test_monomial_is_exact_compression(self):
        # x^3 from the exact large-dimension product, cropped; compare with an explicit oracle at d+10
        d = 12
        x_big, _ = fock.quadrature_ops(d + 10)
        oracle = np.linalg.matrix_power(x_big, 3)[:d, :d]
        assert np.allclose(fock.monomial("xxx", d), oracle, atol=1e-13)

    def test_polynomial_bad_word(self):
        with pytest.raises(ValueError):
            fock.polynomial({"xq": 1.0}, 5)


class TestCoherentState:
    def test_vacuum(self):
        psi = fock.coherent_state(0, 10)
        assert psi[0] == 1 and np.all(psi[1:] == 0)

    @pytest.mark.parametrize("nbar", [0.01, 0.1, 0.3, 0.5])
    def test_overlap(self, nbar):
        a = math.sqrt(nbar)
        ov = abs(np.vdot(fock.coherent_state(a, 40), fock.coherent_state(-a, 40))) ** 2
        assert ov == pytest.approx(math.exp(-4 * nbar), abs=1e-10)

    def test_tail_mass_small(self):
        assert fock.coherent_tail_mass(0.3, 40) < 1e-30

    def test_tail_mass_matches_poisson(self):
        # independent oracle: Poisson survival function
        assert fock.coherent_tail_mass(2.0, 10) == pytest.approx(poisson.sf(9, 4.0), rel=1e-12)

    def test_overflow_raises_with_tail(self):
        with pytest.raises(TruncationError) as exc:
            fock.coherent_state(4.0, 10)
        assert exc.value.tail_mass > 0.5

    @given(st.floats(0, 1.5), st.floats(-math.pi, math.pi))
    @settings(max_examples=40, deadline=None)
    def test_normalised_and_eigenvector(self, r, phi):
        a = r * complex(math.cos(phi), math.sin(phi))
        d = 40
        psi = fock.coherent_state(a, d)
        assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-12)
        lowered = fock.annihilation_op(d) @ psi
        assert np.allclose(lowered[: d - 10], a * psi[: d - 10], atol=1e-10)

    def test_matches_displacement_generator(self):
        d, a = 40, 0.4
        g = a * (fock.creation_op(d) - fock.annihilation_op(d))
        psi = fock.unitary_from_generator(g) @ fock.fock_state(0, d)
        assert abs(np.vdot(psi, fock.coherent_state(a, d))) ** 2 == pytest.approx(1, abs=1e-12)


class TestExponential:
    def test_zero_generator(self):
        assert np.array_equal(fock.unitary_from_generator(np.zeros((4, 4))), np.eye(4))

    def test_diagonal(self):
        d, theta = 8, 0.37
        u = fock.unitary_from_generator(1j * theta * fock.number_op(d))
        assert np.allclose(np.diag(u), np.exp(1j * theta * np.arange(d)), atol=1e-14)

    def test_rejects_hermitian(self):
        with pytest.raises(ContractViolation):
            fock.unitary_from_generator(fock.number_op(5).astype(complex))

    def test_against_scipy_expm(self, rng):
        m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        g = m - m.conj().T
        assert np.allclose(fock.unitary_from_generator(g, 0.3), expm(0.3 * g), atol=1e-12)

    @given(st.integers(2, 30), st.floats(-3, 3), st.integers(0, 2**31))
    @settings(max_examples=30, deadline=None)
    def test_unitary(self, d, t, seed):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        u = fock.unitary_from_generator(m - m.conj().T, t)
        assert fock.unitarity_defect(u) <= 1e-10

    def test_propagator_reuses_spectrum(self):
        h = fock.monomial("xxx", 20)
        prop = fock.HermitianPropagator(h)
        assert np.allclose(prop(0.2) @ prop(0.3), prop(0.5), atol=1e-12)


class TestTensorAndDistances:
    def test_trace_factorises(self, rng):
        a = rng.normal(size=(3, 3))
        b = rng.normal(size=(4, 4))
        assert np.trace(fock.tensor_product(a, b)) == pytest.approx(np.trace(a) * np.trace(b))

    def test_partial_trace_product(self):
        rho = random_density(5, seed=1)
        sigma = 2.0 * random_density(4, energy_levels=4, seed=2)
        out = fock.partial_trace_second(fock.tensor_product(rho, sigma), 4)
        assert np.allclose(out, rho * 2.0, atol=1e-14)

    def test_partial_trace_bad_dim(self):
        with pytest.raises(InvalidDimensionError):
            fock.partial_trace_second(np.eye(6), 4)

    def test_frobenius(self, rng):
        d = 7
        assert fock.frobenius_distance(np.eye(d), np.eye(d)) == 0
        assert fock.frobenius_distance(np.eye(d), 2 * np.eye(d)) == pytest.approx(math.sqrt(d))
        a, b = rng.normal(size=(d, d)), rng.normal(size=(d, d))
        m = rng.normal(size=(d, d))
        u = fock.unitary_from_generator(m - m.T)
        v = fock.unitary_from_generator(1j * (m + m.T))
        assert fock.frobenius_distance(u @ a @ v, u @ b @ v) == pytest.approx(fock.frobenius_distance(a, b))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidDimensionError):
            fock.frobenius_distance(np.eye(2), np.eye(3))

    def test_density_validation(self):
        fock.validate_density_matrix(random_density(6))
        with pytest.raises(ContractViolation):
            fock.validate_density_matrix(np.diag([1.5, -0.5]))


class TestConvergence:
    def test_default_dim_env(self, monkeypatch):
        monkeypatch.delenv("CVRX_DEFAULT_DIM", raising=False)
        assert fock.default_dim() == 40
        monkeypatch.setenv("CVRX_DEFAULT_DIM", "64")
        assert fock.default_dim() == 64
        monkeypatch.setenv("CVRX_DEFAULT_DIM", "abc")
        with pytest.raises(InvalidDimensionError):
            fock.default_dim()

    def test_doubling_check(self):
        rep = fock.doubling_check(lambda d: 1.0 / d, 10, tol=0.1)
        assert rep.doubled_dim == 20 and rep.delta == pytest.approx(0.05) and rep.converged
        assert not fock.doubling_check(lambda d: 1.0 / d, 10, tol=0.01).converged
