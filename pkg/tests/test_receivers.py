import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from cvrx.decomposition import iterated_unitary, receiver_plan
from cvrx.noise import DetectorModel, LossModel
from cvrx.receivers import (
    ErrorRateResult,
    ReceiverConfig,
    decomposed,
    decomposed_noisy,
    error_rate_for_unitary,
    helstrom,
    homodyne,
    kennedy,
    kennedy_result,
    onoff_result,
    optimize_squeezing_mitigation,
    optimized_displacement,
    optimized_displacement_squeezing,
    sh_exact,
)

from conftest import alpha_of

NBAR_GRID = [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5]


class TestClosedForms:
    def test_zero_amplitude(self):
        assert helstrom(0) == homodyne(0) == kennedy(0) == 0.5

    def test_values(self):
        assert helstrom(0.5) == pytest.approx(0.1024700, abs=1e-7)
        assert kennedy(0.5) == pytest.approx(0.5 * math.exp(-1), abs=1e-15)
        # oracle: threshold-at-zero homodyne error is the normal tail 1 - Phi(2 alpha)
        assert homodyne(0.5) == pytest.approx(norm.sf(1.0), abs=1e-12)
        assert homodyne(0.5) == pytest.approx(0.158655, abs=1e-5)

    @given(st.floats(0, 3))
    @settings(max_examples=60, deadline=None)
    def test_homodyne_against_normal_tail(self, a):
        assert homodyne(a) == pytest.approx(norm.sf(2 * a), abs=1e-7)

    def test_helstrom_decreasing(self):
        vals = [helstrom(a) for a in np.linspace(0, 2, 400)]
        assert np.all(np.diff(vals) < 0)

    @given(st.floats(0, 3))
    @settings(max_examples=60, deadline=None)
    def test_standard_quantum_limit_gap(self, a):
        assert homodyne(a) >= helstrom(a)
        assert kennedy(a) >= helstrom(a)

    def test_homodyne_kennedy_crossover(self):
        assert homodyne(alpha_of(0.3)) < kennedy(alpha_of(0.3))
        assert homodyne(alpha_of(0.5)) > kennedy(alpha_of(0.5))

    def test_kennedy_components(self):
        r = kennedy_result(0.4)
        assert r.p_wrong_given_plus == 0 and r.p_err == pytest.approx(kennedy(0.4))


class TestErrorRateResult:
    def test_average(self):
        r = ErrorRateResult(0.1, 0.3)
        assert r.p_err == pytest.approx(0.2, abs=1e-15)

    def test_onoff_decision_picks_likelier(self):
        r = onoff_result(0.9, 0.2)
        assert (r.p_wrong_given_plus, r.p_wrong_given_minus) == pytest.approx((0.1, 0.2), abs=1e-15)
        r = onoff_result(0.2, 0.9)
        assert (r.p_wrong_given_plus, r.p_wrong_given_minus) == pytest.approx((0.2, 0.1), abs=1e-15)


class TestEightReduction:
    @pytest.mark.parametrize("nbar", NBAR_GRID)
    def test_identity_unitary_is_kennedy(self, nbar):
        a = alpha_of(nbar)
        assert error_rate_for_unitary(np.eye(40), a).p_err == pytest.approx(kennedy(a), abs=1e-10)


class TestDisplacementReceivers:
    @pytest.mark.parametrize("nbar", NBAR_GRID)
    def test_between_helstrom_and_kennedy(self, nbar):
        a = alpha_of(nbar)
        od = optimized_displacement(a)
        assert helstrom(a) <= od.p <= kennedy(a) + 1e-12
        assert od.result.p_err == pytest.approx(od.p, abs=1e-14)

    def test_large_amplitude_limit(self):
        od = optimized_displacement(1.5)
        assert od.beta == pytest.approx(-1.5, abs=0.02)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            optimized_displacement(0)

    def test_fock_agreement(self):
        # the Fock cross-check runs inside; a too-small dimension must trip it or the truncation guard
        optimized_displacement(alpha_of(0.1), d=40)

    @pytest.mark.parametrize("nbar", [0.05, 0.2])
    def test_squeezing_helps(self, nbar):
        a = alpha_of(nbar)
        ods = optimized_displacement_squeezing(a)
        assert ods.p <= optimized_displacement(a).p + 1e-12
        assert ods.p >= helstrom(a) - 1e-9
        assert ods.report.converged

    def test_squeezing_vs_first_order(self):
        # displacement+squeezing loses at low photon number and wins at higher
        lo, hi = alpha_of(0.05), alpha_of(0.2)
        assert optimized_displacement_squeezing(lo).p > sh_exact(lo, 1).p_err
        assert optimized_displacement_squeezing(hi).p < sh_exact(hi, 1).p_err

    def test_squeezing_deterministic(self):
        a = alpha_of(0.1)
        x, y = optimized_displacement_squeezing(a, seed=3), optimized_displacement_squeezing(a, seed=3)
        assert (x.p, x.beta, x.r, x.report.evaluations) == (y.p, y.beta, y.r, y.report.evaluations)


class TestSasakiHirotaReceivers:
    def test_second_order_beats_squeezing(self):
        for nbar in (0.05, 0.1, 0.2):
            a = alpha_of(nbar)
            assert sh_exact(a, 2).p_err < optimized_displacement_squeezing(a).p

    @pytest.mark.parametrize("nbar", [0.05, 0.1, 0.2])
    def test_high_orders_coincide(self, nbar):
        a = alpha_of(nbar)
        errs = [sh_exact(a, m).p_err for m in (3, 4, 5)]
        assert max(errs) / min(errs) - 1 <= 0.02

    def test_first_order_low_photon(self):
        # the exact first-order receiver is within 0.01% of the bound at 0.001 photons
        a = alpha_of(0.001)
        assert sh_exact(a, 1).p_err / helstrom(a) - 1 <= 1e-3

    def test_first_order_gap_at_five_percent_photons(self):
        # measured: 2.13% above the bound at nbar = 0.05, a property of the M=1 unitary itself
        a = alpha_of(0.05)
        gap = sh_exact(a, 1).p_err / helstrom(a) - 1
        assert gap == pytest.approx(0.0213, abs=5e-4)

    def test_components_in_range(self):
        r = sh_exact(alpha_of(0.1), 2)
        assert 0 <= r.p_wrong_given_plus <= 1 and 0 <= r.p_wrong_given_minus <= 1


class TestDecomposed:
    def test_more_iterations_help(self):
        a = alpha_of(0.05)
        assert decomposed(a, 20).p_err <= decomposed(a, 5).p_err + 1e-9

    @pytest.mark.parametrize("nbar", [0.01, 0.05, 0.1, 0.2, 0.3])
    def test_advantage_over_classical(self, nbar):
        a = alpha_of(nbar)
        p = decomposed(a, 10).p_err
        assert p < homodyne(a) and p < kennedy(a)

    def test_tracks_exact(self):
        a = alpha_of(0.05)
        assert decomposed(a, 10).p_err == pytest.approx(sh_exact(a, 1).p_err, rel=0.05)

    @given(st.floats(0.002, 0.5))
    @settings(max_examples=15, deadline=None)
    def test_above_helstrom(self, nbar):
        a = alpha_of(nbar)
        for r in (decomposed(a, 10), sh_exact(a, 1), sh_exact(a, 3)):
            assert helstrom(a) - 1e-9 <= r.p_err <= 0.5


class TestOrdering:
    def test_chain_at_five_percent(self):
        a = alpha_of(0.05)
        h = helstrom(a)
        m2, m1 = sh_exact(a, 2).p_err, sh_exact(a, 1).p_err
        dec = decomposed(a, 10).p_err
        ods = optimized_displacement_squeezing(a).p
        od = optimized_displacement(a).p
        k = kennedy(a)
        assert h <= m2 + 1e-9 and m2 <= m1 + 1e-9
        assert abs(dec / m1 - 1) <= 0.05
        assert max(m1, dec) < ods + 1e-9 and ods < od + 1e-9 and od <= k + 1e-9
        assert homodyne(a) < k


class TestNoisy:
    def test_noiseless_limit(self):
        a = alpha_of(0.1)
        assert decomposed_noisy(ReceiverConfig(a, d=40)).p_err == pytest.approx(decomposed(a, 10, 40).p_err, abs=1e-9)

    def test_noiseless_limit_with_lossless_model(self):
        a = alpha_of(0.2)
        cfg = ReceiverConfig(a, iterations=5, detector=DetectorModel(0, 1), loss=LossModel(0))
        assert decomposed_noisy(cfg).p_err == pytest.approx(decomposed(a, 5).p_err, abs=1e-9)

    def test_noise_hurts(self):
        a = alpha_of(0.1)
        assert decomposed_noisy(ReceiverConfig.reference_noise(a)).p_err > decomposed(a, 10).p_err

    def test_vanishing_signal(self):
        p = decomposed_noisy(ReceiverConfig.reference_noise(1e-3)).p_err
        assert 0.45 <= p <= 0.5

    def test_detector_only_matches_pure_state(self):
        # with loss off, the density route and a direct POVM average must agree
        a = alpha_of(0.1)
        det = DetectorModel(nu=1e-3, eta_q=0.8)
        u = iterated_unitary(receiver_plan(a, 10), 40)
        direct = error_rate_for_unitary(u, a, det)
        assert decomposed_noisy(ReceiverConfig(a, detector=det)).p_err == pytest.approx(direct.p_err, abs=1e-12)

    def test_zero_squeezing_is_unmitigated(self):
        a = alpha_of(0.1)
        base = decomposed_noisy(ReceiverConfig.reference_noise(a)).p_err
        zero = decomposed_noisy(ReceiverConfig.reference_noise(a, squeeze=(0, 0, 0, 0))).p_err
        assert zero == pytest.approx(base, abs=1e-12)

    def test_squeezing_parameters_matter(self):
        a = alpha_of(0.1)
        plain = decomposed_noisy(ReceiverConfig(a)).p_err
        for sandwich in (False, True):
            zero = ReceiverConfig(a, squeeze=(0, 0, 0, 0), sandwich=sandwich)
            assert decomposed_noisy(zero).p_err == pytest.approx(plain, abs=1e-12)
            some = ReceiverConfig(a, squeeze=(0.2, -0.1, 0.05, 0.3), sandwich=sandwich)
            assert abs(decomposed_noisy(some).p_err - plain) > 1e-4

    @pytest.mark.parametrize("mode,n", [("position", 4), ("global", 1), ("gate", 12)])
    def test_parameter_counts(self, mode, n):
        assert ReceiverConfig(0.3, iterations=3, mode=mode).n_squeeze_params == n
        with pytest.raises(ValueError):
            ReceiverConfig(0.3, iterations=3, mode=mode, squeeze=(0.1,) * (n + 1))

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            ReceiverConfig(0.3, mode="everywhere")

    def test_mitigation_never_worse(self):
        cfg = ReceiverConfig.reference_noise(alpha_of(0.1), mode="global", d=30)
        mit = optimize_squeezing_mitigation(cfg, restarts=0, max_evals=30)
        assert mit.result.p_err <= mit.unmitigated.p_err + 1e-12
        assert len(mit.params) == 1
        assert mit.report.best_value == pytest.approx(mit.result.p_err, abs=1e-14)
