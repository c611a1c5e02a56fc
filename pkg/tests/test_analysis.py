"""HSS eigenvalue analysis, stability classification, harmonic transfer scans."""

import numpy as np
import pytest
import scipy.linalg

from ltpkit import (
    SingularAtFrequency,
    SolverConfig,
    UsageError,
    build_case1,
    classify_stability,
    frequency_scan,
    harmonic_transfer_function,
    hss_eigenvalues,
    htf_block,
    interior_modes,
    linear_model,
    mode_set,
    solve_pss,
    weakest_mode,
)

OM1 = 2.0 * np.pi * 50.0


def lti_hss(a, n_harmonics=2, **kwargs):
    model = linear_model(np.asarray(a, dtype=complex), omega1=OM1, **kwargs)
    cfg = SolverConfig(n_harmonics=n_harmonics)
    return solve_pss(model, cfg).hss


class TestEigenvalues:
    def test_lti_spectrum_is_shifted_copies(self):
        a = np.array([[-3.0, 1.0], [0.0, -7.0 + 2.0j]])
        hss = lti_hss(a, n_harmonics=2)
        eigs = hss_eigenvalues(hss)
        expect = np.array([lam - 1j * k * OM1
                           for lam in np.linalg.eigvals(a)
                           for k in range(-2, 3)])
        assert eigs.size == expect.size
        for lam in expect:
            assert np.min(np.abs(eigs - lam)) < 1e-8

    def test_scalar_state_three_copies(self):
        hss = lti_hss([[-3.0]], n_harmonics=1)
        eigs = hss_eigenvalues(hss)
        eigs = eigs[np.argsort(eigs.imag)]
        expect = np.array([-3.0 - 1j * OM1, -3.0 + 0j, -3.0 + 1j * OM1])
        assert np.allclose(eigs, expect, atol=1e-9)

    def test_sorted_by_descending_real_part(self, case1_balanced):
        _, result = case1_balanced
        eigs = hss_eigenvalues(result.hss)
        assert np.all(np.diff(eigs.real) <= 1e-12)

    def test_hss_dimensions(self, case1_balanced, case2_default):
        assert case1_balanced[1].hss.dim == 54        # (2*4+1) * 6
        assert case2_default[1].hss.dim == 162        # (2*4+1) * 18


class TestWeakestMode:
    def test_largest_real_part_wins(self):
        eigs = np.array([-4.0 + 2j, -0.5 - 7j, -2.0])
        assert weakest_mode(eigs) == pytest.approx(-0.5 - 7j)

    def test_tie_breaks_toward_small_nonnegative_imag(self):
        eigs = np.array([-1.0 - 1j, -1.0 + 1j, -5.0])
        assert weakest_mode(eigs) == pytest.approx(-1.0 + 1j)

    def test_empty_set_rejected(self):
        with pytest.raises(UsageError):
            weakest_mode(np.array([]))

    def test_edge_band_excluded_when_grid_given(self):
        # artifact at the outermost band has the largest real part but must
        # lose to an interior mode once the filter is active
        eigs = np.array([0.5 + 1j * 4.0 * OM1, -1.0 + 0j])
        assert weakest_mode(eigs) == pytest.approx(0.5 + 4j * OM1)
        assert weakest_mode(eigs, omega1=OM1, n_harmonics=4) == pytest.approx(-1.0)


class TestInteriorModes:
    def test_drops_only_outermost_band(self):
        band_edge = 4.0 * OM1
        eigs = np.array([
            -1.0 + 1j * 3.6 * OM1,    # inside (3.5, 4.5)*om1: dropped
            -2.0 - 1j * band_edge,    # dropped (negative side)
            -3.0 + 1j * 2.0 * OM1,    # kept
            -4.0 + 0j,                # kept
            -5.0 + 1j * 3.4 * OM1,    # kept (below the band)
        ])
        kept = interior_modes(eigs, OM1, 4)
        assert np.allclose(np.sort_complex(kept),
                           np.sort_complex(eigs[2:]))

    def test_all_edge_set_returned_unchanged(self):
        eigs = np.array([1.0 + 1j * 4.0 * OM1, 1.0 - 1j * 4.0 * OM1])
        assert np.array_equal(interior_modes(eigs, OM1, 4), eigs)

    def test_invalid_arguments(self):
        eigs = np.array([0j])
        with pytest.raises(UsageError):
            interior_modes(eigs, 0.0, 4)
        with pytest.raises(UsageError):
            interior_modes(eigs, OM1, 0)

    def test_case1_copies_shift_with_fundamental(self, case1_unbalanced):
        # genuine modes appear as a ladder of j*om1-shifted copies; every
        # interior mode well inside the truncation must have its +om1
        # neighbor present too
        _, result = case1_unbalanced
        eigs = hss_eigenvalues(result.hss)
        inner = interior_modes(eigs, OM1, 4)
        sel = inner[np.abs(inner.imag) < 2.5 * OM1]
        assert sel.size >= 20
        for lam in sel:
            assert np.min(np.abs(eigs - (lam + 1j * OM1))) < 0.5


class TestClassification:
    def test_signs(self):
        assert classify_stability(complex(-3.0, 5.0)) == "Stable"
        assert classify_stability(complex(0.065, 900.0)) == "Unstable"

    def test_marginal_band(self):
        assert classify_stability(complex(0.01, 0.0), marginal_band=0.05) == "Marginal"
        assert classify_stability(complex(-0.2, 0.0), marginal_band=0.05) == "Stable"
        assert classify_stability(complex(0.2, 0.0), marginal_band=0.05) == "Unstable"
        with pytest.raises(UsageError):
            classify_stability(0.0 + 0j, marginal_band=-1.0)

    def test_mode_set_consistent(self, case2_default):
        _, result = case2_default
        modes = mode_set(result.hss)
        assert modes.weakest == weakest_mode(hss_eigenvalues(result.hss),
                                             omega1=OM1, n_harmonics=4)
        assert modes.classification == classify_stability(modes.weakest)
        assert modes.classification == "Stable"


class TestHarmonicTransferFunction:
    def test_lti_blocks_are_shifted_resolvents(self):
        a = np.array([[-30.0, 10.0], [0.0, -80.0]], dtype=complex)
        hss = lti_hss(a, n_harmonics=2)
        s = 2j * np.pi * 12.0
        h = harmonic_transfer_function(hss, s)
        eye = np.eye(2)
        for k in range(-2, 3):
            got = htf_block(h, k, k, 2, 2, 2)
            expect = np.linalg.inv((s + 1j * k * OM1) * eye - a)
            assert np.max(np.abs(got - expect)) < 1e-10
        for k in range(-2, 3):
            for l in range(-2, 3):
                if k != l:
                    assert np.max(np.abs(htf_block(h, k, l, 2, 2, 2))) < 1e-12

    def test_static_feedthrough_only(self):
        hss = lti_hss([[-1.0]], n_harmonics=2,
                      b=np.zeros((1, 1)), d=np.array([[3.5]]))
        h = harmonic_transfer_function(hss, 2j * np.pi * 7.0)
        for k in range(-2, 3):
            assert htf_block(h, k, k, 1, 1, 2)[0, 0] == pytest.approx(3.5)
        assert np.max(np.abs(h - np.diag(np.diag(h)))) < 1e-14

    def test_block_indexing_validated(self):
        hss = lti_hss([[-1.0]], n_harmonics=2)
        h = harmonic_transfer_function(hss, 1j)
        with pytest.raises(UsageError):
            htf_block(h, 3, 0, 1, 1, 2)

    def test_singular_at_eigenvalue(self):
        hss = lti_hss([[2j * np.pi * 37.0]], n_harmonics=2)
        with pytest.raises(SingularAtFrequency):
            harmonic_transfer_function(hss, 2j * np.pi * 37.0)


class TestFrequencyScan:
    def test_lti_mirrors_identically_zero(self):
        a = np.array([[-30.0, 10.0], [0.0, -80.0]], dtype=complex)
        hss = lti_hss(a, n_harmonics=2)
        scan = frequency_scan(hss, [3.0, 11.0, 90.0], output_index=0, input_index=1)
        assert not scan.singular.any()
        assert np.max(np.abs(scan.mirror_plus)) < 1e-13
        assert np.max(np.abs(scan.mirror_minus)) < 1e-13
        assert np.max(np.abs(scan.diag)) > 0.0

    def test_singular_frequency_flagged_not_fatal(self):
        hss = lti_hss([[2j * np.pi * 37.0]], n_harmonics=2)
        scan = frequency_scan(hss, [36.0, 37.0, 38.0])
        assert list(scan.singular) == [False, True, False]
        assert np.isnan(scan.diag[1].real)
        assert np.isfinite(scan.diag[0]) and np.isfinite(scan.diag[2])

    def test_index_validation(self):
        hss = lti_hss([[-1.0]], n_harmonics=2)
        with pytest.raises(UsageError):
            frequency_scan(hss, [10.0], output_index=5)
        with pytest.raises(UsageError):
            frequency_scan(lti_hss([[-1.0]], n_harmonics=1), [10.0])

    def test_case1_mirror_coupling_from_pll(self):
        # balanced operation: the same-sector scan shows no frequency
        # coupling, while the conjugate-sector entry carries a strong
        # 2*om1-offset term that collapses when the PLL is slowed to a crawl
        freqs = [10.0, 35.0, 85.0, 130.0]
        active = solve_pss(build_case1()["open_loop"]).hss
        frozen = solve_pss(build_case1({"alpha_pll": 0.01})["open_loop"]).hss

        same = frequency_scan(active, freqs, output_index=0, input_index=0)
        assert np.max(np.abs(same.mirror_plus)) < 1e-10
        assert np.max(np.abs(same.mirror_minus)) < 1e-10
        assert np.min(np.abs(same.diag)) > 0.1

        cross_act = frequency_scan(active, freqs, output_index=1, input_index=0)
        cross_frz = frequency_scan(frozen, freqs, output_index=1, input_index=0)
        act = np.max(np.abs(cross_act.mirror_minus))
        frz = np.max(np.abs(cross_frz.mirror_minus))
        assert act > 0.1
        assert frz < 0.01 * act

    def test_case1_hundred_hertz_offset_entries(self):
        # single-point look at the full operator: probing 10 Hz couples into
        # the conjugate response 100 Hz away on both sides
        hss = solve_pss(build_case1()["open_loop"]).hss
        h = harmonic_transfer_function(hss, 2j * np.pi * 10.0)
        assert abs(htf_block(h, -2, 0, 2, 2, 4)[1, 0]) > 0.1
        assert abs(htf_block(h, +2, 0, 2, 2, 4)[0, 1]) > 0.1
        assert abs(htf_block(h, -2, 0, 2, 2, 4)[0, 0]) < 1e-10
