import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tailored_bell.bases import (
    OverlapMatrix,
    basis_pair_from_overlap_blocks,
    mub_overlap,
    mub_pair,
    pair_from_unitary,
    preprocess,
    qubit_mub_blocks,
)
from tailored_bell.errors import (
    ConditionsNotSatisfied,
    NotBlockDiagonal,
    UnitOverlapPresent,
    VisibilityOutOfRange,
    ZeroOverlapInColumn,
)
from tailored_bell.functional import QuantumRealization, born_behavior, evaluate_realization, functional_from_overlap
from tailored_bell.matcore import haar_unitary, max_entangled_dm
from tailored_bell.realization import (
    alice_tilde_operators,
    canonical,
    certification_completeness_check,
    certify_measurements,
    exceptional_block_state,
    exceptional_report,
    extract_state,
    extraction_isometries,
    isotropic_realization,
    projector_sum_residual,
    shift_unitaries,
    spectrum_report,
)


def haar_canonical(d, seed):
    return canonical(preprocess(pair_from_unitary(haar_unitary(d, seed))).truncated)


def value(r):
    return evaluate_realization(functional_from_overlap(r.overlap), r)[1]


class TestCanonical:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_reaches_quantum_value(self, d, seed):
        c = haar_canonical(d, seed)
        assert abs(value(c) - (d - 1)) < 1e-9

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_structure(self, d):
        rep = spectrum_report(haar_canonical(d, d))
        assert rep.max_spectrum_deviation < 1e-10
        assert np.all(rep.kernel_dims == d - 2)
        assert rep.projector_sum_residual < 1e-10
        assert rep.saturation_residual < 1e-12

    def test_unit_overlap_rejected(self):
        u = np.eye(3, dtype=complex)
        u[:2, :2] = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        with pytest.raises(UnitOverlapPresent):
            canonical(pair_from_unitary(u))

    def test_preprocessed_shared_vector(self):
        u = np.eye(3, dtype=complex)
        u[1:, 1:] = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
        c = canonical(preprocess(pair_from_unitary(u)).truncated)
        assert c.d == 2 and abs(value(c) - 1) < 1e-12

    def test_projector_sum_identity(self):
        c = haar_canonical(4, 3)
        assert projector_sum_residual(c.bob_P, c.bob_Q) < 1e-12
        diff = c.bob_P[:, None] - c.bob_Q[None, :]
        total = np.einsum("xyij,xyjk->ik", diff, diff)
        np.testing.assert_allclose(total, 6 * np.eye(4), atol=1e-12)


class TestIsotropic:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_linear_law(self, d):
        c = haar_canonical(d, 11)
        for nu in (0, 0.25, 0.5, 0.75, 1):
            assert abs(value(isotropic_realization(c, nu)) - oracles.isotropic_score(d, nu)) < 1e-9

    def test_out_of_range(self):
        with pytest.raises(VisibilityOutOfRange):
            isotropic_realization(canonical(mub_pair(2)), 1.2)


class TestCertification:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_canonical_passes(self, d):
        c = haar_canonical(d, 100 + d)
        rep = certify_measurements(c.bob_P, c.bob_Q, c.overlap)
        assert rep.passed
        assert max(rep.max_residual_P, rep.max_residual_Q) < 1e-9

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_rotated_projector_fails(self, d):
        c = haar_canonical(d, 200 + d)
        p = oracles.rotate_projector(c.bob_P, 0, 0.1)
        rep = certify_measurements(p, c.bob_Q, c.overlap)
        assert not rep.passed
        assert max(rep.max_residual_P, rep.max_residual_Q) > 1e-3

    def test_identity_projectors_fail(self):
        d = 3
        p = np.zeros((d, d, d), dtype=complex)
        p[0] = np.eye(d)
        rep = certify_measurements(p, p, mub_overlap(d))
        # O^2 P_0 - P_0 P_0 P_0 = (1/d - 1) I
        assert abs(rep.max_residual_P - (1 - 1 / d)) < 1e-12

    def test_completeness_rank_one(self):
        c = haar_canonical(3, 5)
        comp = certification_completeness_check(c.bob_P, c.bob_Q, c.overlap)
        assert (comp.n, comp.D) == (1, 3) and comp.spectrum_ok
        assert abs(comp.value - 2) < 1e-9

    def test_completeness_higher_rank(self):
        # P (x) 1_2 and Q (x) 1_2 satisfy the same relations with n = 2
        c = haar_canonical(3, 6)
        p = np.stack([np.kron(m, np.eye(2)) for m in c.bob_P])
        q = np.stack([np.kron(m, np.eye(2)) for m in c.bob_Q])
        comp = certification_completeness_check(p, q, c.overlap)
        assert (comp.n, comp.D) == (2, 6) and comp.spectrum_ok
        assert abs(comp.value - 2) < 1e-9

    def test_completeness_rejects_violations(self):
        c = haar_canonical(3, 7)
        with pytest.raises(ConditionsNotSatisfied):
            certification_completeness_check(c.bob_Q, c.bob_P, c.overlap)


class TestExtraction:
    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_fidelity(self, d, seed):
        c = haar_canonical(d, seed)
        for j in range(d):
            rep = extract_state(c, c.overlap, j)
            assert rep.fidelity >= 1 - 1e-8
            assert rep.product_residual < 1e-9
            np.testing.assert_allclose(rep.marginals_P, 1 / d, atol=1e-9)
            np.testing.assert_allclose(rep.marginals_Q, 1 / d, atol=1e-9)
            assert max(rep.isometry_residuals) < 1e-9

    def test_shift_unitaries_cycle(self):
        c = haar_canonical(4, 9)
        us = shift_unitaries(c.bob_P, c.bob_Q, c.overlap, 2)
        np.testing.assert_allclose(us[0], np.eye(4), atol=1e-12)
        for k, u in enumerate(us):
            np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
            for i in range(4):
                np.testing.assert_allclose(u @ c.bob_P[i] @ u.conj().T, c.bob_P[(i - k) % 4], atol=1e-12)

    def test_alice_operators_are_transposes(self):
        c = haar_canonical(3, 4)
        pt, qt = alice_tilde_operators(c.alice, functional_from_overlap(c.overlap).weights)
        np.testing.assert_allclose(pt, np.swapaxes(c.bob_P, 1, 2), atol=1e-12)
        np.testing.assert_allclose(qt, np.swapaxes(c.bob_Q, 1, 2), atol=1e-12)

    def test_embedded_realization(self):
        # canonical realization tensored with an auxiliary entangled pair on both sides
        c = haar_canonical(2, 3)
        aux = max_entangled_dm(2)
        state = np.kron(c.state, aux).reshape(2, 2, 2, 2, 2, 2, 2, 2)
        # reorder (A, B, A', B') -> (A, A', B, B')
        state = state.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
        alice = np.array([[np.kron(a, np.eye(2)) for a in row] for row in c.alice])
        p = np.stack([np.kron(m, np.eye(2)) for m in c.bob_P])
        q = np.stack([np.kron(m, np.eye(2)) for m in c.bob_Q])
        r = QuantumRealization(state, alice, p, q)
        assert abs(evaluate_realization(functional_from_overlap(c.overlap), r)[1] - 1) < 1e-12
        rep = extract_state(r, c.overlap, 0)
        assert rep.fidelity >= 1 - 1e-8

    def test_zero_in_column(self):
        pair = basis_pair_from_overlap_blocks(qubit_mub_blocks(4))
        c = canonical(pair)
        with pytest.raises(ZeroOverlapInColumn):
            extraction_isometries(c.bob_P, c.bob_Q, c.overlap, 0, c.alice)

    def test_violated_relations(self):
        c = haar_canonical(3, 1)
        p = oracles.rotate_projector(c.bob_P, 1, 0.1)
        with pytest.raises(ConditionsNotSatisfied):
            extraction_isometries(p, c.bob_Q, c.overlap, 0, c.alice)


class TestExceptional:
    def test_blocks_d4(self):
        pair = basis_pair_from_overlap_blocks(qubit_mub_blocks(4))
        rep = exceptional_report(pair, [[0, 1], [2, 3]])
        assert abs(rep.value - 3) < 1e-9
        assert rep.max_behavior_deviation < 1e-10
        assert rep.distinct_from_phi > 0.1
        assert rep.block_weights == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_state_is_not_pure(self):
        pair = basis_pair_from_overlap_blocks(qubit_mub_blocks(4))
        r = exceptional_block_state(pair, [[0, 1], [2, 3]])
        purity = np.trace(r.state @ r.state).real
        assert abs(purity - 0.5) < 1e-12

    def test_behaviour_matches_phi(self):
        pair = basis_pair_from_overlap_blocks(qubit_mub_blocks(6))
        r = exceptional_block_state(pair, [[0, 1], [2, 3], [4, 5]])
        ref = canonical(pair)
        np.testing.assert_allclose(born_behavior(r).p, born_behavior(ref).p, atol=1e-10)

    def test_bad_blocks(self):
        pair = basis_pair_from_overlap_blocks(qubit_mub_blocks(4))
        with pytest.raises(NotBlockDiagonal):
            exceptional_block_state(pair, [[0, 2], [1, 3]])
        with pytest.raises(NotBlockDiagonal):
            exceptional_block_state(pair, [[0, 1], [2]])


def test_overlap_preserving_corruption_caught_by_completeness():
    # qubit: turning P_0 about the Bloch axis of f_0 keeps every overlap, so the relations hold exactly
    c = canonical(mub_pair(2))
    axis = c.bob_Q[0] - c.bob_Q[1]  # Bloch-sphere direction of f_0 as a Pauli combination
    w, v = np.linalg.eigh(axis)
    u = (v * np.exp(-0.5j * w)) @ v.conj().T
    p = c.bob_P.copy()
    p[0] = u @ p[0] @ u.conj().T
    rep = certify_measurements(p, c.bob_Q, c.overlap)
    assert max(rep.max_residual_P, rep.max_residual_Q) < 1e-12
    assert rep.completeness_residual > 0.1
    assert not rep.passed
