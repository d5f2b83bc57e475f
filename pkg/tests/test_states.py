import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quditmbqc.algebra import fourier, gen_x, gen_z, omega_pow, x_eigenvector
from quditmbqc.states import (
    StateVector,
    apply_local,
    apply_phase_gate,
    apply_sites,
    basis_ket,
    equal_up_to_phase,
    extract_sites,
    plus_state,
    project_site,
    random_state,
    reduced_density,
)
from conftest import random_unitary

TWO_SITE_CLUSTER = np.array([1, 1, 1, -1], dtype=complex) / 2


class TestConstruction:
    def test_basis_ket_single(self):
        assert np.allclose(basis_ket(2, 1, [0]).amplitudes, [1, 0])

    def test_basis_ket_indexing(self):
        # site 1 is the most significant digit: |1,2> at d=3 sits at 1*3+2=5
        amps = basis_ket(3, 2, [1, 2]).amplitudes
        assert amps[5] == 1.0 and np.count_nonzero(amps) == 1

    def test_basis_ket_bad_digit(self):
        with pytest.raises(ValueError):
            basis_ket(2, 1, [2])

    def test_basis_ket_length_mismatch(self):
        with pytest.raises(ValueError):
            basis_ket(2, 2, [0])

    def test_plus_state_values(self):
        assert np.allclose(plus_state(2, 2).amplitudes, np.full(4, 0.5))
        assert np.allclose(plus_state(3, 1).amplitudes, x_eigenvector(3, 0))

    def test_plus_state_shift_invariance(self):
        st5 = plus_state(3, 4)
        for site in range(1, 5):
            moved = apply_local(st5, site, gen_x(3).conj().T)
            assert np.max(np.abs(moved.amplitudes - st5.amplitudes)) <= 1e-12

    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            StateVector(2, 1, np.array([1.0, 1.0]))

    def test_amplitudes_immutable(self):
        state = plus_state(2, 2)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0


class TestApplyLocal:
    def test_identity_is_bitwise_noop(self):
        state = random_state(3, 2, np.random.default_rng(0))
        out = apply_local(state, 1, np.eye(3, dtype=complex))
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_shift_on_first_site(self):
        out = apply_local(basis_ket(2, 2, [0, 0]), 1, gen_x(2))
        assert np.allclose(out.amplitudes, basis_ket(2, 2, [1, 0]).amplitudes)

    def test_order_sensitivity_is_exchange_phase(self):
        state = random_state(3, 2, np.random.default_rng(1))
        zx = apply_local(apply_local(state, 1, gen_z(3)), 1, gen_x(3))
        xz = apply_local(apply_local(state, 1, gen_x(3)), 1, gen_z(3))
        assert np.max(np.abs(zx.amplitudes - omega_pow(3, 1) * xz.amplitudes)) <= 1e-12

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            apply_local(plus_state(2, 2), 1, np.eye(3))

    @pytest.mark.parametrize("d,n", [(2, 3), (3, 2), (5, 2)])
    def test_unitary_preserves_norm(self, d, n, rng):
        state = random_state(d, n, rng)
        out = apply_local(state, n, random_unitary(d, rng))
        assert abs(out.norm() - 1.0) <= 1e-12

    def test_apply_sites_matches_kron(self, rng):
        state = random_state(2, 3, rng)
        u = random_unitary(4, rng)
        out = apply_sites(state, [3, 1], u)
        # site ordering of the operator: first tensor factor acts on site 3
        big = u.reshape(2, 2, 2, 2)
        t = np.tensordot(big, state.tensor(), axes=([2, 3], [2, 0]))
        ref = np.moveaxis(t, [0, 1], [2, 0]).reshape(-1)
        assert np.max(np.abs(out.amplitudes - ref)) <= 1e-12


class TestPhaseGate:
    def test_qutrit_11_phase(self):
        out = apply_phase_gate(basis_ket(3, 2, [1, 1]), 1, 2)
        assert np.allclose(out.amplitudes[4], omega_pow(3, 1))

    def test_zero_digit_unchanged(self):
        state = basis_ket(3, 2, [0, 2])
        out = apply_phase_gate(state, 1, 2)
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_two_site_cluster_by_hand(self):
        out = apply_phase_gate(plus_state(2, 2), 1, 2)
        assert np.max(np.abs(out.amplitudes - TWO_SITE_CLUSTER)) <= 1e-15

    def test_symmetry_bitwise(self, rng):
        state = random_state(3, 3, rng)
        ab = apply_phase_gate(state, 1, 3)
        ba = apply_phase_gate(state, 3, 1)
        assert np.array_equal(ab.amplitudes, ba.amplitudes)

    def test_order_d(self, rng):
        state = random_state(3, 2, rng)
        out = state
        for _ in range(3):
            out = apply_phase_gate(out, 1, 2)
        assert np.max(np.abs(out.amplitudes - state.amplitudes)) <= 1e-12

    def test_same_site_rejected(self):
        with pytest.raises(ValueError):
            apply_phase_gate(plus_state(2, 2), 1, 1)

    def test_conjugation_identities_on_random_states(self, rng):
        # the phase gate turns a shift on either leg into shift x clock
        d = 3
        xdag = gen_x(d).conj().T
        z = gen_z(d)
        for a, b, c in [(1, 2, 3), (2, 3, 1)]:
            state = random_state(d, 3, rng)
            via_gate = apply_phase_gate(apply_local(state, a, xdag), a, b)
            direct = apply_local(apply_local(apply_phase_gate(state, a, b), a, xdag), b, z)
            assert np.max(np.abs(via_gate.amplitudes - direct.amplitudes)) <= 1e-12
            via_gate = apply_phase_gate(apply_local(state, b, xdag), a, b)
            direct = apply_local(apply_local(apply_phase_gate(state, a, b), b, xdag), a, z)
            assert np.max(np.abs(via_gate.amplitudes - direct.amplitudes)) <= 1e-12
            # spectator site and clock operators are untouched
            via_gate = apply_phase_gate(apply_local(state, c, xdag), a, b)
            direct = apply_local(apply_phase_gate(state, a, b), c, xdag)
            assert np.max(np.abs(via_gate.amplitudes - direct.amplitudes)) <= 1e-12
            via_gate = apply_phase_gate(apply_local(state, c, z), a, b)
            direct = apply_local(apply_phase_gate(state, a, b), c, z)
            assert np.max(np.abs(via_gate.amplitudes - direct.amplitudes)) <= 1e-12


class TestProjection:
    def test_projection_onto_itself(self):
        state = basis_ket(3, 1, [0])
        _, p = project_site(state, 1, np.array([1, 0, 0], dtype=complex))
        assert abs(p - 1.0) <= 1e-12

    def test_cluster_projection_half(self):
        state = StateVector(2, 2, TWO_SITE_CLUSTER)
        _, p = project_site(state, 1, x_eigenvector(2, 0))
        assert abs(p - 0.5) <= 1e-12

    def test_orthogonal_projection_zero(self):
        state = basis_ket(2, 2, [0, 0])
        post, p = project_site(state, 1, np.array([0, 1], dtype=complex))
        assert p <= 1e-14
        assert not post.normalized

    def test_completeness(self, rng):
        state = random_state(3, 2, rng)
        u = random_unitary(3, rng)
        total = sum(project_site(state, 2, u[:, s])[1] for s in range(3))
        assert abs(total - 1.0) <= 1e-12


class TestReducedDensity:
    def test_product_state_purity(self):
        rho = reduced_density(basis_ket(3, 2, [1, 2]), [1])
        assert abs(np.trace(rho @ rho).real - 1.0) <= 1e-12

    def test_maximally_entangled_marginal(self):
        # sum_k |kk> / sqrt(d)
        d = 3
        amps = np.zeros(9, dtype=complex)
        for k in range(3):
            amps[k * 3 + k] = 1 / np.sqrt(3)
        rho = reduced_density(StateVector(3, 2, amps), [2])
        assert np.max(np.abs(rho - np.eye(3) / 3)) <= 1e-12

    def test_two_site_cluster_marginal(self):
        rho = reduced_density(StateVector(2, 2, TWO_SITE_CLUSTER), [1])
        assert np.max(np.abs(rho - np.eye(2) / 2)) <= 1e-12

    def test_eigenvalue_range(self, rng):
        state = random_state(2, 4, rng)
        rho = reduced_density(state, [2, 4])
        evals = np.linalg.eigvalsh(rho)
        assert evals.min() >= -1e-10 and evals.max() <= 1 + 1e-10
        assert abs(np.trace(rho).real - 1.0) <= 1e-12

    def test_bad_site_list(self):
        with pytest.raises(ValueError):
            reduced_density(plus_state(2, 2), [1, 1])
        with pytest.raises(ValueError):
            reduced_density(plus_state(2, 2), [])


class TestEqualUpToPhase:
    def test_global_phase_ignored(self, rng):
        state = random_state(3, 2, rng)
        rotated = StateVector(3, 2, np.exp(0.7j) * state.amplitudes)
        ok, fid = equal_up_to_phase(state, rotated)
        assert ok and abs(fid - 1.0) <= 1e-12

    def test_orthogonal_states(self):
        ok, fid = equal_up_to_phase(basis_ket(2, 1, [0]), basis_ket(2, 1, [1]))
        assert not ok and fid <= 1e-12

    def test_distinct_fourier_vectors(self):
        a = StateVector(3, 1, x_eigenvector(3, 0))
        b = StateVector(3, 1, x_eigenvector(3, 1))
        ok, fid = equal_up_to_phase(a, b)
        assert not ok and fid <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            equal_up_to_phase(plus_state(2, 1), plus_state(2, 2))


class TestExtractSites:
    def test_product_extraction(self, rng):
        psi = random_state(2, 1, rng)
        x0 = x_eigenvector(2, 0)
        full = np.kron(np.kron(x0, psi.amplitudes), x0)
        state = StateVector(2, 3, full)
        got = extract_sites(state, [2], {1: x0, 3: x0})
        ok, fid = equal_up_to_phase(got, psi)
        assert ok

    def test_ordering_respected(self, rng):
        psi = random_state(2, 2, rng)
        x0 = x_eigenvector(2, 0)
        full = np.kron(psi.amplitudes, x0)
        state = StateVector(2, 3, full)
        swapped = extract_sites(state, [2, 1], {3: x0})
        ref = np.transpose(psi.tensor(), (1, 0)).reshape(-1)
        ok, fid = equal_up_to_phase(swapped, StateVector(2, 2, ref))
        assert ok

    def test_missing_direction(self):
        with pytest.raises(ValueError):
            extract_sites(plus_state(2, 3), [1], {2: x_eigenvector(2, 0)})


@given(st.sampled_from([2, 3, 5]), st.integers(0, 4))
@settings(max_examples=30, deadline=None)
def test_fourier_basis_measures_shift_eigenstates(d, j):
    j = j % d
    f = fourier(d)
    state = StateVector(d, 1, f[:, j])
    _, p = project_site(state, 1, f[:, j])
    assert abs(p - 1.0) <= 1e-12
