import numpy as np
import pytest

from quditmbqc.algebra import gen_x, gen_z, omega_pow
from quditmbqc.cluster import (
    ClusterGraph,
    apply_stabilizer,
    chain,
    cluster_state,
    entangler,
    evolution_time,
    gate_graph,
    grid_graph,
    hamiltonian_evolution,
    phase_exponents,
    shortest_path,
    stabilizer_residuals,
)
from quditmbqc.states import apply_local, apply_phase_gate, plus_state


class TestGraphs:
    def test_chain_edges(self):
        g = chain(2, 5)
        assert g.edges == frozenset({(1, 2), (2, 3), (3, 4), (4, 5)})

    def test_single_site_chain(self):
        assert chain(3, 1).edges == frozenset()

    def test_chain_neighbors(self):
        assert chain(2, 3).neighbors(2) == (1, 3)
        assert chain(2, 3).neighbor_count(1) == 1

    def test_chain_rejects_empty(self):
        with pytest.raises(ValueError):
            chain(2, 0)

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            ClusterGraph(2, 3, frozenset({(1, 1)}))

    def test_io_rank_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ClusterGraph(2, 3, frozenset({(1, 2)}), (1,), ())

    def test_io_overlap_rejected(self):
        with pytest.raises(ValueError):
            ClusterGraph(2, 3, frozenset({(1, 2)}), (1,), (1,))

    def test_gate_graph_rot5(self):
        g = gate_graph(3, "rot5")
        assert g.edges == chain(3, 5).edges
        assert g.input_sites == (1,) and g.output_sites == (5,)
        assert g.body_sites == (2, 3, 4)

    def test_gate_graph_un1(self):
        g = gate_graph(2, "un1_6")
        assert g.edges == chain(2, 6).edges
        assert g.input_sites == (1,) and g.output_sites == (6,)

    def test_gate_graph_t6(self):
        g = gate_graph(2, "t6")
        assert g.neighbors(3) == (1, 4, 5)
        assert g.neighbors(4) == (2, 3, 6)
        assert g.input_sites == (1, 2) and g.output_sites == (5, 6)

    def test_unknown_gate_graph(self):
        with pytest.raises(ValueError):
            gate_graph(2, "ring")

    def test_grid(self):
        g = grid_graph(2, 2, 3)
        assert g.n_sites == 6
        assert g.neighbors(1) == (2, 4)
        assert g.neighbors(5) == (2, 4, 6)

    def test_shortest_path_ties_prefer_low_index(self):
        g = gate_graph(2, "t6")
        assert shortest_path(g, 1, 2) == [1, 3, 4, 2]
        assert shortest_path(g, 5, 6) == [5, 3, 4, 6]
        assert shortest_path(g, 1, 1) == [1]


class TestEntangler:
    def test_empty_graph_identity(self):
        g = ClusterGraph(2, 2, frozenset())
        state = plus_state(2, 2)
        assert np.array_equal(entangler(g)(state).amplitudes, state.amplitudes)

    def test_two_site_cluster(self):
        out = cluster_state(chain(2, 2))
        assert np.max(np.abs(out.amplitudes - np.array([1, 1, 1, -1]) / 2)) <= 1e-15

    def test_matches_sequential_phase_gates(self):
        g = gate_graph(3, "t6")
        direct = cluster_state(g)
        seq = plus_state(3, 6)
        for a, b in sorted(g.edges, reverse=True):
            seq = apply_phase_gate(seq, a, b)
        assert np.max(np.abs(direct.amplitudes - seq.amplitudes)) <= 1e-14

    def test_single_site_cluster(self):
        out = cluster_state(chain(3, 1))
        assert np.allclose(out.amplitudes, np.ones(3) / np.sqrt(3))


class TestStabilizers:
    def test_two_site_eigen_equation(self):
        state = cluster_state(chain(2, 2))
        mapped = apply_local(apply_local(state, 1, gen_x(2).conj().T), 2, gen_z(2))
        assert np.max(np.abs(mapped.amplitudes - state.amplitudes)) <= 1e-13

    @pytest.mark.parametrize("d", [2, 3, 5])
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_chain_residuals(self, d, n):
        state = cluster_state(chain(d, n))
        assert max(r for _, r in stabilizer_residuals(state, chain(d, n))) <= 1e-10

    @pytest.mark.parametrize("d", [2, 3])
    def test_t6_and_grid_residuals(self, d):
        for g in (gate_graph(d, "t6"), grid_graph(d, 2, 3)):
            state = cluster_state(g)
            assert max(r for _, r in stabilizer_residuals(state, g)) <= 1e-10

    def test_unentangled_state_fails(self):
        g = chain(2, 3)
        resid = stabilizer_residuals(plus_state(2, 3), g)
        assert all(r > 0.5 for _, r in resid)

    def test_composite_identity_on_five_chain(self):
        # product of alternating stabilizers: shifts on sites 1, 3, 5 only
        d = 3
        state = cluster_state(chain(d, 5))
        mapped = apply_local(state, 1, gen_x(d))
        mapped = apply_local(mapped, 3, gen_x(d).conj().T)
        mapped = apply_local(mapped, 5, gen_x(d))
        assert np.max(np.abs(mapped.amplitudes - state.amplitudes)) <= 1e-12

    def test_apply_stabilizer_matches_manual(self):
        g = chain(3, 3)
        state = cluster_state(g)
        manual = apply_local(state, 2, gen_x(3).conj().T)
        manual = apply_local(manual, 1, gen_z(3))
        manual = apply_local(manual, 3, gen_z(3))
        auto = apply_stabilizer(state, g, 2)
        assert np.max(np.abs(manual.amplitudes - auto.amplitudes)) <= 1e-14


class TestHamiltonian:
    def test_zero_time_identity(self, rng):
        g = chain(3, 3)
        from quditmbqc.states import random_state

        state = random_state(3, 3, rng)
        out = hamiltonian_evolution(g, 1.0, 0.0)(state)
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_evolution_time_formula(self):
        assert abs(evolution_time(4, 1.0) - np.pi / 2) <= 1e-15

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_entangler_equivalence_at_t_c(self, d, n):
        g = chain(d, n)
        ent = omega_pow(d, phase_exponents(g))
        ham = np.exp(1j * 1.7 * evolution_time(d, 1.7) * phase_exponents(g))
        assert np.max(np.abs(ent - ham)) <= 1e-12

    def test_state_level_equivalence(self):
        g = chain(3, 2)
        evolved = hamiltonian_evolution(g, 2.0, evolution_time(3, 2.0))(plus_state(3, 2))
        direct = cluster_state(g)
        assert np.max(np.abs(evolved.amplitudes - direct.amplitudes)) <= 1e-12

    def test_bad_coupling_rejected(self):
        with pytest.raises(ValueError):
            hamiltonian_evolution(chain(2, 2), 0.0, 1.0)
        with pytest.raises(ValueError):
            hamiltonian_evolution(chain(2, 2), -1.0, 1.0)
        with pytest.raises(ValueError):
            evolution_time(2, 0.0)
