"""Stabilizer tableau vs the dense oracle, plus the spec's edge cases."""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from qdp.gates import CliffordGate, sample_two_qudit_clifford
from qdp.pauli import PauliWord
from qdp.rng import Stream
from qdp.tableau import StabilizerTableau, init_state

from dense_oracle import DenseState


def test_init_maximally_mixed():
    s = init_state(4, 2, "maximally_mixed")
    assert s.g == 0 and s.entropy() == 4


def test_init_all_zero():
    s = init_state(3, 5, "all_zero")
    assert s.g == 3 and s.entropy() == 0
    for i, w in enumerate(s.generators()):
        assert w.phase == 0
        assert list(w.z) == [1 if j == i else 0 for j in range(3)]
        assert not w.x.any()


def test_init_rejects_non_prime():
    with pytest.raises(ValueError):
        init_state(2, 6, "all_zero")
    with pytest.raises(ValueError):
        init_state(2, 2, "bogus")


def test_single_site_all_zero_inactive():
    s = init_state(1, 3, "all_zero")
    assert s.inactive_probability(0) == Fraction(1)


def test_measure_all_zero_deterministic():
    st = Stream.for_trajectory(1, 1)
    s = init_state(3, 5, "all_zero")
    before = s.exps.copy()
    assert s.measure_z(1, st) == 0
    assert (s.exps == before).all() and s.g == 3


def test_measure_maximally_mixed_uniform():
    st = Stream.for_trajectory(1, 2)
    counts = np.zeros(5, dtype=int)
    for _ in range(2000):
        s = init_state(1, 5, "maximally_mixed")
        o = s.measure_z(0, st)
        counts[o] += 1
        assert s.g == 1
    # 3 sigma binomial band around 400
    sd = np.sqrt(2000 * 0.2 * 0.8)
    assert (np.abs(counts - 400) < 3.5 * sd).all()


def test_bell_pair_correlated_outcomes():
    # generalized Bell pair for p=3: stabilized by X x X and Z x Z^-1
    st = Stream.for_trajectory(1, 3)
    for _ in range(50):
        s = StabilizerTableau.from_generators(2, 3, [
            PauliWord(3, [1, 1], [0, 0], 0),
            PauliWord(3, [0, 0], [1, 2], 0),
        ])
        a = s.measure_z(0, st)
        b = s.measure_z(1, st)
        assert b == a


def test_inactive_probability_cases():
    s = init_state(1, 3, "maximally_mixed")
    assert s.inactive_probability(0) == Fraction(1, 3)
    # state stabilized by omega Z_j: deterministic nonzero outcome
    s2 = StabilizerTableau.from_generators(1, 3, [PauliWord(3, [0], [1], 1)])
    assert s2.inactive_probability(0) == Fraction(0)
    s3 = init_state(2, 2, "all_zero")
    assert s3.inactive_probability(1) == Fraction(1)


def test_reset_site_spec_examples():
    st = Stream.for_trajectory(1, 4)
    # all_zero: no-op
    s = init_state(2, 3, "all_zero")
    before = (s.exps.copy(), s.phases.copy())
    s.reset_site(0, st)
    assert (s.exps == before[0]).all() and (s.phases == before[1]).all()
    # maximally mixed single qudit: afterwards stabilized by Z phase 0
    for p in (2, 3, 5):
        s = init_state(1, p, "maximally_mixed")
        s.reset_site(0, st)
        assert s.g == 1 and s.entropy() == 0
        w = s.generator(0)
        assert w.phase == 0 and not w.x.any() and w.z[0] == 1
        assert s.inactive_probability(0) == Fraction(1)


def test_reset_bell_pair_leaves_partner_correlated():
    st = Stream.for_trajectory(1, 5)
    for _ in range(40):
        s = StabilizerTableau.from_generators(2, 3, [
            PauliWord(3, [1, 1], [0, 0], 0),
            PauliWord(3, [0, 0], [1, 2], 0),
        ])
        dense = DenseState.from_tableau(s)
        st_before = st.counter
        s.reset_site(0, st)
        assert s.inactive_probability(0) == Fraction(1)
        # partner stays in a deterministic basis state
        assert s.inactive_probability(1) in (Fraction(0), Fraction(1))
        # outcome can be recovered by replaying the stream
        replay = Stream(st.key)
        replay.state[1] = st_before
        a = replay.randint(3)
        dense.reset_with_outcome(0, a)
        got = DenseState.from_tableau(s)
        assert np.allclose(got.rho, dense.rho, atol=1e-9)


def test_subsystem_entropy_examples():
    s = init_state(4, 2, "maximally_mixed")
    assert s.subsystem_entropy(range(4)) == 4
    s = init_state(4, 3, "all_zero")
    for r in range(1, 4):
        for A in combinations(range(4), r):
            assert s.subsystem_entropy(A) == 0
    # Bell pair: S_{1 site} = 1, purity symmetry
    b = StabilizerTableau.from_generators(2, 2, [
        PauliWord(2, [1, 1], [0, 0], 0),
        PauliWord(2, [0, 0], [1, 1], 0),
    ])
    assert b.subsystem_entropy([0]) == 1
    assert b.subsystem_entropy([0]) == b.subsystem_entropy([1])


def test_interval_profile_matches_generic_path():
    st = Stream.for_trajectory(2, 0)
    for p in (2, 3):
        s = init_state(6, p, "maximally_mixed")
        for step in range(30):
            gate = sample_two_qudit_clifford(p, st)
            j = st.randint(5)
            s.apply_gate(gate, (j, j + 1))
            if st.random() < 0.4:
                s.measure_z(st.randint(6), st)
        prof = s.interval_entropies_from_origin()
        for x in range(7):
            assert prof[x] == s.subsystem_entropy(range(x))


def test_gate_site_errors():
    s = init_state(4, 3, "all_zero")
    g = CliffordGate.identity(3)
    with pytest.raises(ValueError):
        s.apply_gate(g, (1, 1))
    with pytest.raises(ValueError):
        s.apply_gate(g, (0, 9))
    with pytest.raises(ValueError):
        s.apply_gate(CliffordGate.identity(2), (0, 1))


@pytest.mark.parametrize("p", [2, 3])
def test_oracle_equivalence_random_sequences(p):
    """Random gate/measure/reset sequences: outcome distributions and
    entropies must match the dense simulator at every step."""
    rng = Stream.for_trajectory(3, p)
    n_seq = 25
    L = 3
    subsets = [A for r in range(1, L + 1) for A in combinations(range(L), r)]
    for seq in range(n_seq):
        kind = "maximally_mixed" if seq % 2 == 0 else "all_zero"
        tab = init_state(L, p, kind)
        dense = (DenseState.maximally_mixed(L, p) if kind == "maximally_mixed"
                 else DenseState.all_zero(L, p))
        for step in range(12):
            op = rng.randint(3)
            if op == 0:
                j = rng.randint(L - 1)
                gate = sample_two_qudit_clifford(p, rng)
                tab.apply_gate(gate, (j, j + 1))
                dense.apply_gate(gate, (j, j + 1))
            elif op == 1:
                j = rng.randint(L)
                pred = np.full(p, 1.0 / p)
                prob0 = tab.inactive_probability(j)
                counter_before = rng.counter
                a = tab.measure_z(j, rng)
                consumed = rng.counter - counter_before
                dist = dense.measurement_distribution(j)
                if consumed == 0:
                    # case (ii): deterministic
                    pred = np.zeros(p)
                    pred[a] = 1.0
                assert np.allclose(dist, pred, atol=1e-9), (p, seq, step)
                assert abs(float(prob0) - dist[0]) < 1e-9
                dense.project(j, a)
            else:
                j = rng.randint(L)
                counter_before = rng.counter
                tab.reset_site(j, rng)
                if rng.counter > counter_before:
                    replay = Stream(rng.key)
                    replay.state[1] = counter_before
                    a = replay.randint(p)
                else:
                    a = int(np.argmax(dense.measurement_distribution(j)))
                dense.reset_with_outcome(j, a)
            tab.validate()
            for A in subsets:
                se_t = tab.subsystem_entropy(A)
                se_d = dense.entropy_qudits(A)
                assert abs(se_d - se_t) < 1e-7, (p, seq, step, A)
            for j in range(L):
                assert abs(float(tab.inactive_probability(j))
                           - dense.inactive_probability(j)) < 1e-9
