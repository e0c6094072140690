import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gefbounds.catalog import werner
from gefbounds.measures import (binary_entropy, concurrence_two_qubit, eof_from_concurrence,
                                eof_pure_bipartite, eof_two_qubit_mixed, von_neumann_entropy)
from gefbounds.qmat import (DensityMatrix, PureState, StateError, local_unitary, make_rng,
                            partial_trace, pure_to_density, random_density, random_haar_pure,
                            random_unitary, reduce_pure)

# frozen from a 30-digit mpmath evaluation of h((1 + sqrt(1 - C^2)) / 2)
EOF_AT_TWO_THIRDS = 0.5500477595827574
EOF_AT_085 = 0.7893549609887846
H_ONE_THIRD = 0.9182958340544895

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_entropy_of_known_spectra():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-12)
    assert von_neumann_entropy(np.diag([1.0, 0, 0])) == 0.0
    assert von_neumann_entropy(np.diag([2 / 3, 1 / 3])) == pytest.approx(H_ONE_THIRD, abs=1e-12)


def test_entropy_rejects_negative_spectrum():
    with pytest.raises(StateError):
        von_neumann_entropy(np.diag([1.1, -0.1]))


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(0.49991595816452800, abs=1e-14)
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_eof_from_concurrence_oracle():
    assert eof_from_concurrence(0.0) == 0.0
    assert eof_from_concurrence(1.0) == pytest.approx(1.0, abs=1e-15)
    assert eof_from_concurrence(2 / 3) == pytest.approx(EOF_AT_TWO_THIRDS, abs=1e-12)
    with pytest.raises(ValueError):
        eof_from_concurrence(1.2)


def test_werner_closed_form():
    # C = (3p - 1) / 2 for p|Phi+><Phi+| + (1 - p) I/4
    for p in (0.2, 1 / 3, 0.5, 0.9, 1.0):
        rho = werner(p)
        assert concurrence_two_qubit(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-12)
    assert eof_two_qubit_mixed(werner(0.9)) == pytest.approx(EOF_AT_085, abs=1e-12)


def test_concurrence_needs_two_qubits():
    with pytest.raises(StateError):
        concurrence_two_qubit(DensityMatrix(np.eye(6) / 6, (2, 3)))


def test_pure_state_concurrence_formula():
    # C(psi) = 2|ad - bc| for psi = (a, b, c, d)
    rng = make_rng(3)
    for _ in range(50):
        psi = random_haar_pure((2, 2), rng)
        a, b, c, d = psi.amplitudes
        assert concurrence_two_qubit(pure_to_density(psi)) == pytest.approx(
            2 * abs(a * d - b * c), abs=1e-12)


def test_eof_pure_bipartite():
    ghz = PureState(np.array([1, 0, 0, 0, 0, 0, 0, 1]) / math.sqrt(2), (2, 2, 2))
    assert eof_pure_bipartite(ghz, [0]) == pytest.approx(1.0, abs=1e-12)
    assert eof_pure_bipartite(ghz, [0, 2]) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(StateError):
        eof_pure_bipartite(ghz, [0, 1, 2])


@settings(max_examples=60, deadline=None)
@given(seed=seeds, rank=st.integers(1, 8))
def test_entropy_bounds_and_unitary_invariance(seed, rank):
    rng = make_rng(seed)
    rho = random_density((2, 2, 2), rank, rng)
    s = von_neumann_entropy(rho)
    assert -1e-12 <= s <= 3 + 1e-12
    assert s <= math.log2(rank) + 1e-9
    u = random_unitary(8, rng)
    assert von_neumann_entropy(u @ rho.matrix @ u.conj().T) == pytest.approx(s, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=seeds)
def test_pure_marginals_share_entropy(seed):
    psi = random_haar_pure((2, 3, 2), make_rng(seed))
    assert von_neumann_entropy(reduce_pure(psi, [1])) == pytest.approx(
        von_neumann_entropy(reduce_pure(psi, [0, 2])), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=seeds)
def test_subadditivity(seed):
    rho = random_density((2, 3), 4, make_rng(seed))
    sa = von_neumann_entropy(partial_trace(rho, [0]))
    sb = von_neumann_entropy(partial_trace(rho, [1]))
    s = von_neumann_entropy(rho)
    assert s <= sa + sb + 1e-9
    assert abs(sa - sb) <= s + 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=seeds, rank=st.integers(1, 4))
def test_concurrence_local_unitary_invariance(seed, rank):
    rng = make_rng(seed)
    rho = random_density((2, 2), rank, rng)
    u = local_unitary([random_unitary(2, rng), random_unitary(2, rng)])
    c = concurrence_two_qubit(rho)
    assert 0.0 <= c <= 1.0
    moved = DensityMatrix(u @ rho.matrix @ u.conj().T, (2, 2))
    assert concurrence_two_qubit(moved) == pytest.approx(c, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, rank=st.integers(1, 4))
def test_eof_below_marginal_entropies(seed, rank):
    rho = random_density((2, 2), rank, make_rng(seed))
    e = eof_two_qubit_mixed(rho)
    assert e <= von_neumann_entropy(partial_trace(rho, [0])) + 1e-9
    assert e <= von_neumann_entropy(partial_trace(rho, [1])) + 1e-9


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0.0, 1.0))
def test_eof_monotone_in_concurrence(c):
    assert 0.0 <= eof_from_concurrence(c) <= 1.0
    assert eof_from_concurrence(min(1.0, c + 1e-3)) >= eof_from_concurrence(c) - 1e-12
