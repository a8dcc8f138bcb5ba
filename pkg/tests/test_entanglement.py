import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from seqmeas.entanglement import concurrence, concurrence_sqrt_form, negativity, spin_flip
from seqmeas.measurement import singlet_state, werner_state
from seqmeas.qcore import InvalidStateError, ket, projector, random_density_matrix, random_pure_state

seeds = hst.integers(min_value=0, max_value=2**32 - 1)


def test_bell_and_product_states():
    assert concurrence(singlet_state()) == pytest.approx(1.0, abs=1e-14)
    assert concurrence(projector(ket(0, 1))) == pytest.approx(0.0, abs=1e-14)
    assert negativity(singlet_state()) == pytest.approx(0.5, abs=1e-14)
    assert concurrence(np.eye(4) / 4) == 0.0


def test_spin_flip_leaves_singlet_invariant():
    assert np.allclose(spin_flip(singlet_state()), singlet_state())


@pytest.mark.parametrize("p, c", [(1.0, 1.0), (0.8, 0.7), (0.5, 0.25), (1 / 3, 0.0), (0.2, 0.0)])
def test_werner_concurrence(p, c):
    # Werner states have C = max(0, (3p - 1)/2)
    assert concurrence(werner_state(p)) == pytest.approx(c, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_pure_state_closed_form(seed):
    a, b, c, d = random_pure_state(np.random.default_rng(seed))
    rho = projector(np.array([a, b, c, d]))
    assert abs(concurrence(rho) - 2 * abs(a * d - b * c)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(seeds, hst.sampled_from([2, 3, 4]))
def test_sign_agreement_with_negativity(seed, rank):
    rho = random_density_matrix(np.random.default_rng(seed), rank=rank)
    assert (concurrence(rho) > 1e-9) == (negativity(rho) > 1e-9)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_sqrt_form_agrees_on_full_rank_states(seed):
    rho = random_density_matrix(np.random.default_rng(seed))
    assert abs(concurrence(rho) - concurrence_sqrt_form(rho)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_invariant_under_local_diagonal_phases(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, rank=2)
    phases = np.exp(1j * rng.uniform(0, 2 * math.pi, 2))
    u = np.kron(np.diag([1, phases[0]]), np.diag([1, phases[1]]))
    assert concurrence(u @ rho @ u.conj().T) == pytest.approx(concurrence(rho), abs=1e-10)


def test_rejects_unphysical_input():
    with pytest.raises(InvalidStateError):
        concurrence(np.diag([1.1, -0.1, 0, 0]))
