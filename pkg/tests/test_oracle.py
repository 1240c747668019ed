import math

import numpy as np
import pytest

from ddghz import oracle
from ddghz.errors import InvariantViolation
from ddghz.metrics import cr_unitary, g1, mtangle_pure, mway_ep_unitary
from ddghz.spinmodel import SequenceBlock, SequencePlan, SequenceUnit, compose_register


def test_dense_state_validation():
    with pytest.raises(InvariantViolation):
        oracle.DenseState(np.array([1.0, 1.0], dtype=complex))  # unnormalized
    with pytest.raises(ValueError):
        oracle.DenseState(np.array([1.0, 0.0, 0.0], dtype=complex))  # not 2^n
    ok = oracle.DenseState(np.array([1.0, 0.0], dtype=complex))
    assert ok.n_qubits == 1


def test_product_state_msb_ordering():
    state = oracle.product_state([[0, 1], [1, 0]])  # |1>|0>
    np.testing.assert_allclose(state.amplitudes, [0, 0, 1, 0], atol=1e-15)
    plus = oracle.plus_electron_state(2)
    np.testing.assert_allclose(
        plus.amplitudes, [1 / math.sqrt(2), 0, 0, 0, 1 / math.sqrt(2), 0, 0, 0], atol=1e-15
    )


def test_apply_cr_state_matches_full_unitary():
    rng = np.random.default_rng(30)
    for m in (1, 2, 3):
        crs = oracle.random_rotations(rng, m)
        amps = rng.standard_normal(2 ** (m + 1)) + 1j * rng.standard_normal(2 ** (m + 1))
        amps /= np.linalg.norm(amps)
        via_kernels = oracle.apply_cr_state(crs, amps)
        via_matrix = cr_unitary(crs) @ amps
        np.testing.assert_allclose(via_kernels, via_matrix, atol=1e-12)


def test_evolve_dense_matches_composed_rotations(toy_register):
    unit = SequenceUnit.cpmg()
    plan = SequencePlan((SequenceBlock(unit, 2.3e-6, 7), SequenceBlock(unit, 5.1e-6, 3)))
    initial = oracle.plus_electron_state(len(toy_register))
    evolved = oracle.evolve_dense(toy_register, plan, initial)
    crs = compose_register(toy_register, plan)
    expect = oracle.apply_cr_state(crs, initial)
    np.testing.assert_allclose(evolved.amplitudes, expect, atol=1e-12)
    with pytest.raises(ValueError):
        oracle.evolve_dense(toy_register, plan, oracle.plus_electron_state(2))


def test_partial_trace_known_cases():
    bell = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2.0)
    rho = oracle.partial_trace(bell, keep=[0])
    np.testing.assert_allclose(rho, np.eye(2) / 2.0, atol=1e-12)
    prod = oracle.product_state([[1, 1j], [1, 0], [0, 1]])
    rho01 = oracle.partial_trace(prod, keep=[0, 1])
    assert abs(np.trace(rho01 @ rho01).real - 1.0) < 1e-12  # stays pure
    with pytest.raises(ValueError):
        oracle.partial_trace(bell, keep=[])
    with pytest.raises(ValueError):
        oracle.partial_trace(bell, keep=[2])


def test_partial_trace_matches_manual_contraction():
    rng = np.random.default_rng(31)
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    amps /= np.linalg.norm(amps)
    rho = oracle.partial_trace(amps, keep=[0, 2])
    psi = amps.reshape(2, 2, 2, 2)
    expect = np.einsum("abcd,ebfd->acef", psi, psi.conj()).reshape(4, 4)
    np.testing.assert_allclose(rho, expect, atol=1e-12)


def test_makhlin_invariant_dense_route():
    rng = np.random.default_rng(32)
    for _ in range(50):
        cr = oracle.random_rotations(rng, 1)[0]
        assert abs(oracle.g1_dense(cr) - float(g1(cr))) < 1e-12


def test_projector_pair_bounds():
    with pytest.raises(ValueError):
        oracle.ProjectorPair(1)
    with pytest.raises(ValueError):
        oracle.ProjectorPair(8)


def test_tangle_via_projectors_matches_closed_routes():
    rng = np.random.default_rng(33)
    for M in (3, 4, 5):
        ghz = np.zeros(2**M, dtype=complex)
        ghz[0] = ghz[-1] = 1.0 / math.sqrt(2.0)
        assert abs(oracle.tangle_via_projectors(ghz, M) - 1.0) < 1e-10
        crs = oracle.random_rotations(rng, M - 1)
        state = oracle.apply_cr_state(crs, oracle.plus_electron_state(M - 1))
        via_proj = oracle.tangle_via_projectors(state, M)
        closed = mtangle_pure(state, M, cr_generated=(M % 2 == 1 and M > 3))
        assert abs(via_proj - closed) < 1e-7


def test_mc_entangling_power_deterministic():
    rng = np.random.default_rng(34)
    crs = oracle.random_rotations(rng, 2)
    a = oracle.mc_entangling_power(crs, samples=2000, seed=11)
    b = oracle.mc_entangling_power(crs, samples=2000, seed=11)
    assert a == b
    c = oracle.mc_entangling_power(crs, samples=2000, seed=12)
    assert a != c
    with pytest.raises(ValueError):
        oracle.mc_entangling_power(crs, samples=500, seed=0)


def test_mc_entangling_power_unbiased_across_seeds():
    # the closed form should sit inside the 3-SE band for >= 48 of 50 seeds
    rng = np.random.default_rng(35)
    crs = oracle.random_rotations(rng, 2)
    closed = mway_ep_unitary(crs)
    inside = 0
    for seed in range(50):
        mean, se = oracle.mc_entangling_power(crs, samples=1500, seed=seed)
        if abs(mean - closed) <= 3.0 * se:
            inside += 1
    assert inside >= 48


def test_enumerate_kraus_channel_unital_and_consistent():
    rng = np.random.default_rng(36)
    targets = oracle.random_rotations(rng, 2)
    unwanted = oracle.random_rotations(rng, 3)
    d = 8
    # the channel is unital: the maximally mixed state is a fixed point
    out = oracle.enumerate_kraus_channel(targets, unwanted, np.eye(d) / d)
    np.testing.assert_allclose(out, np.eye(d) / d, atol=1e-12)
    with pytest.raises(ValueError):
        oracle.enumerate_kraus_channel([], unwanted, np.eye(2))
    with pytest.raises(ValueError):
        oracle.enumerate_kraus_channel(targets, unwanted, np.eye(4))


def test_enumerate_kraus_channel_matches_dense_trace():
    # tracing spectators out of the dense evolution equals the operator sum,
    # checked up to 12 total qubits with L - K up to 8
    rng = np.random.default_rng(37)
    for n_unwanted in (1, 4, 8):
        targets = oracle.random_rotations(rng, 2)
        unwanted = oracle.random_rotations(rng, n_unwanted)
        amps = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        amps /= np.linalg.norm(amps)
        nuclei = [np.array([1.0, 0.0])] * (2 + n_unwanted)
        full = oracle.apply_cr_state(targets + unwanted, oracle.product_state([amps] + nuclei))
        rho_dense = oracle.partial_trace(full, keep=[0, 1, 2])
        psi_in = np.kron(amps, np.array([1, 0, 0, 0], dtype=complex))
        rho_channel = oracle.enumerate_kraus_channel(
            targets, unwanted, np.outer(psi_in, psi_in.conj())
        )
        np.testing.assert_allclose(rho_channel, rho_dense, atol=1e-10)


def test_random_rotations_reproducible():
    a = oracle.random_rotations(np.random.default_rng(5), 3)
    b = oracle.random_rotations(np.random.default_rng(5), 3)
    assert a == b
    assert len(a) == 3
