import math

import numpy as np
import pytest

from ddghz.spinmodel import (
    ConditionalRotation,
    NuclearSpin,
    Register,
    SequenceBlock,
    SequencePlan,
    SequenceUnit,
    analytic_resonance_time,
    check_special_unitary,
    compose_register,
    compose_sequence,
    conditional_hamiltonians,
    extract_axis_angle,
    scan_resonances,
    su2_matrix,
    unit_propagators,
)


def random_axis(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def same_up_to_sign(U, V, tol=1e-12):
    """SU(2) equality up to the global sign left free by axis-angle form."""
    return min(np.abs(U - V).max(), np.abs(U + V).max()) < tol


def test_su2_matrix_is_special_unitary():
    rng = np.random.default_rng(0)
    for _ in range(50):
        phi = rng.uniform(0.0, 2.0 * math.pi)
        V = su2_matrix(phi, random_axis(rng))
        np.testing.assert_allclose(V @ V.conj().T, np.eye(2), atol=1e-13)
        assert abs(np.linalg.det(V) - 1.0) < 1e-13
        assert abs(np.trace(V).real - 2.0 * math.cos(phi / 2.0)) < 1e-12
        check_special_unitary(V)


def test_su2_matrix_known_values():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    np.testing.assert_allclose(su2_matrix(0.0, (0, 0, 1)), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(su2_matrix(math.pi, (1, 0, 0)), -1j * sx, atol=1e-15)
    rz = np.diag([np.exp(-0.25j * math.pi), np.exp(0.25j * math.pi)])
    np.testing.assert_allclose(su2_matrix(math.pi / 2.0, (0, 0, 1)), rz, atol=1e-15)


def test_extract_axis_angle_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(200):
        phi = rng.uniform(1e-6, 2.0 * math.pi - 1e-6)
        axis = random_axis(rng)
        V = su2_matrix(phi, axis)
        phi2, axis2 = extract_axis_angle(V)
        assert 0.0 <= phi2 <= 2.0 * math.pi
        assert abs(np.linalg.norm(axis2) - 1.0) < 1e-12
        assert same_up_to_sign(su2_matrix(phi2, axis2), V)


def test_extract_axis_angle_quarter_turn():
    phi, axis = extract_axis_angle(su2_matrix(math.pi / 2.0, (1, 0, 0)))
    assert abs(phi - math.pi / 2.0) < 1e-12
    np.testing.assert_allclose(axis, (1, 0, 0), atol=1e-12)


def test_extract_axis_angle_identity_degenerate():
    phi, axis = extract_axis_angle(np.eye(2, dtype=complex))
    assert phi == 0.0
    assert axis == (0.0, 0.0, 1.0)


def test_extract_axis_angle_canonical_sign():
    # canonical form makes the first nonzero axis component positive
    phi = 1.3
    axis = np.array([-0.6, 0.0, 0.8])
    phi2, axis2 = extract_axis_angle(su2_matrix(phi, axis))
    assert axis2[0] > 0.0
    assert same_up_to_sign(su2_matrix(phi2, axis2), su2_matrix(phi, axis))


def test_nuclear_spin_rejects_negative_B():
    with pytest.raises(ValueError):
        NuclearSpin.from_khz("x", 10.0, -1.0)


def test_register_rejects_duplicates_and_empty():
    s = NuclearSpin.from_khz("a", 1.0, 1.0)
    with pytest.raises(ValueError):
        Register(spins=(s, s), omega_larmor=1.0)
    with pytest.raises(ValueError):
        Register(spins=(), omega_larmor=1.0)
    with pytest.raises(ValueError):
        Register(spins=(s,), omega_larmor=0.0)


def test_register_lookup(toy_register):
    assert toy_register.labels == ("C5", "C12", "C18", "C19")
    assert toy_register.index("C18") == 2
    assert toy_register.spin("C12").label == "C12"
    assert len(toy_register) == 4
    with pytest.raises(KeyError):
        toy_register.index("C99")


def test_sequence_unit_fractions():
    cpmg = SequenceUnit.cpmg()
    np.testing.assert_allclose(cpmg.pulse_fractions, (0.25, 0.75))
    udd1 = SequenceUnit.udd(1)
    np.testing.assert_allclose(udd1.pulse_fractions, (0.5,), atol=1e-15)
    udd4 = SequenceUnit.udd(4)
    expect = [math.sin(k * math.pi / 10.0) ** 2 for k in range(1, 5)]
    np.testing.assert_allclose(udd4.pulse_fractions, expect, atol=1e-15)


def test_sequence_unit_rejects_bad_fractions():
    with pytest.raises(ValueError):
        SequenceUnit.custom((0.5, 0.25))  # not ascending
    with pytest.raises(ValueError):
        SequenceUnit.custom((0.0, 0.5))  # endpoint pulse
    with pytest.raises(ValueError):
        SequenceUnit.custom(())


def test_sequence_plan_total_time():
    unit = SequenceUnit.cpmg()
    plan = SequencePlan((SequenceBlock(unit, 2e-6, 3), SequenceBlock(unit, 5e-6, 2)))
    assert abs(plan.total_time - 16e-6) < 1e-18
    with pytest.raises(ValueError):
        SequencePlan(())
    with pytest.raises(ValueError):
        SequenceBlock(unit, -1e-6, 3)
    with pytest.raises(ValueError):
        SequenceBlock(unit, 1e-6, 0)


def test_conditional_rotation_validation():
    with pytest.raises(ValueError):
        ConditionalRotation(1.0, (1.0, 1.0, 0.0), 1.0, (0.0, 0.0, 1.0))
    cr = ConditionalRotation(1.0, (1.0, 0.0, 0.0), 2.0, (0.0, 0.0, 1.0))
    assert abs(cr.axis_dot) < 1e-15
    assert same_up_to_sign(cr.r0, su2_matrix(1.0, (1, 0, 0)))


def test_conditional_hamiltonians_structure(toy_register):
    spin = toy_register.spin("C5")
    H0, H1 = conditional_hamiltonians(spin, toy_register)
    wl = toy_register.omega_larmor
    np.testing.assert_allclose(H0, np.diag([wl / 2.0, -wl / 2.0]), atol=1e-6)
    assert abs(H1[0, 0].real - (wl + spin.A) / 2.0) < 1e-6
    assert abs(H1[0, 1].real - spin.B / 2.0) < 1e-6
    np.testing.assert_allclose(H1, H1.conj().T, atol=1e-9)


def hermitian_propagator(H, tau):
    vals, vecs = np.linalg.eigh(H)
    return (vecs * np.exp(-1j * vals * tau)) @ vecs.conj().T


def brute_unit_propagators(spin, register, unit, t):
    """Direct product of precession segments.

    Each electron pi pulse swaps which conditional Hamiltonian acts on the
    nucleus, so branch j alternates H_j, H_{1-j}, ... across segments.
    """
    H = conditional_hamiltonians(spin, register)
    frs = list(unit.pulse_fractions) + [1.0]
    segments = [frs[0]] + [b - a for a, b in zip(frs, frs[1:])]
    out = []
    for start in (0, 1):
        V = np.eye(2, dtype=complex)
        state = start
        for seg in segments:
            V = hermitian_propagator(H[state], seg * t) @ V
            state = 1 - state
        out.append(V)
    return out[0], out[1]


@pytest.mark.parametrize("unit_name", ["cpmg", "udd3"])
def test_unit_propagators_match_segment_products(toy_register, unit_name):
    unit = SequenceUnit.cpmg() if unit_name == "cpmg" else SequenceUnit.udd(3)
    rng = np.random.default_rng(2)
    for spin in toy_register.spins[:2]:
        for _ in range(5):
            t = rng.uniform(0.5e-6, 10e-6)
            V0, V1 = unit_propagators(spin, toy_register, unit, t)
            B0, B1 = brute_unit_propagators(spin, toy_register, unit, t)
            np.testing.assert_allclose(V0, B0, atol=1e-10)
            np.testing.assert_allclose(V1, B1, atol=1e-10)


def test_compose_sequence_matches_unit_product(toy_register):
    unit = SequenceUnit.cpmg()
    rng = np.random.default_rng(3)
    for spin in toy_register.spins:
        blocks = tuple(
            SequenceBlock(unit, rng.uniform(1e-6, 8e-6), int(rng.integers(1, 6)))
            for _ in range(3)
        )
        plan = SequencePlan(blocks)
        cr = compose_sequence(spin, toy_register, plan)
        W0 = np.eye(2, dtype=complex)
        W1 = np.eye(2, dtype=complex)
        for b in blocks:
            V0, V1 = unit_propagators(spin, toy_register, unit, b.t)
            W0 = np.linalg.matrix_power(V0, b.N) @ W0
            W1 = np.linalg.matrix_power(V1, b.N) @ W1
        assert same_up_to_sign(cr.r0, W0, tol=1e-9)
        assert same_up_to_sign(cr.r1, W1, tol=1e-9)


def test_compose_register_order(toy_register):
    plan = SequencePlan((SequenceBlock(SequenceUnit.cpmg(), 2e-6, 3),))
    crs = compose_register(toy_register, plan)
    assert len(crs) == len(toy_register)
    single = compose_sequence(toy_register.spins[2], toy_register, plan)
    assert crs[2] == single


def test_b_zero_spin_never_entangles(toy_register):
    from ddghz.metrics import g1

    quiet = NuclearSpin.from_khz("Q", -4.0, 0.0)
    reg = Register(spins=toy_register.spins + (quiet,), omega_larmor=toy_register.omega_larmor)
    rng = np.random.default_rng(4)
    unit = SequenceUnit.cpmg()
    for _ in range(10):
        plan = SequencePlan((SequenceBlock(unit, rng.uniform(1e-6, 10e-6), int(rng.integers(1, 30))),))
        cr = compose_sequence(quiet, reg, plan)
        assert abs(float(g1(cr)) - 1.0) < 1e-12
    assert scan_resonances(quiet, reg, unit, k_max=3) == []


def test_analytic_resonance_time_formula(toy_register):
    spin = toy_register.spin("C5")
    for k in (1, 2, 3):
        expect = 2.0 * (2 * k - 1) * math.pi / (toy_register.omega_larmor + spin.A / 2.0)
        assert abs(analytic_resonance_time(spin, toy_register, k) - expect) < 1e-18


def test_scan_resonances_finds_dips(toy_register):
    unit = SequenceUnit.cpmg()
    spin = toy_register.spin("C5")
    seeds = scan_resonances(spin, toy_register, unit, k_max=3)
    assert [s.k for s in seeds] == [1, 2, 3]
    for seed in seeds:
        assert abs(seed.t_resonance - seed.t_analytic) < 0.2e-6
        assert seed.g1_min < 1.0 - 1e-6
        # grid recentered on the numerical dip
        assert abs(seed.grid[0] - (seed.t_resonance - 0.25e-6)) < 1e-12
        assert abs(seed.grid[-1] - (seed.t_resonance + 0.25e-6)) < 1e-12


def test_scan_resonances_argument_validation(toy_register):
    unit = SequenceUnit.cpmg()
    spin = toy_register.spin("C5")
    with pytest.raises(ValueError):
        scan_resonances(spin, toy_register, unit, k_max=0)
    with pytest.raises(ValueError):
        scan_resonances(spin, toy_register, unit, k_max=1, probe_iterations=0)
    with pytest.raises(ValueError):
        scan_resonances(spin, toy_register, unit, k_max=1, window=-1.0)


def test_scan_resonances_all_bundled_spins(register27):
    # every nonzero-B spin has a first-order resonance; B = 0 spins have none
    unit = SequenceUnit.cpmg()
    for spin in register27.spins:
        seeds = scan_resonances(spin, register27, unit, k_max=1)
        if spin.B == 0.0:
            assert seeds == []
        else:
            assert len(seeds) == 1


def test_check_special_unitary_rejects_non_unitary():
    from ddghz.errors import InvariantViolation

    with pytest.raises(InvariantViolation):
        check_special_unitary(np.array([[1.0, 0.1], [0.0, 1.0]], dtype=complex))
