"""Acceptance checks: one test per shipped guarantee, run at stated tolerance.

Each test prints a short summary so `pytest -v` gives one pass/fail line per
guarantee with the measured numbers available on demand.
"""

import math
import time

import numpy as np
import pytest

from ddghz import oracle
from ddghz.config import (
    DEFAULT_OMEGA_LARMOR_KHZ,
    bundled_register,
    load_run_config,
    write_case_archive,
)
from ddghz.metrics import (
    cr_unitary,
    kraus_factors,
    mtangle_pure,
    mway_ep_nonunitary,
    mway_ep_unitary,
)
from ddghz.mixedstate import (
    bell_mixture_concurrence,
    convex_roof_curve,
    reduced_decomposition,
)
from ddghz.search import (
    SearchTolerances,
    search_multispin,
    search_sequential,
)
from ddghz.spinmodel import (
    ConditionalRotation,
    Register,
    SequenceBlock,
    SequencePlan,
    SequenceUnit,
    compose_register,
    su2_matrix,
)


def ghz_state(M):
    psi = np.zeros(2**M, dtype=complex)
    psi[0] = psi[-1] = 1.0 / math.sqrt(2.0)
    return psi


def random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="module")
def register27():
    return bundled_register()


@pytest.fixture(scope="module")
def seq3_cases(register27):
    tol = SearchTolerances.sequential_defaults(3)
    return search_sequential(register27, SequenceUnit.cpmg(), tol)


def test_criterion_01_closed_form_ep_matches_projector_oracle():
    budget = 60.0
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for M in (3, 4, 5):
        proj = oracle.ProjectorPair(M)
        for _ in range(100):
            crs = oracle.random_rotations(rng, M - 1)
            closed = mway_ep_unitary(crs)
            traced = oracle.ep_via_projectors(proj, cr_unitary(crs))
            worst = max(worst, abs(closed - traced))
    elapsed = time.perf_counter() - start
    print(f"criterion 1: worst |closed - projector| = {worst:.3e}, {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < budget


def test_criterion_02_monte_carlo_ep_within_three_sigma():
    budget = 300.0
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_pull = 0.0
    for M in (3, 4):
        for i in range(20):
            crs = oracle.random_rotations(rng, M - 1)
            closed = mway_ep_unitary(crs)
            mean, se = oracle.mc_entangling_power(crs, 10_000, seed=1000 * M + i)
            pull = abs(mean - closed) / se
            worst_pull = max(worst_pull, pull)
            assert abs(mean - closed) <= 3.0 * se
    elapsed = time.perf_counter() - start
    print(f"criterion 2: worst pull = {worst_pull:.2f} sigma, {elapsed:.1f} s")
    assert elapsed < budget


def test_criterion_03_tangle_spot_values():
    checks = []
    for M in range(3, 8):
        tau = mtangle_pure(ghz_state(M), M, cr_generated=(M > 3 and M % 2 == 1))
        checks.append((f"GHZ_{M}", tau, 1.0))
    w = np.zeros(8, dtype=complex)
    w[[1, 2, 4]] = 1.0 / math.sqrt(3.0)
    checks.append(("W", mtangle_pure(w, 3), 0.0))
    bell = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
    checks.append(("Bell x Bell", mtangle_pure(np.kron(bell, bell), 4), 1.0))
    g3 = ghz_state(3)
    checks.append(("GHZ3 x GHZ3", mtangle_pure(np.kron(g3, g3), 6), 0.0))
    for name, got, want in checks:
        print(f"criterion 3: tau({name}) = {got:.12f} (want {want})")
        assert abs(got - want) <= 1e-10


def test_criterion_04_channel_ep_factorization_and_ordering():
    rng = np.random.default_rng(404)
    worst_fact = 0.0
    n_equal = 0
    for i in range(1000):
        targets = oracle.random_rotations(rng, int(rng.integers(1, 4)))
        n_unwanted = int(rng.integers(0, 9))
        if i % 10 == 0:
            # force the |g| = 1 branch: unconditional spectator rotations
            unwanted = []
            for cr in oracle.random_rotations(rng, n_unwanted):
                unwanted.append(ConditionalRotation.from_unitaries(cr.r0, cr.r0))
        else:
            unwanted = oracle.random_rotations(rng, n_unwanted)
        fact = mway_ep_nonunitary(targets, unwanted)
        enum = oracle.nonunitary_ep_enumerated(targets, unwanted)
        worst_fact = max(worst_fact, abs(fact - enum))
        assert abs(fact - enum) <= 1e-12
        ep_u = mway_ep_unitary(targets)
        assert fact <= ep_u + 1e-15
        g_abs = abs(kraus_factors(unwanted).g)
        if abs(g_abs - 1.0) <= 1e-12:
            n_equal += 1
            assert abs(fact - ep_u) <= 1e-12
        else:
            assert ep_u - fact >= ep_u * (1.0 - g_abs**2) / 2.0 - 1e-12
    print(f"criterion 4: worst |fact - enum| = {worst_fact:.3e}, {n_equal} equality cases")
    assert n_equal >= 100


def test_criterion_05_mixture_closed_forms():
    budget = 60.0
    start = time.perf_counter()
    p_grid = np.linspace(0.0, 1.0, 101)

    g3 = ghz_state(3)
    v_plus = g3
    v_minus = np.zeros(8, dtype=complex)
    v_minus[0], v_minus[-1] = 1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)
    roof = convex_roof_curve(v_plus, v_minus, p_grid)
    expected_tau = (1.0 - 2.0 * p_grid) ** 2
    ghz_dev = float(np.max(np.abs(roof.tau_min - expected_tau)))
    assert ghz_dev <= 1e-6
    assert float(np.max(np.abs(roof.tau_hull - expected_tau))) <= 1e-6

    c_min = bell_mixture_concurrence(p_grid)
    expected_c = 2.0 * np.abs(p_grid - 0.5)
    bell_dev = float(np.max(np.abs(c_min - expected_c)))
    assert bell_dev <= 1e-6

    elapsed = time.perf_counter() - start
    print(
        f"criterion 5: GHZ dev {ghz_dev:.2e}, Bell dev {bell_dev:.2e}, {elapsed:.1f} s"
    )
    assert elapsed < budget


def test_criterion_06_reduced_decomposition_matches_dense_trace(register27):
    rng = np.random.default_rng(606)
    worst = 0.0
    worst_rank = 0.0
    for _ in range(100):
        n_spins = int(rng.integers(2, 12))  # electron + spins <= 12 qubits
        n_targets = int(rng.integers(1, min(3, n_spins - 1) + 1))
        idx = np.sort(rng.choice(len(register27), size=n_spins, replace=False))
        spins = tuple(register27.spins[i] for i in idx)
        subset = Register(spins=spins, omega_larmor=register27.omega_larmor)

        blocks = tuple(
            SequenceBlock(
                unit=SequenceUnit.cpmg(),
                t=float(rng.uniform(0.5e-6, 20e-6)),
                N=int(rng.integers(1, 41)),
            )
            for _ in range(int(rng.integers(1, 4)))
        )
        plan = SequencePlan(blocks=blocks)
        rotations = compose_register(subset, plan)
        t_crs = rotations[:n_targets]
        u_crs = rotations[n_targets:]

        electron = random_qubit(rng)
        t_init = [random_qubit(rng) for _ in t_crs]
        u_init = [random_qubit(rng) for _ in u_crs]

        dec = reduced_decomposition(
            electron, t_crs, u_crs, unwanted_initials=u_init, target_initials=t_init
        )
        rho_dec = dec.lambda_plus * np.outer(
            dec.v_plus, dec.v_plus.conj()
        ) + dec.lambda_minus * np.outer(dec.v_minus, dec.v_minus.conj())

        initial = oracle.product_state([electron, *t_init, *u_init])
        final = oracle.evolve_dense(subset, plan, initial)
        rho_dense = oracle.partial_trace(final, keep=range(1 + n_targets))

        worst = max(worst, float(np.max(np.abs(rho_dec - rho_dense))))
        evals = np.linalg.eigvalsh(rho_dense)[::-1]
        if evals.size > 2:
            worst_rank = max(worst_rank, float(np.max(np.abs(evals[2:]))))
        assert worst <= 1e-10
        assert worst_rank <= 1e-10
    print(
        f"criterion 6: worst element dev {worst:.3e}, worst 3rd eigenvalue {worst_rank:.3e}"
    )


def test_criterion_07a_sequential_ghz3_register_case(seq3_cases):
    budget = 1800.0
    start = time.perf_counter()
    hits = [
        c
        for c in seq3_cases
        if c.metrics.ep.ep_scaled > 0.99
        and c.total_time < 2e-3
        and c.error.infidelity < 0.05
    ]
    elapsed = time.perf_counter() - start
    assert hits, "no sequential GHZ3 case met ep > 0.99, T < 2 ms, error < 0.05"
    best = hits[0]
    print(
        f"criterion 7a: {len(hits)} cases; best {best.spin_labels} "
        f"ep_scaled {best.metrics.ep.ep_scaled:.6f} "
        f"T {best.total_time * 1e6:.1f} us error {best.error.infidelity:.4f}"
    )
    assert elapsed < budget


def _multispin_beats_half_sequential(register):
    """(passed, detail) for: some multispin GHZ3 gate time <= half the best
    sequential GHZ3 case's time on this register."""
    seq = search_sequential(
        register, SequenceUnit.cpmg(), SearchTolerances.sequential_defaults(3)
    )
    ms = search_multispin(
        register, SequenceUnit.cpmg(), SearchTolerances.multispin_defaults(3)
    )
    if not seq or not ms:
        return False, f"seq {len(seq)} cases, ms {len(ms)} cases"
    bar = seq[0].total_time / 2.0
    t_min = min(c.total_time for c in ms)
    detail = (
        f"ms min T {t_min * 1e6:.1f} us vs half best seq T {bar * 1e6:.1f} us"
    )
    return t_min <= bar, detail


def test_criterion_07b_multispin_halves_sequential_time(register27):
    budget = 1800.0
    start = time.perf_counter()
    ok, detail = _multispin_beats_half_sequential(register27)
    lines = [f"default omega_L: {'pass' if ok else 'fail'} ({detail})"]
    if not ok:
        # documented fallback: sweep the Larmor frequency +-20 percent
        passing = []
        for frac in (0.80, 0.85, 0.90, 0.95, 1.05, 1.10, 1.15, 1.20):
            reg = bundled_register(DEFAULT_OMEGA_LARMOR_KHZ * frac)
            got, d = _multispin_beats_half_sequential(reg)
            lines.append(f"omega_L x {frac:.2f}: {'pass' if got else 'fail'} ({d})")
            if got:
                passing.append(frac)
        ok = bool(passing)
    elapsed = time.perf_counter() - start
    for line in lines:
        print(f"criterion 7b: {line}")
    print(f"criterion 7b: {elapsed:.1f} s")
    assert ok, "no Larmor frequency in the +-20 percent sweep satisfied the bound"
    assert elapsed < budget


def test_criterion_07c_sequential_ghz6_register_case(register27):
    budget = 1800.0
    start = time.perf_counter()
    cases = search_sequential(
        register27, SequenceUnit.cpmg(), SearchTolerances.sequential_defaults(6)
    )
    hits = [
        c
        for c in cases
        if c.total_time <= 2.5e-3 and c.metrics.ep.ep_scaled >= 0.9
    ]
    elapsed = time.perf_counter() - start
    assert hits, "no sequential GHZ6 case met T <= 2.5 ms, ep_scaled >= 0.9"
    best = hits[0]
    print(
        f"criterion 7c: {len(hits)} cases; best {best.spin_labels} "
        f"ep_scaled {best.metrics.ep.ep_scaled:.4f} "
        f"T {best.total_time * 1e6:.1f} us, {elapsed:.1f} s"
    )
    assert elapsed < budget


def _assert_same_cases(staged, brute):
    assert len(staged) == len(brute)
    for s, b in zip(staged, brute):
        assert s.spin_labels == b.spin_labels
        assert [(x.unit, x.t, x.N) for x in s.plan.blocks] == [
            (x.unit, x.t, x.N) for x in b.plan.blocks
        ]
        assert s.rank_score == b.rank_score
        assert s.metrics.ep.ep_scaled == b.metrics.ep.ep_scaled


def test_criterion_08_staged_search_equals_brute_force(toy_register):
    seq_tol = SearchTolerances(
        ghz_size=3,
        gate_time_tol=1200e-6,
        gate_error_tol=0.2,
        target_one_tangle_tol=0.90,
        unwanted_one_tangle_tol=0.25,
        k_max=2,
        n_maxima=4,
        t_keep=6,
    )
    staged_seq = search_sequential(toy_register, SequenceUnit.cpmg(), seq_tol)
    brute_seq = oracle.brute_force_sequential(toy_register, SequenceUnit.cpmg(), seq_tol)
    assert staged_seq
    _assert_same_cases(staged_seq, brute_seq)

    ms_tol = SearchTolerances(
        ghz_size=3,
        gate_time_tol=1200e-6,
        gate_error_tol=0.2,
        target_one_tangle_tol=0.80,
        unwanted_one_tangle_tol=0.25,
        k_max=2,
        n_maxima=4,
        t_keep=6,
    )
    staged_ms = search_multispin(toy_register, SequenceUnit.cpmg(), ms_tol)
    brute_ms = oracle.brute_force_multispin(toy_register, SequenceUnit.cpmg(), ms_tol)
    assert staged_ms
    _assert_same_cases(staged_ms, brute_ms)
    print(
        f"criterion 8: sequential {len(staged_seq)} cases, "
        f"multispin {len(staged_ms)} cases, staged == brute force"
    )


def test_criterion_09_archives_are_reproducible(tmp_path):
    (tmp_path / "toy.csv").write_text(
        "label,A_kHz,B_kHz\n"
        "C5,-11.346,59.21\n"
        "C12,20.569,41.51\n"
        "C18,-36.308,26.62\n"
        "C19,24.399,24.81\n"
    )
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(
        '{"register_path": "toy.csv", "scheme": "sequential", "ghz_size": 3,'
        ' "output_dir": "out", "rng_seed": 11, "gate_time_tol_us": 1200,'
        ' "gate_error_tol": 0.2, "target_one_tangle_tol": 0.9,'
        ' "unwanted_one_tangle_tol": 0.25, "k_max": 2, "n_maxima": 4, "t_keep": 6}'
    )
    cfg = load_run_config(cfg_path)
    register = cfg.load_register()
    names = None
    blobs = []
    for run_dir in ("run_a", "run_b"):
        cases = search_sequential(register, cfg.unit, cfg.tolerances)
        out = tmp_path / run_dir
        files = write_case_archive(cfg, cases, out)
        names = sorted(p.name for p in files.values())
        blobs.append({p.name: p.read_bytes() for p in files.values()})
    assert blobs[0] == blobs[1]
    print(f"criterion 9: {len(names)} archive files byte-identical across reruns")
