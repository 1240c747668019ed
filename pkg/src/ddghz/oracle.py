"""Brute-force verification backends.

Independent implementations used only to validate the closed forms and the
staged searches: dense statevector evolution, explicit projector/SWAP
constructions on the doubled space, explicit partial traces, enumerated
Kraus sums, Monte-Carlo entangling-power estimates, and naive exhaustive
searches. Everything is deliberately simple and deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import InvariantViolation
from .metrics import (
    cr_unitary,
    g1,
    kraus_factors,
    mtangle_pure,
    mway_ep_scaled,
    mway_ep_unitary,
    one_tangle_scaled,
)
from .spinmodel import (
    ConditionalRotation,
    Register,
    SequenceBlock,
    SequencePlan,
    SequenceUnit,
    compose_register,
    su2_matrix,
    unit_propagators,
)

MAX_TOTAL_QUBITS = 14  # dense statevector cap
MAX_PROJECTOR_M = 5  # full 4^M matrices on the doubled space
MAX_TANGLE_M = 7  # doubled-space vector path
MAX_MC_M = 7
MAX_KRAUS_SPINS = 10


@dataclass(frozen=True)
class DenseState:
    """Full statevector over electron (first qubit) plus nuclei in register order."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        object.__setattr__(self, "amplitudes", amps)
        n = amps.size
        if n < 2 or n & (n - 1):
            raise ValueError(f"amplitude count {n} is not a power of two")
        if self.n_qubits > MAX_TOTAL_QUBITS:
            raise ValueError(f"{self.n_qubits} qubits exceeds the dense cap {MAX_TOTAL_QUBITS}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise InvariantViolation(f"state norm {norm:.15g} deviates from 1 beyond 1e-12")

    @property
    def n_qubits(self) -> int:
        return int(math.log2(self.amplitudes.size))


def product_state(qubit_states) -> DenseState:
    """DenseState from single-qubit states, first qubit most significant."""
    vecs = []
    for q in qubit_states:
        v = np.asarray(q, dtype=complex).ravel()
        if v.size != 2:
            raise ValueError("each qubit state must have 2 amplitudes")
        vecs.append(v / np.linalg.norm(v))
    return DenseState(reduce(np.kron, vecs))


def plus_electron_state(n_nuclei: int) -> DenseState:
    """|+> electron with all nuclei in |0>."""
    return product_state(
        [np.array([1.0, 1.0]) / math.sqrt(2.0)] + [np.array([1.0, 0.0])] * n_nuclei
    )


def apply_cr_state(rotations: list[ConditionalRotation], state) -> np.ndarray:
    """Apply conditional rotations to a bare (1 + len(rotations))-qubit vector."""
    n = len(rotations)
    amps = state.amplitudes if isinstance(state, DenseState) else state
    psi = np.asarray(amps, dtype=complex).reshape((2,) * (1 + n)).copy()
    for l, cr in enumerate(rotations):
        for j, R in ((0, cr.r0), (1, cr.r1)):
            sub = np.tensordot(R, psi[j], axes=(1, l))
            psi[j] = np.moveaxis(sub, 0, l)
    return psi.ravel()


def evolve_dense(register: Register, plan: SequencePlan, initial: DenseState) -> DenseState:
    """Apply the composed conditional rotations to a full statevector.

    Equivalent to the block unitary sum_j |j><j| (x)_l R_nj^(l) but applied
    as per-nucleus 2x2 kernels on each electron branch.
    """
    L = len(register)
    if initial.n_qubits != 1 + L:
        raise ValueError(f"state has {initial.n_qubits} qubits, register needs {1 + L}")
    rotations = compose_register(register, plan)
    return DenseState(apply_cr_state(rotations, initial.amplitudes))


def partial_trace(state, keep) -> np.ndarray:
    """Density matrix of the kept qubits (ascending index order) of a pure state.

    Args:
        state: DenseState or amplitude vector.
        keep: iterable of qubit indices to retain (0 = electron).

    Returns:
        2^k x 2^k Hermitian, unit-trace, PSD density matrix.
    """
    amps = state.amplitudes if isinstance(state, DenseState) else np.asarray(state, dtype=complex).ravel()
    n = int(math.log2(amps.size))
    keep = sorted(set(int(i) for i in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices must be a nonempty subset of 0..{n - 1}")
    traced = [i for i in range(n) if i not in keep]
    psi = amps.reshape((2,) * n).transpose(keep + traced).reshape(2 ** len(keep), 2 ** len(traced))
    rho = psi @ psi.conj().T
    _check_density_matrix(rho)
    return rho


def _check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    if np.abs(rho - rho.conj().T).max() > tol:
        raise InvariantViolation("reduced matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvariantViolation("reduced matrix trace deviates from 1")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -tol:
        raise InvariantViolation(f"reduced matrix has negative eigenvalue {evals.min():g}")


# ---------------------------------------------------------------------------
# Magic-basis Makhlin invariant (independent of the axis-angle closed form)

_MAGIC_Q = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
) / math.sqrt(2.0)


def makhlin_g1_gate(U: np.ndarray) -> float:
    """G1 of a two-qubit gate from its magic-basis representation."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (4, 4):
        raise ValueError("expected a 4x4 unitary")
    UB = _MAGIC_Q.conj().T @ U @ _MAGIC_Q
    m = UB.T @ UB
    det = np.linalg.det(U)
    val = (np.trace(m) ** 2 / (16.0 * det)).real
    return float(min(1.0, max(0.0, val)))


def g1_dense(cr: ConditionalRotation) -> float:
    """G1 of one conditional rotation via the explicit 4x4 gate."""
    return makhlin_g1_gate(cr_unitary([cr]))


# ---------------------------------------------------------------------------
# Doubled-space projector constructions


def _swap_permutation(n_qubits: int, i: int, j: int) -> np.ndarray:
    """Index permutation swapping qubits i and j (qubit 0 most significant)."""
    idx = np.arange(2**n_qubits)
    bi = (idx >> (n_qubits - 1 - i)) & 1
    bj = (idx >> (n_qubits - 1 - j)) & 1
    differ = bi ^ bj
    return idx ^ (differ << (n_qubits - 1 - i)) ^ (differ << (n_qubits - 1 - j))


@dataclass(frozen=True)
class ProjectorPair:
    """Explicit SWAP/projector matrices on the doubled space of M qubits.

    Pairs qubit j of copy A with qubit j of copy B (2M qubits total).
    ptilde is the tangle projector: all pairs antisymmetrized for even M,
    the first pair symmetrized instead for odd M. omega_p0 is
    3^-M prod_j P+_j.
    """

    M: int
    swaps: tuple = field(init=False, repr=False)
    p_plus: tuple = field(init=False, repr=False)
    p_minus: tuple = field(init=False, repr=False)
    ptilde: np.ndarray = field(init=False, repr=False)
    omega_p0: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 2 <= self.M <= MAX_PROJECTOR_M:
            raise ValueError(f"M must be in [2, {MAX_PROJECTOR_M}] for explicit matrices")
        dim = 4**self.M
        eye = np.eye(dim)
        swaps, plus, minus = [], [], []
        for j in range(self.M):
            perm = _swap_permutation(2 * self.M, j, j + self.M)
            S = np.zeros((dim, dim))
            S[perm, np.arange(dim)] = 1.0
            swaps.append(S)
            plus.append((eye + S) / 2.0)
            minus.append((eye - S) / 2.0)
        for P in plus + minus:
            if np.abs(P @ P - P).max() > 1e-12:
                raise InvariantViolation("pair projector is not idempotent")
        if self.M % 2 == 0:
            ptilde = reduce(np.matmul, minus)
        else:
            ptilde = reduce(np.matmul, [plus[0]] + minus[1:])
        omega = reduce(np.matmul, plus) / 3.0**self.M
        object.__setattr__(self, "swaps", tuple(swaps))
        object.__setattr__(self, "p_plus", tuple(plus))
        object.__setattr__(self, "p_minus", tuple(minus))
        object.__setattr__(self, "ptilde", ptilde)
        object.__setattr__(self, "omega_p0", omega)


def ep_via_projectors(proj: ProjectorPair, U: np.ndarray) -> float:
    """Entangling power 2^M Tr[U^(x2) Omega_p0 (U^dag)^(x2) Ptilde]."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (2**proj.M, 2**proj.M):
        raise ValueError(f"U must act on {proj.M} qubits")
    U2 = np.kron(U, U)
    val = 2**proj.M * np.trace(U2 @ proj.omega_p0 @ U2.conj().T @ proj.ptilde)
    return float(val.real)


def tangle_via_projectors(state, M: int) -> float:
    """M-tangle as 2^M Tr[rho^(x2) Ptilde], evaluated on the doubled vector.

    Applies the pair projectors directly to |psi> (x) |psi>, so it runs up
    to M = 7 without materializing matrices.
    """
    psi = state.amplitudes if isinstance(state, DenseState) else np.asarray(state, dtype=complex).ravel()
    if psi.size != 2**M:
        raise ValueError(f"state length {psi.size} does not match M = {M}")
    if M > MAX_TANGLE_M:
        raise ValueError(f"M = {M} exceeds the doubled-space cap {MAX_TANGLE_M}")
    doubled = np.kron(psi, psi)
    v = doubled.copy()
    for j in range(M):
        perm = _swap_permutation(2 * M, j, j + M)
        if M % 2 == 1 and j == 0:
            v = (v + v[perm]) / 2.0
        else:
            v = (v - v[perm]) / 2.0
    return float((2**M * np.vdot(doubled, v)).real)


# ---------------------------------------------------------------------------
# Monte-Carlo entangling power


def _haar_product_states(rng: np.random.Generator, samples: int, M: int) -> np.ndarray:
    """(samples, 2^M) array of per-qubit Haar-random product states."""
    raw = rng.standard_normal((samples, M, 2)) + 1j * rng.standard_normal((samples, M, 2))
    raw /= np.linalg.norm(raw, axis=2, keepdims=True)
    states = raw[:, 0, :]
    for q in range(1, M):
        states = np.einsum("si,sj->sij", states, raw[:, q, :]).reshape(samples, -1)
    return states


def _batch_tangles(states: np.ndarray, M: int) -> np.ndarray:
    """mtangle_pure over the rows of a (samples, 2^M) array."""
    if M == 3:
        return np.array([mtangle_pure(s, 3) for s in states])
    conj = states.conj()
    if M % 2 == 0:
        signs = _parity_signs(M)
        overlap = (1j) ** M * np.sum(conj * signs * conj[:, ::-1], axis=1)
        return np.abs(overlap) ** 2
    half = 2 ** (M - 1)
    signs = _parity_signs(M - 1)
    c = conj.reshape(-1, 2, half)
    flipped = (1j) ** (M - 1) * signs * c[:, :, ::-1]
    m = np.einsum("sak,sbk->sab", c, flipped)
    return 2.0 * np.sum(np.abs(m) ** 2, axis=(1, 2))


def _parity_signs(n: int) -> np.ndarray:
    pop = np.zeros(2**n, dtype=np.int64)
    for bit in range(n):
        pop += (np.arange(2**n) >> bit) & 1
    return np.where((n - pop) % 2 == 0, 1.0, -1.0)


def mc_entangling_power(
    target_rotations: list[ConditionalRotation], samples: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo average of the M-tangle over Haar product initial states.

    Returns:
        (mean, standard error of the mean). Deterministic given seed.
    """
    M = len(target_rotations) + 1
    if M > MAX_MC_M:
        raise ValueError(f"M = {M} exceeds the Monte-Carlo cap {MAX_MC_M}")
    if samples < 1000:
        raise ValueError("need at least 1000 samples for a meaningful estimate")
    rng = np.random.default_rng(seed)
    states = _haar_product_states(rng, samples, M)
    U = cr_unitary(target_rotations)
    evolved = states @ U.T
    tangles = _batch_tangles(evolved, M)
    mean = float(np.mean(tangles))
    se = float(np.std(tangles, ddof=1) / math.sqrt(samples))
    return mean, se


# ---------------------------------------------------------------------------
# Enumerated Kraus channel


def enumerate_kraus_channel(
    target_rotations: list[ConditionalRotation],
    unwanted_rotations: list[ConditionalRotation],
    rho_in: np.ndarray,
) -> np.ndarray:
    """Explicit operator sum over all 2^(L-K) Kraus operators.

    Each Kraus operator is E_i = sum_j f_j^(i) |j><j| (x) prod_l R_nj^(l)
    on the electron + target space.
    """
    if not target_rotations:
        raise ValueError("need at least one target rotation")
    if len(unwanted_rotations) > MAX_KRAUS_SPINS:
        raise ValueError(f"more than {MAX_KRAUS_SPINS} unwanted spins; enumeration too large")
    d = 2 ** (len(target_rotations) + 1)
    rho_in = np.asarray(rho_in, dtype=complex)
    if rho_in.shape != (d, d):
        raise ValueError(f"rho_in must be {d}x{d}")
    k0 = reduce(np.kron, [cr.r0 for cr in target_rotations])
    k1 = reduce(np.kron, [cr.r1 for cr in target_rotations])
    half = d // 2
    if unwanted_rotations:
        f0, f1 = kraus_factors(unwanted_rotations).enumerated(cap=MAX_KRAUS_SPINS)
    else:
        f0 = f1 = np.ones(1, dtype=complex)
    rho_out = np.zeros_like(rho_in)
    complete = np.zeros((d, d), dtype=complex)
    for w0, w1 in zip(f0, f1):
        E = np.zeros((d, d), dtype=complex)
        E[:half, :half] = w0 * k0
        E[half:, half:] = w1 * k1
        rho_out += E @ rho_in @ E.conj().T
        complete += E.conj().T @ E
    if np.abs(complete - np.eye(d)).max() > 1e-10:
        raise InvariantViolation("Kraus set is not trace-preserving within 1e-10")
    return rho_out


def nonunitary_ep_enumerated(
    target_rotations: list[ConditionalRotation],
    unwanted_rotations: list[ConditionalRotation],
) -> float:
    """Channel entangling power via the explicit Kraus double sum."""
    ep_u = mway_ep_unitary(target_rotations)
    if not unwanted_rotations:
        return ep_u
    f0, f1 = kraus_factors(unwanted_rotations).enumerated(cap=MAX_KRAUS_SPINS)
    x = f0.conj() * f1  # x_r = f0*^(r) f1^(r)
    double = float(np.sum(np.outer(x, x.conj())).real)
    return ep_u * (1.0 + double) / 2.0


def random_rotations(rng: np.random.Generator, count: int) -> list[ConditionalRotation]:
    """Random conditional rotations: uniform angles, uniform sphere axes."""
    out = []
    for _ in range(count):
        phis = rng.uniform(0.0, 2.0 * math.pi, size=2)
        axes = rng.standard_normal((2, 3))
        axes /= np.linalg.norm(axes, axis=1, keepdims=True)
        out.append(
            ConditionalRotation.from_unitaries(
                su2_matrix(phis[0], axes[0]), su2_matrix(phis[1], axes[1])
            )
        )
    return out


# ---------------------------------------------------------------------------
# Naive exhaustive searches (soundness oracle for the staged search)
#
# These reuse only the definitional pieces of the search module (resonance
# grids, candidate truncation rules, the case builder) and recompute every
# number with plain loops over matrix powers. Selection tiebreaks follow the
# same first-wins iteration order as the staged argmax.


def _naive_tangle(W0: np.ndarray, W1: np.ndarray) -> float:
    return one_tangle_scaled(g1(ConditionalRotation.from_unitaries(W0, W1)))


def brute_force_candidates(register: Register, unit: SequenceUnit, tol) -> dict:
    """per_spin_candidates recomputed with plain loops and matrix powers."""
    from .search import Candidate, _candidate_order, _local_maxima, _n_max, candidate_time_grids

    out = {}
    for spin in register.spins:
        options = []
        for k, grid in candidate_time_grids(spin, register, unit, tol):
            per_t = []
            for t in np.asarray(grid):
                t = float(t)
                n_hi = _n_max(tol, t)
                if n_hi < 1:
                    continue
                V0, V1 = unit_propagators(spin, register, unit, t)
                tangles = np.empty(n_hi)
                W0 = np.eye(2, dtype=complex)
                W1 = np.eye(2, dtype=complex)
                for N in range(1, n_hi + 1):
                    W0, W1 = V0 @ W0, V1 @ W1
                    tangles[N - 1] = _naive_tangle(W0, W1)
                maxima = _local_maxima(tangles)
                if maxima.size == 0:
                    continue
                ranked = sorted(maxima, key=lambda N: (-tangles[N - 1], N))[: tol.n_maxima]
                good = []
                for N in ranked:
                    ok = True
                    for other in register.spins:
                        if other.label == spin.label:
                            continue
                        U0, U1 = unit_propagators(other, register, unit, t)
                        O0 = np.linalg.matrix_power(U0, int(N))
                        O1 = np.linalg.matrix_power(U1, int(N))
                        if _naive_tangle(O0, O1) > tol.unwanted_one_tangle_tol:
                            ok = False
                            break
                    if ok:
                        good.append(Candidate(t, int(N), float(tangles[N - 1])))
                if good:
                    per_t.append((max(c.tangle for c in good), t, good))
            per_t.sort(key=lambda e: (-e[0], e[1]))
            for _, _, good in per_t[: tol.t_keep]:
                options.extend(good)
        if options:
            options.sort(key=_candidate_order)
            out[spin.label] = options
    return out


def brute_force_sequential(register: Register, unit: SequenceUnit, tol) -> list:
    """Exhaustive subset x full-candidate cross-product sequential search.

    Unlike the staged search this never truncates option lists or prunes
    subsets, so it is only usable on toy registers.
    """
    from .search import _sort_cases, build_case, eligible_targets

    candidates = eligible_targets(brute_force_candidates(register, unit, tol), tol)
    labels = [l for l in register.labels if l in candidates]
    m = tol.ghz_size - 1
    cases = []
    for subset in itertools.combinations(labels, m):
        best_key = None
        best_blocks = None
        for combo in itertools.product(*[candidates[l] for l in subset]):
            T = sum(opt.t * opt.N for opt in combo)
            if T > tol.gate_time_tol * (1.0 + 1e-12):
                continue
            prod = 1.0
            for s_label in subset:
                spin = register.spin(s_label)
                W0 = np.eye(2, dtype=complex)
                W1 = np.eye(2, dtype=complex)
                for opt in combo:
                    U0, U1 = unit_propagators(spin, register, unit, opt.t)
                    W0 = np.linalg.matrix_power(U0, opt.N) @ W0
                    W1 = np.linalg.matrix_power(U1, opt.N) @ W1
                prod *= 1.0 - float(g1(ConditionalRotation.from_unitaries(W0, W1)))
            key = (prod, -T)
            if best_key is None or key > best_key:
                best_key = key
                best_blocks = [(opt.t, opt.N) for opt in combo]
        if best_blocks is None:
            continue
        plan = SequencePlan(tuple(SequenceBlock(unit, t, N) for t, N in best_blocks))
        case = build_case(register, unit, tol, list(subset), plan, scheme="sequential")
        if case is not None:
            cases.append(case)
    return _sort_cases(cases)


def brute_force_multispin(register: Register, unit: SequenceUnit, tol) -> list:
    """Exhaustive single-block multi-spin search with plain loops."""
    from .search import _n_max, _sort_cases, build_case, candidate_time_grids

    m = tol.ghz_size - 1
    best = {}
    for seed in register.spins:
        for k, grid in candidate_time_grids(seed, register, unit, tol):
            for t in np.asarray(grid):
                t = float(t)
                n_hi = _n_max(tol, t)
                if n_hi < 1:
                    continue
                props = [unit_propagators(s, register, unit, t) for s in register.spins]
                currents = [(np.eye(2, dtype=complex), np.eye(2, dtype=complex))] * len(props)
                for N in range(1, n_hi + 1):
                    scaled = []
                    for i, (V0, V1) in enumerate(props):
                        W0, W1 = currents[i]
                        W0, W1 = V0 @ W0, V1 @ W1
                        currents[i] = (W0, W1)
                        scaled.append(_naive_tangle(W0, W1))
                    hit = [i for i, v in enumerate(scaled) if v >= tol.target_one_tangle_tol]
                    if len(hit) != m:
                        continue
                    if any(
                        scaled[i] > tol.unwanted_one_tangle_tol
                        for i in range(len(scaled))
                        if i not in hit
                    ):
                        continue
                    combo = tuple(register.spins[i].label for i in hit)
                    ep = float(np.prod([scaled[i] for i in hit]))
                    key = (ep, -t * N)
                    prev = best.get(combo)
                    if prev is None or key > prev[0]:
                        best[combo] = (key, t, N)
    cases = []
    for combo, (_, t, N) in best.items():
        plan = SequencePlan((SequenceBlock(unit, t, N),))
        case = build_case(register, unit, tol, list(combo), plan, scheme="multispin")
        if case is not None:
            cases.append(case)
    return _sort_cases(cases)
