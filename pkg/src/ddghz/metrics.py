"""Closed-form entanglement metrics for electron-conditioned rotations.

Everything here consumes ConditionalRotation objects (axis-angle pairs per
nucleus) or explicit state vectors:

- Makhlin invariant G1 and the nuclear one-tangle (2/9)(1 - G1).
- M-way entangling power of the target unitary, (2/3)^M prod_k (1 - G1_k),
  plus its non-unitary counterpart after tracing out unwanted spins.
- Pure-state M-tangles (spin-flip form for even M, CKW for M = 3, a
  projector-derived form for odd M > 3 on CR-generated states).
- Kraus factors of the spectator-trace channel and the average gate error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import InvariantViolation
from .spinmodel import ConditionalRotation, Register, SequencePlan, compose_sequence

CLAMP_TOL = 1e-12
MAX_ONE_TANGLE = 2.0 / 9.0


def clamp01(x: float, tol: float = CLAMP_TOL, what: str = "value") -> float:
    """Clamp to [0, 1]; deviations beyond tol indicate an upstream bug."""
    if x < -tol or x > 1.0 + tol:
        raise InvariantViolation(f"{what} = {x!r} lies outside [0, 1] beyond tolerance {tol:g}")
    return min(1.0, max(0.0, float(x)))


@dataclass(frozen=True)
class MakhlinG1:
    """Local invariant of one conditional rotation; 0 marks a perfect entangler."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", clamp01(self.value, what="G1"))

    def __float__(self) -> float:
        return self.value


def g1(cr: ConditionalRotation) -> MakhlinG1:
    """Makhlin invariant of the conditional rotation pair.

    G1 = (cos(phi0/2) cos(phi1/2) + (n0.n1) sin(phi0/2) sin(phi1/2))^2.
    """
    inner = math.cos(cr.phi0 / 2.0) * math.cos(cr.phi1 / 2.0) + cr.axis_dot * math.sin(
        cr.phi0 / 2.0
    ) * math.sin(cr.phi1 / 2.0)
    return MakhlinG1(inner * inner)


def g1_iterated(cr: ConditionalRotation, n: int) -> MakhlinG1:
    """Makhlin invariant of the n-th power of the conditional rotation pair.

    Powers of an SU(2) rotation scale the angle and keep the axis, so only
    phi0 and phi1 change.
    """
    if n < 1:
        raise ValueError("iteration count must be >= 1")
    inner = math.cos(n * cr.phi0 / 2.0) * math.cos(n * cr.phi1 / 2.0) + (
        cr.axis_dot * math.sin(n * cr.phi0 / 2.0) * math.sin(n * cr.phi1 / 2.0)
    )
    return MakhlinG1(inner * inner)


def one_tangle(g: "MakhlinG1 | float") -> float:
    """Nuclear one-tangle (2/9)(1 - G1), in [0, 2/9]."""
    return MAX_ONE_TANGLE * (1.0 - float(g))


def one_tangle_scaled(g: "MakhlinG1 | float") -> float:
    """One-tangle as a fraction of its maximum 2/9, i.e. 1 - G1."""
    return 1.0 - float(g)


def mway_ep_unitary(target_rotations: list[ConditionalRotation]) -> float:
    """M-way entangling power (2/3)^M prod_k (1 - G1_k), M = len + 1."""
    if not target_rotations:
        raise ValueError("no target rotations: need at least one nucleus")
    M = len(target_rotations) + 1
    prod = 1.0
    for cr in target_rotations:
        prod *= 1.0 - g1(cr).value
    return (2.0 / 3.0) ** M * prod


def mway_ep_scaled(target_rotations: list[ConditionalRotation]) -> float:
    """Entangling power divided by its maximum (2/3)^M, i.e. prod (1 - G1_k)."""
    if not target_rotations:
        raise ValueError("no target rotations: need at least one nucleus")
    prod = 1.0
    for cr in target_rotations:
        prod *= 1.0 - g1(cr).value
    return clamp01(prod, what="ep_scaled")


# ---------------------------------------------------------------------------
# Pure-state M-tangles


def _check_state(state: np.ndarray, M: int) -> np.ndarray:
    state = np.asarray(state, dtype=complex).ravel()
    if M < 2:
        raise ValueError("M-tangles need at least 2 qubits")
    if state.size != 2**M:
        raise ValueError(f"state length {state.size} does not match M = {M}")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"state is not normalized (norm = {norm:.12g})")
    return state


def _popcount_signs(M: int) -> np.ndarray:
    """(-1)^(M - popcount(index)) for all 2^M basis indices."""
    pop = np.zeros(2**M, dtype=np.int64)
    for bit in range(M):
        pop += (np.arange(2**M) >> bit) & 1
    return np.where((M - pop) % 2 == 0, 1.0, -1.0)


def spin_flip_overlap(state: np.ndarray, M: int) -> complex:
    """<psi| sigma_y^(x M) |psi*> via the bit-reversal identity."""
    signs = _popcount_signs(M)
    conj = state.conj()
    return complex((1j) ** M * np.sum(conj * signs * conj[::-1]))


def _concurrence(rho: np.ndarray) -> float:
    """Two-qubit concurrence max(0, l1 - l2 - l3 - l4) of a density matrix."""
    sy2 = np.array(
        [
            [0, 0, 0, -1],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
            [-1, 0, 0, 0],
        ],
        dtype=complex,
    )
    R = rho @ sy2 @ rho.conj() @ sy2
    evals = np.linalg.eigvals(R).real
    evals = np.sqrt(np.clip(evals, 0.0, None))
    evals.sort()
    return max(0.0, evals[-1] - evals[-2::-1].sum())


def _three_tangle_ckw(state: np.ndarray) -> float:
    """CKW three-tangle tau_{BC|A} - C_AB^2 - C_AC^2."""
    psi = state.reshape(2, 2, 2)
    rho_a = np.einsum("ijk,ljk->il", psi, psi.conj())
    tau_bc_a = 2.0 * (1.0 - np.trace(rho_a @ rho_a).real)
    rho_ab = np.einsum("ijk,lmk->ijlm", psi, psi.conj()).reshape(4, 4)
    rho_ac = np.einsum("ijk,ljm->iklm", psi, psi.conj()).reshape(4, 4)
    tau = tau_bc_a - _concurrence(rho_ab) ** 2 - _concurrence(rho_ac) ** 2
    return clamp01(tau, tol=1e-10, what="three-tangle")


def _odd_tangle_cr(state: np.ndarray, M: int) -> float:
    """Odd-M tangle 2 sum_{ab} |m_ab|^2 with m_ab = <psi|E_ab x sy^(M-1)|psi*>.

    Valid only for states generated by conditional-rotation evolutions.
    """
    conj = state.conj().reshape(2, 2 ** (M - 1))
    signs = _popcount_signs(M - 1)
    # sigma_y^(x(M-1)) acting on the conjugate within each electron block
    flipped = (1j) ** (M - 1) * signs * conj[:, ::-1]
    m = conj @ flipped.T  # m[a, b] = <psi|(|a><b| x sy^(M-1))|psi*>
    return clamp01(2.0 * float(np.sum(np.abs(m) ** 2)), tol=1e-10, what="odd M-tangle")


def mtangle_pure(state: np.ndarray, M: int, cr_generated: bool = False) -> float:
    """M-tangle of a normalized 2^M pure state.

    Even M uses the spin-flip overlap |<psi|sigma_y^(x M)|psi*>|^2; M = 3 uses
    the CKW combination (valid for any 3-qubit state); odd M > 3 uses a
    projector-derived form that holds only for conditional-rotation-generated
    states, so cr_generated must be set.

    Args:
        state: 2^M complex amplitudes, norm 1 within 1e-9.
        M: number of qubits.
        cr_generated: assert the state came from a CR-type evolution.

    Raises:
        ValueError: bad shape/normalization, or odd M > 3 without the flag.
    """
    state = _check_state(state, M)
    if M == 3:
        return _three_tangle_ckw(state)
    if M % 2 == 0:
        tau = abs(spin_flip_overlap(state, M)) ** 2
        return clamp01(tau, tol=1e-10, what="M-tangle")
    if not cr_generated:
        raise ValueError(
            "odd-M tangles (M > 3) are only valid for CR-generated states; pass cr_generated=True"
        )
    return _odd_tangle_cr(state, M)


# ---------------------------------------------------------------------------
# Kraus factors of the spectator-trace channel


@dataclass(frozen=True)
class KrausFactorSet:
    """Per-spin overlaps of the channel obtained by tracing out spectators.

    For each unwanted spin l and electron branch j: a[l][j] = <0|R_nj|0> and
    b[l][j] = <1|R_nj|0>, so |a|^2 + |b|^2 = 1. g is the factorized
    cross-overlap prod_l <0|R_n0^dag R_n1|0> entering every closed form.
    """

    a: tuple[tuple[complex, complex], ...]
    b: tuple[tuple[complex, complex], ...]
    g: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(tuple(p) for p in self.a))
        object.__setattr__(self, "b", tuple(tuple(p) for p in self.b))
        g = 1.0 + 0.0j
        for (a0, a1), (b0, b1) in zip(self.a, self.b):
            for j, (aj, bj) in enumerate(((a0, b0), (a1, b1))):
                dev = abs(abs(aj) ** 2 + abs(bj) ** 2 - 1.0)
                if dev > CLAMP_TOL:
                    raise InvariantViolation(
                        f"branch-{j} overlap pair violates |a|^2+|b|^2=1 by {dev:g}"
                    )
            g *= np.conj(a0) * a1 + np.conj(b0) * b1
        object.__setattr__(self, "g", complex(g))

    @property
    def n_spins(self) -> int:
        return len(self.a)

    def enumerated(self, cap: int = 20) -> tuple[np.ndarray, np.ndarray]:
        """All 2^n factors (f0, f1); bit r of the index selects a/b of spin r.

        Spin 0 occupies the most significant bit. Raises ValueError beyond
        cap spins (use the factorized g instead).
        """
        n = self.n_spins
        if n > cap:
            raise ValueError(
                f"enumeration over 2^{n} Kraus indices exceeds cap {cap}; "
                "use the factorized cross-overlap g"
            )
        f0 = np.ones(1, dtype=complex)
        f1 = np.ones(1, dtype=complex)
        for (a0, a1), (b0, b1) in zip(self.a, self.b):
            f0 = np.concatenate([f0 * a0, f0 * b0])
            f1 = np.concatenate([f1 * a1, f1 * b1])
        for j, f in ((0, f0), (1, f1)):
            total = float(np.sum(np.abs(f) ** 2))
            if abs(total - 1.0) > 1e-10:
                raise InvariantViolation(
                    f"Kraus completeness sum for branch {j} is {total:.12g}, not 1"
                )
        return f0, f1


def kraus_factors(unwanted_rotations: list[ConditionalRotation]) -> KrausFactorSet:
    """Overlap factors a_j = <0|R_nj|0>, b_j = <1|R_nj|0> per unwanted spin.

    An empty list yields the identity channel (single Kraus operator, g = 1).
    """
    a = []
    b = []
    for cr in unwanted_rotations:
        r0, r1 = cr.r0, cr.r1
        a.append((complex(r0[0, 0]), complex(r1[0, 0])))
        b.append((complex(r0[1, 0]), complex(r1[1, 0])))
    return KrausFactorSet(tuple(a), tuple(b))


def mway_ep_nonunitary(
    target_rotations: list[ConditionalRotation],
    unwanted_rotations: list[ConditionalRotation],
) -> float:
    """Entangling power of the channel after tracing out unwanted spins.

    Equals the unitary value times (1 + |g|^2)/2, where g collapses the
    enumerated Kraus double sum through completeness. Always <= the unitary
    value, with equality iff every unwanted spin rotates unconditionally.
    """
    ep_u = mway_ep_unitary(target_rotations)
    g = kraus_factors(unwanted_rotations).g
    return ep_u * (1.0 + abs(g) ** 2) / 2.0


# ---------------------------------------------------------------------------
# Gate error


@dataclass(frozen=True)
class GateErrorReport:
    """Average-gate-infidelity of the spectator-trace channel vs the ideal."""

    infidelity: float
    target_unitary_dim: int

    def __post_init__(self):
        object.__setattr__(self, "infidelity", clamp01(self.infidelity, what="infidelity"))


def cr_unitary(rotations: list[ConditionalRotation]) -> np.ndarray:
    """Conditional-rotation unitary sum_j |j><j| (x) prod_l R_nj^(l), dim 2^M."""
    if not rotations:
        raise ValueError("need at least one rotation")
    k0 = reduce(np.kron, [cr.r0 for cr in rotations])
    k1 = reduce(np.kron, [cr.r1 for cr in rotations])
    dim = k0.shape[0]
    out = np.zeros((2 * dim, 2 * dim), dtype=complex)
    out[:dim, :dim] = k0
    out[dim:, dim:] = k1
    return out


def gate_error(
    target_rotations: list[ConditionalRotation],
    unwanted_rotations: list[ConditionalRotation],
    ideal: np.ndarray | None = None,
) -> GateErrorReport:
    """Average gate infidelity of the traced-out channel against ideal.

    F = (sum_k |Tr[ideal^dag E_k]|^2 + d)/(d^2 + d) with d = 2^M; the Kraus
    sum factorizes over unwanted spins into |c0|^2 + |c1|^2 + 2 Re[c0* c1 g]
    with c_j = Tr[ideal^dag (|j><j| (x) prod R_nj)]. When ideal is omitted it
    defaults to the conditional-rotation unitary built from target_rotations,
    for which c0 = c1 = 2^(M-1).

    Raises:
        ValueError: empty target list or ideal dimension mismatch.
    """
    if not target_rotations:
        raise ValueError("no target rotations: need at least one nucleus")
    M = len(target_rotations) + 1
    d = 2**M
    if ideal is None:
        c0 = c1 = float(2 ** (M - 1))
    else:
        ideal = np.asarray(ideal, dtype=complex)
        if ideal.shape != (d, d):
            raise ValueError(f"ideal must be {d}x{d} for M = {M}, got {ideal.shape}")
        half = d // 2
        k0 = reduce(np.kron, [cr.r0 for cr in target_rotations])
        k1 = reduce(np.kron, [cr.r1 for cr in target_rotations])
        c0 = np.trace(ideal[:half, :half].conj().T @ k0)
        c1 = np.trace(ideal[half:, half:].conj().T @ k1)
    g = kraus_factors(unwanted_rotations).g
    total = abs(c0) ** 2 + abs(c1) ** 2 + 2.0 * (np.conj(c0) * c1 * g).real
    fidelity = (total + d) / (d * d + d)
    return GateErrorReport(infidelity=1.0 - fidelity, target_unitary_dim=d)


# ---------------------------------------------------------------------------
# Aggregate report


@dataclass(frozen=True)
class EntanglingPowerReport:
    """Unitary/non-unitary M-way entangling power plus per-target one-tangles."""

    ep_unitary: float
    ep_nonunitary: float
    ep_scaled: float
    per_spin_one_tangles: dict[str, float]

    def __post_init__(self):
        M = len(self.per_spin_one_tangles) + 1
        cap = (2.0 / 3.0) ** M
        if not (-CLAMP_TOL <= self.ep_nonunitary <= self.ep_unitary + CLAMP_TOL):
            raise InvariantViolation("ep_nonunitary must lie in [0, ep_unitary]")
        if self.ep_unitary > cap + CLAMP_TOL:
            raise InvariantViolation(f"ep_unitary exceeds (2/3)^{M}")
        object.__setattr__(self, "ep_scaled", clamp01(self.ep_scaled, what="ep_scaled"))
        for label, val in self.per_spin_one_tangles.items():
            if not (-CLAMP_TOL <= val <= MAX_ONE_TANGLE + CLAMP_TOL):
                raise InvariantViolation(f"one-tangle of {label} outside [0, 2/9]")


@dataclass(frozen=True)
class MetricsReport:
    """Everything a search case records about one composed sequence plan."""

    ep: EntanglingPowerReport
    target_one_tangles_scaled: dict[str, float]
    unwanted_one_tangles_scaled: dict[str, float]
    total_time: float

    def flat(self) -> dict:
        """Flat JSON-ready mapping mirroring the field names."""
        return {
            "ep_unitary": self.ep.ep_unitary,
            "ep_nonunitary": self.ep.ep_nonunitary,
            "ep_scaled": self.ep.ep_scaled,
            "per_spin_one_tangles": dict(self.ep.per_spin_one_tangles),
            "target_one_tangles_scaled": dict(self.target_one_tangles_scaled),
            "unwanted_one_tangles_scaled": dict(self.unwanted_one_tangles_scaled),
            "total_time_us": self.total_time * 1e6,
        }


def metrics_from_rotations(
    rotations: dict[str, ConditionalRotation],
    target_labels: list[str],
    total_time: float,
    register_order,
) -> MetricsReport:
    """Assemble the metric report from already-composed rotations.

    target_labels picks the M-1 target nuclei; every other spin in
    register_order counts as unwanted.
    """
    if not target_labels:
        raise ValueError("target_labels must name at least one spin")
    if len(set(target_labels)) != len(target_labels):
        raise ValueError("target_labels contains duplicates")
    missing = set(target_labels) - set(rotations)
    if missing:
        raise ValueError(f"target labels not in register: {sorted(missing)}")

    target_set = set(target_labels)
    targets = [rotations[l] for l in target_labels]
    unwanted_labels = [l for l in register_order if l not in target_set]
    unwanted = [rotations[l] for l in unwanted_labels]

    ep = EntanglingPowerReport(
        ep_unitary=mway_ep_unitary(targets),
        ep_nonunitary=mway_ep_nonunitary(targets, unwanted),
        ep_scaled=mway_ep_scaled(targets),
        per_spin_one_tangles={l: one_tangle(g1(rotations[l])) for l in target_labels},
    )
    return MetricsReport(
        ep=ep,
        target_one_tangles_scaled={l: one_tangle_scaled(g1(rotations[l])) for l in target_labels},
        unwanted_one_tangles_scaled={l: one_tangle_scaled(g1(rotations[l])) for l in unwanted_labels},
        total_time=total_time,
    )


def compute_metrics(register: Register, plan: SequencePlan, target_labels: list[str]) -> MetricsReport:
    """Compose the plan for every spin and assemble the full metric report.

    This is the single evaluation path shared by the searches and the CLI,
    so archived numbers are reproducible from the plan alone.
    """
    rotations = {s.label: compose_sequence(s, register, plan) for s in register.spins}
    return metrics_from_rotations(rotations, target_labels, plan.total_time, register.labels)
