"""Rank-2 mixed-state analysis of the target subspace.

Tracing spectator nuclei out of a conditional-rotation evolution leaves the
electron + target subsystem in a rank-2 state. Its eigendecomposition has a
closed form: the electron 2x2 coherence is damped by a single environment
factor f01, and both eigenvectors are the electron eigenvectors re-dressed
by the target gate. The convex-roof three-tangle of that state is then
estimated by minimizing over the relative phase chi of the rank-2 trial
state sqrt(l+) |v+> - e^(i chi) sqrt(l-) |v->, followed by a convex hull
over the eigenvalue weight p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .metrics import clamp01, mtangle_pure
from .oracle import apply_cr_state
from .spinmodel import ConditionalRotation

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ReducedDecomposition:
    """Eigendecomposition of the rank-2 electron + target reduced state."""

    lambda_plus: float
    lambda_minus: float
    v_plus: np.ndarray
    v_minus: np.ndarray
    f01: complex

    def __post_init__(self):
        lp, lm = self.lambda_plus, self.lambda_minus
        if abs(lp + lm - 1.0) > 1e-12:
            raise InvariantViolation(f"eigenvalues sum to {lp + lm!r}, not 1")
        if lm < -1e-12 or lp < lm:
            raise InvariantViolation("eigenvalues must satisfy l+ >= l- >= 0")
        vp = np.asarray(self.v_plus, dtype=complex).ravel()
        vm = np.asarray(self.v_minus, dtype=complex).ravel()
        object.__setattr__(self, "v_plus", vp)
        object.__setattr__(self, "v_minus", vm)
        for name, v in (("v_plus", vp), ("v_minus", vm)):
            if abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise InvariantViolation(f"{name} is not normalized")
        if abs(np.vdot(vp, vm)) > 1e-10:
            raise InvariantViolation("eigenvectors are not orthogonal")

    def density_matrix(self) -> np.ndarray:
        """lambda+ |v+><v+| + lambda- |v-><v-|, rank <= 2 by construction."""
        return self.lambda_plus * np.outer(self.v_plus, self.v_plus.conj()) + (
            self.lambda_minus * np.outer(self.v_minus, self.v_minus.conj())
        )


def environment_factor(
    unwanted_rotations: list[ConditionalRotation], unwanted_initials=None
) -> complex:
    """f01 = prod_l Tr[R_n0^(l) rho_l R_n1^(l)^dag] over the traced-out spins."""
    if unwanted_initials is None:
        unwanted_initials = [np.array([1.0, 0.0])] * len(unwanted_rotations)
    if len(unwanted_initials) != len(unwanted_rotations):
        raise ValueError("one initial state per unwanted rotation required")
    f01 = 1.0 + 0.0j
    for cr, init in zip(unwanted_rotations, unwanted_initials):
        v = np.asarray(init, dtype=complex).ravel()
        if v.size != 2:
            raise ValueError("unwanted initial states must be single-qubit vectors")
        n = np.linalg.norm(v)
        if abs(n - 1.0) > 1e-9:
            raise ValueError("unwanted initial states must be normalized")
        v = v / n
        rho = np.outer(v, v.conj())
        f01 *= np.trace(cr.r0 @ rho @ cr.r1.conj().T)
    return complex(f01)


def reduced_decomposition(
    electron_amps,
    target_rotations: list[ConditionalRotation],
    unwanted_rotations: list[ConditionalRotation],
    unwanted_initials=None,
    target_initials=None,
) -> ReducedDecomposition:
    """Closed-form eigendecomposition after tracing out the unwanted spins.

    The electron starts in alpha|0> + beta|1>, targets and unwanted spins in
    product states (|0> each by default). The reduced state of electron +
    targets is the target CR gate applied to (2x2 electron matrix with the
    coherence damped by f01) (x) |target init>, so its eigenvalues are

        l(+-) = (1 +- sqrt((|a|^2-|b|^2)^2 + 4 |a|^2 |b|^2 |f01|^2)) / 2

    and the eigenvectors are the electron-space eigenvectors re-dressed by
    the gate. Degenerate branches: beta = 0 gives the pure product state;
    a vanishing damped coherence picks the computational electron basis
    ordered by weight.
    """
    alpha, beta = (complex(x) for x in electron_amps)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-9:
        raise ValueError("electron amplitudes must be normalized")
    if not target_rotations:
        raise ValueError("need at least one target rotation")
    n_targets = len(target_rotations)
    if target_initials is None:
        target_initials = [np.array([1.0, 0.0])] * n_targets
    if len(target_initials) != n_targets:
        raise ValueError("one initial state per target rotation required")
    psi_t = np.ones(1, dtype=complex)
    for init in target_initials:
        v = np.asarray(init, dtype=complex).ravel()
        if v.size != 2 or abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValueError("target initial states must be normalized single-qubit vectors")
        psi_t = np.kron(psi_t, v)

    f01 = environment_factor(unwanted_rotations, unwanted_initials)
    p = abs(alpha) ** 2
    q = abs(beta) ** 2
    c = alpha * np.conj(beta) * f01  # damped electron coherence <0|rho_e|1>
    gap = math.sqrt((p - q) ** 2 + 4.0 * abs(c) ** 2)
    lam_plus = clamp01((1.0 + gap) / 2.0, what="lambda_plus")
    lam_minus = 1.0 - lam_plus

    if abs(c) < 1e-15:
        # degenerate coherence: computational basis ordered by weight
        if p >= q:
            u_plus = np.array([1.0, 0.0], dtype=complex)
            u_minus = np.array([0.0, 1.0], dtype=complex)
        else:
            u_plus = np.array([0.0, 1.0], dtype=complex)
            u_minus = np.array([1.0, 0.0], dtype=complex)
    else:
        u_plus = np.array([c, lam_plus - p], dtype=complex)
        u_plus /= np.linalg.norm(u_plus)
        u_minus = np.array([-np.conj(u_plus[1]), np.conj(u_plus[0])], dtype=complex)

    def dress(u: np.ndarray) -> np.ndarray:
        return apply_cr_state(target_rotations, np.kron(u, psi_t))

    return ReducedDecomposition(
        lambda_plus=lam_plus,
        lambda_minus=lam_minus,
        v_plus=dress(u_plus),
        v_minus=dress(u_minus),
        f01=f01,
    )


# ---------------------------------------------------------------------------
# Trial-state minimization over the relative phase


def _golden_section(f, a: float, b: float, tol: float = 1e-9) -> tuple[float, float]:
    """Minimum of a unimodal f on [a, b]."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    x = (a + b) / 2.0
    return x, f(x)


def _minimize_phase(f, chi_resolution: int) -> tuple[float, float]:
    """Coarse scan over [0, 2 pi) plus golden-section refinement."""
    if chi_resolution < 4:
        raise ValueError("chi_resolution must be at least 4")
    chis = np.linspace(0.0, 2.0 * math.pi, chi_resolution, endpoint=False)
    vals = np.array([f(c) for c in chis])
    best = int(np.argmin(vals))
    step = 2.0 * math.pi / chi_resolution
    chi, val = _golden_section(f, chis[best] - step, chis[best] + step)
    if vals[best] < val:
        chi, val = float(chis[best]), float(vals[best])
    return float(chi % (2.0 * math.pi)), float(val)


def trial_state_minimize(dec: ReducedDecomposition, chi_resolution: int = 720) -> tuple[float, float]:
    """Minimum three-tangle of sqrt(l+)|v+> - e^(i chi) sqrt(l-)|v-> over chi.

    Only three-qubit target subspaces are supported. Rank-1 decompositions
    return the three-tangle of v+ directly.

    Returns:
        (tau_min, chi_argmin).
    """
    if dec.v_plus.size != 8:
        raise ValueError("trial-state minimization is implemented for 3 target qubits only")
    if dec.lambda_minus < 1e-15:
        return mtangle_pure(dec.v_plus, 3), 0.0
    sp = math.sqrt(dec.lambda_plus)
    sm = math.sqrt(dec.lambda_minus)

    def tau(chi: float) -> float:
        state = sp * dec.v_plus - np.exp(1j * chi) * sm * dec.v_minus
        return mtangle_pure(state, 3)

    chi, val = _minimize_phase(tau, chi_resolution)
    return val, chi


def convex_hull(p_grid, tau_min) -> np.ndarray:
    """Lower convex envelope of (p, tau) samples, evaluated on p_grid.

    Monotone-chain construction over the sample points; fewer than two
    points pass through unchanged.
    """
    p = np.asarray(p_grid, dtype=float)
    tau = np.asarray(tau_min, dtype=float)
    if p.shape != tau.shape or p.ndim != 1:
        raise ValueError("p_grid and tau_min must be 1-d arrays of equal length")
    if np.any(np.diff(p) <= 0):
        raise ValueError("p_grid must be strictly ascending")
    if p.size < 2:
        return tau.copy()
    hull: list[tuple[float, float]] = []
    for x, y in zip(p, tau):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) <= 0.0:
                hull.pop()
            else:
                break
        hull.append((float(x), float(y)))
    hx = np.array([h[0] for h in hull])
    hy = np.array([h[1] for h in hull])
    return np.interp(p, hx, hy)


@dataclass(frozen=True)
class ConvexRoofResult:
    """Per-p trial-state minima, their convex hull, and the optimal phases."""

    p_grid: np.ndarray
    tau_min: np.ndarray
    tau_hull: np.ndarray
    chi_argmin: np.ndarray

    def rows(self):
        """CSV rows (p, tau_min, tau_hull, chi_argmin)."""
        return zip(self.p_grid, self.tau_min, self.tau_hull, self.chi_argmin)


def convex_roof_curve(
    v_plus: np.ndarray,
    v_minus: np.ndarray,
    p_grid,
    chi_resolution: int = 720,
) -> ConvexRoofResult:
    """Sweep the eigenvalue weight p for fixed eigenvectors.

    For each p the rank-2 trial state sqrt(p)|v+> - e^(i chi) sqrt(1-p)|v->
    is minimized over chi; the convex hull over p then lower-bounds the
    convex-roof three-tangle of the mixture p|v+><v+| + (1-p)|v-><v-|.
    """
    v_plus = np.asarray(v_plus, dtype=complex).ravel()
    v_minus = np.asarray(v_minus, dtype=complex).ravel()
    if v_plus.size != 8 or v_minus.size != 8:
        raise ValueError("convex roofs are implemented for 3 target qubits only")
    p = np.asarray(p_grid, dtype=float)
    taus = np.empty(p.size)
    chis = np.empty(p.size)
    for i, pi in enumerate(p):
        if not 0.0 <= pi <= 1.0:
            raise ValueError("p values must lie in [0, 1]")
        sp, sm = math.sqrt(pi), math.sqrt(1.0 - pi)

        def tau(chi: float) -> float:
            state = sp * v_plus - np.exp(1j * chi) * sm * v_minus
            norm = np.linalg.norm(state)
            return mtangle_pure(state / norm, 3) if norm > 1e-12 else 0.0

        if pi < 1e-15:
            taus[i], chis[i] = mtangle_pure(v_minus, 3), 0.0
        elif pi > 1.0 - 1e-15:
            taus[i], chis[i] = mtangle_pure(v_plus, 3), 0.0
        else:
            chis[i], taus[i] = _minimize_phase(tau, chi_resolution)
    return ConvexRoofResult(
        p_grid=p, tau_min=taus, tau_hull=convex_hull(p, taus), chi_argmin=chis
    )


def bell_mixture_concurrence(p_grid, chi_resolution: int = 720) -> np.ndarray:
    """Minimum concurrence of sqrt(p)|Phi+> + e^(i chi) sqrt(1-p)|Phi-> per p.

    The known closed form is 2 |p - 1/2|; this scans chi numerically as the
    benchmark of the trial-state method.
    """
    phi_plus = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
    phi_minus = np.array([1.0, 0.0, 0.0, -1.0], dtype=complex) / math.sqrt(2.0)
    out = np.empty(len(p_grid))
    for i, p in enumerate(np.asarray(p_grid, dtype=float)):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p values must lie in [0, 1]")
        sp, sm = math.sqrt(p), math.sqrt(1.0 - p)

        def conc(chi: float) -> float:
            state = sp * phi_plus + np.exp(1j * chi) * sm * phi_minus
            psi = state.reshape(2, 2)
            rho_a = psi @ psi.conj().T
            purity = np.trace(rho_a @ rho_a).real
            return math.sqrt(max(0.0, 2.0 * (1.0 - purity)))

        _, out[i] = _minimize_phase(conc, chi_resolution)
    return out


# ---------------------------------------------------------------------------
# Initial product-state search


def _bloch_state(theta: float, gamma: float) -> np.ndarray:
    return np.array([math.cos(theta / 2.0), np.exp(1j * gamma) * math.sin(theta / 2.0)])


def initial_state_search(
    target_rotations: list[ConditionalRotation],
    threshold: float = 0.95,
    theta_step: float = 0.05 * math.pi,
    gamma_step: float = 0.1 * math.pi,
) -> tuple[np.ndarray, float]:
    """Product input maximizing the three-tangle after the conditional gate.

    Tries |+>|0>|0> first and keeps it when the resulting three-tangle
    reaches the threshold. Otherwise each qubit's (theta, gamma) Bloch grid
    is searched independently: for CR evolutions the three-tangle of a
    product input factorizes into per-qubit terms, so the separable grid
    search is exact at the grid resolution. The winner's tangle is
    recomputed from the full evolved state.

    Returns:
        (initial 3-qubit product state, three-tangle achieved).
    """
    if len(target_rotations) != 2:
        raise ValueError("initial-state search is implemented for 3 qubits (2 targets)")

    def tangle_of(initial: np.ndarray) -> float:
        return mtangle_pure(apply_cr_state(target_rotations, initial), 3)

    default = np.kron(
        np.array([1.0, 1.0]) / math.sqrt(2.0), np.array([1.0, 0.0, 0.0, 0.0])
    ).astype(complex)
    tau_default = tangle_of(default)
    if tau_default >= threshold:
        return default, tau_default

    thetas = np.arange(0.0, math.pi + theta_step / 2.0, theta_step)
    gammas = np.arange(0.0, 2.0 * math.pi - gamma_step / 2.0, gamma_step)

    # tau3 = 4 |e0 e1|^2 prod_l |w01^(l)|^2 for product inputs, so each
    # factor is maximized on its own grid
    best_qubits = []
    for cr in target_rotations:
        best = (-1.0, 0.0, 0.0)
        for th in thetas:
            for ga in gammas:
                v = _bloch_state(th, ga)
                w = (cr.r0 @ v).conj() @ (np.array([[0, -1j], [1j, 0]]) @ (cr.r1 @ v).conj())
                val = abs(w) ** 2
                if val > best[0] + 1e-15:
                    best = (val, th, ga)
        best_qubits.append(_bloch_state(best[1], best[2]))
    best_electron = (-1.0, 0.0, 0.0)
    for th in thetas:
        e = _bloch_state(th, 0.0)
        val = 4.0 * (abs(e[0]) * abs(e[1])) ** 2
        if val > best_electron[0] + 1e-15:
            best_electron = (val, th, 0.0)
    electron = _bloch_state(best_electron[1], best_electron[2])
    candidate = np.kron(electron, np.kron(best_qubits[0], best_qubits[1]))
    tau_candidate = tangle_of(candidate)
    if tau_default >= tau_candidate:
        return default, tau_default
    return candidate, tau_candidate
