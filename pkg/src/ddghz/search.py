"""Sequential and multi-spin sequence searches over a nuclear register.

Both schemes share the same skeleton: locate per-spin resonances, scan unit
times on a fine grid around each, pick iteration counts at local maxima of
the one-tangle, then assemble and filter composite cases against four
tolerances (total gate time, per-target one-tangle, per-unwanted one-tangle,
gate error). The heavy inner loops run on closed-form angle iteration
(G1 of the N-th power follows from one unit's angles and axis dot product),
so no matrix is ever powered inside a scan.

The oracle module re-runs the same definitions with naive matrix arithmetic
and exhaustive enumeration; search output must match it exactly on small
registers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .metrics import (
    GateErrorReport,
    MetricsReport,
    gate_error,
    metrics_from_rotations,
)
from .spinmodel import (
    NuclearSpin,
    Register,
    SequenceBlock,
    SequencePlan,
    SequenceUnit,
    compose_sequence,
    scan_resonances,
    unit_propagators,
)

DEFAULT_RANK_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

# GHZ size -> (gate time tol us, gate error tol, target tol, unwanted tol)
SEQUENTIAL_TOLERANCE_TABLE = {
    3: (2000.0, 0.10, 0.99, 0.10),
    4: (2000.0, 0.10, 0.99, 0.10),
    5: (2300.0, 0.10, 0.90, 0.10),
    6: (2500.0, 0.11, 0.90, 0.12),
    7: (3300.0, 0.12, 0.90, 0.12),
    8: (3700.0, 0.13, 0.90, 0.12),
    9: (4000.0, 0.13, 0.85, 0.15),
    10: (4000.0, 0.19, 0.87, 0.22),
}
MULTISPIN_TOLERANCE_TABLE = {
    3: (2000.0, 0.10, 0.90, 0.10),
    4: (2000.0, 0.10, 0.90, 0.10),
    5: (2300.0, 0.10, 0.84, 0.10),
    6: (2500.0, 0.13, 0.88, 0.12),
    7: (2800.0, 0.13, 0.85, 0.15),
    8: (3000.0, 0.15, 0.85, 0.15),
    9: (3000.0, 0.15, 0.82, 0.15),
}


@dataclass(frozen=True)
class SearchTolerances:
    """All knobs of one search run.

    The first six fields follow the per-GHZ-size tolerance tables; the rest
    bound the enumeration (counts of kept maxima, kept unit times, options
    per spin in cross products, total combinations per subset, beam width
    for large subsets). N_truncation = 0 means iterations are limited only
    by gate_time_tol / t.
    """

    ghz_size: int
    gate_time_tol: float
    gate_error_tol: float
    target_one_tangle_tol: float
    unwanted_one_tangle_tol: float
    k_max: int
    t_window: float = 0.25e-6
    t_step: float = 10e-9
    N_truncation: int = 0
    n_maxima: int = 30
    t_keep: int = 50
    enumeration_options: int = 12
    combo_cap: int = 40000
    beam_width: int = 500

    def __post_init__(self):
        if self.ghz_size < 3:
            raise ConfigError("ghz_size must be >= 3")
        if self.gate_time_tol <= 0:
            raise ConfigError("gate_time_tol must be positive")
        for name in ("gate_error_tol", "target_one_tangle_tol", "unwanted_one_tangle_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if self.t_window <= 0 or self.t_step <= 0:
            raise ConfigError("t_window and t_step must be positive")
        if self.N_truncation < 0:
            raise ConfigError("N_truncation must be >= 0")
        for name in ("n_maxima", "t_keep", "enumeration_options", "combo_cap", "beam_width"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    @classmethod
    def sequential_defaults(cls, ghz_size: int, **overrides) -> "SearchTolerances":
        if ghz_size not in SEQUENTIAL_TOLERANCE_TABLE:
            raise ConfigError(f"no sequential tolerance row for GHZ size {ghz_size}")
        t_us, err, tgt, unw = SEQUENTIAL_TOLERANCE_TABLE[ghz_size]
        base = dict(
            ghz_size=ghz_size,
            gate_time_tol=t_us * 1e-6,
            gate_error_tol=err,
            target_one_tangle_tol=tgt,
            unwanted_one_tangle_tol=unw,
            k_max=6,
        )
        base.update(overrides)
        return cls(**base)

    @classmethod
    def multispin_defaults(cls, ghz_size: int, **overrides) -> "SearchTolerances":
        if ghz_size not in MULTISPIN_TOLERANCE_TABLE:
            raise ConfigError(f"no multi-spin tolerance row for GHZ size {ghz_size}")
        t_us, err, tgt, unw = MULTISPIN_TOLERANCE_TABLE[ghz_size]
        base = dict(
            ghz_size=ghz_size,
            gate_time_tol=t_us * 1e-6,
            gate_error_tol=err,
            target_one_tangle_tol=tgt,
            unwanted_one_tangle_tol=unw,
            k_max=3,
        )
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class Candidate:
    """One (t, N) block option for a spin, with its own scaled one-tangle."""

    t: float
    N: int
    tangle: float


@dataclass(frozen=True)
class Case:
    """One accepted composite sequence with its metrics and score."""

    scheme: str
    spin_labels: tuple[str, ...]
    plan: SequencePlan
    metrics: MetricsReport
    error: GateErrorReport
    rank_score: float
    tolerances: SearchTolerances

    @property
    def total_time(self) -> float:
        return self.plan.total_time


# ---------------------------------------------------------------------------
# Closed-form scan primitives


def unit_branch_params(
    spin: NuclearSpin, register: Register, unit: SequenceUnit, ts: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(phi0, phi1, n0.n1) of one pulse unit for every unit time in ts.

    Angles are the raw 2*atan2 values in [0, 2*pi]; no axis canonicalization
    is applied since iterated G1 is invariant under the sign flips.
    """
    ts = np.asarray(ts, dtype=float)
    wl = register.omega_larmor
    wz = wl + spin.A
    w1 = math.hypot(spin.B, wz)
    ax1 = np.array([spin.B / w1, 0.0, wz / w1]) if w1 > 0 else np.array([0.0, 0.0, 1.0])
    ax0 = np.array([0.0, 0.0, 1.0])

    bounds = np.concatenate(([0.0], unit.pulse_fractions, [1.0]))
    fracs = np.diff(bounds)

    def seg(rate: float, axis: np.ndarray, tau: np.ndarray) -> np.ndarray:
        half = 0.5 * rate * tau
        c = np.cos(half)
        s = np.sin(half)
        m = np.empty(ts.shape + (2, 2), dtype=complex)
        m[..., 0, 0] = c - 1j * s * axis[2]
        m[..., 0, 1] = -1j * s * (axis[0] - 1j * axis[1])
        m[..., 1, 0] = -1j * s * (axis[0] + 1j * axis[1])
        m[..., 1, 1] = c + 1j * s * axis[2]
        return m

    def branch(start: int) -> np.ndarray:
        V = np.broadcast_to(np.eye(2, dtype=complex), ts.shape + (2, 2)).copy()
        state = start
        for f in fracs:
            tau = f * ts
            m = seg(w1, ax1, tau) if state else seg(wl, ax0, tau)
            V = m @ V
            state ^= 1
        return V

    V0 = branch(0)
    V1 = branch(1)

    def angles_axes(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c = (V[..., 0, 0] + V[..., 1, 1]).real / 2.0
        vec = np.stack(
            [
                (1j * (V[..., 0, 1] + V[..., 1, 0])).real / 2.0,
                (V[..., 1, 0] - V[..., 0, 1]).real / 2.0,
                (1j * (V[..., 0, 0] - V[..., 1, 1])).real / 2.0,
            ],
            axis=-1,
        )
        s = np.linalg.norm(vec, axis=-1)
        phi = 2.0 * np.arctan2(s, c)
        safe = np.where(s > 1e-15, s, 1.0)
        n = vec / safe[..., None]
        n[s <= 1e-15] = (0.0, 0.0, 1.0)
        return phi, n

    phi0, n0 = angles_axes(V0)
    phi1, n1 = angles_axes(V1)
    dot = np.sum(n0 * n1, axis=-1)
    return phi0, phi1, dot


def iterated_tangles(
    phi0: np.ndarray, phi1: np.ndarray, dot: np.ndarray, N: np.ndarray
) -> np.ndarray:
    """Scaled one-tangle 1 - G1 of the N-th unit power, broadcast over N.

    Powers of an SU(2) rotation scale the angle, so G1 of V^N follows from
    the single-unit parameters.
    """
    half0 = np.multiply.outer(np.asarray(N, dtype=float), phi0) / 2.0
    half1 = np.multiply.outer(np.asarray(N, dtype=float), phi1) / 2.0
    inner = np.cos(half0) * np.cos(half1) + dot * np.sin(half0) * np.sin(half1)
    return 1.0 - inner**2


def candidate_time_grids(
    spin: NuclearSpin, register: Register, unit: SequenceUnit, tol: SearchTolerances
) -> list[tuple[int, np.ndarray]]:
    """(k, unit-time grid) pairs from the spin's located resonances."""
    seeds = scan_resonances(
        spin, register, unit, tol.k_max, window=tol.t_window, grid_step=tol.t_step
    )
    return [(seed.k, seed.grid) for seed in seeds]


def _n_max(tol: SearchTolerances, t: float) -> int:
    n = int(tol.gate_time_tol / t)
    if tol.N_truncation:
        n = min(n, tol.N_truncation)
    return n


def _local_maxima(tangles: np.ndarray) -> np.ndarray:
    """Indices N (1-based) that are local maxima; N = 0 counts as tangle 0."""
    padded = np.concatenate(([0.0], tangles, [-np.inf]))
    keep = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] > padded[2:])
    return np.nonzero(keep)[0] + 1


def per_spin_candidates(
    register: Register, unit: SequenceUnit, tol: SearchTolerances
) -> dict[str, list[Candidate]]:
    """Single-block (t, N) options per spin, pre-filtered for selectivity.

    For each resonance grid time: iteration counts at local maxima of the
    spin's own scaled one-tangle, best n_maxima per time; per (spin, k) the
    best t_keep unit times survive (ranked by their best option). A kept
    option additionally requires its block duration within gate_time_tol
    and every other spin's scaled one-tangle at (t, N) at most
    unwanted_one_tangle_tol. Spins without options are absent from the map.
    """
    out: dict[str, list[Candidate]] = {}
    for spin in register.spins:
        others = [s for s in register.spins if s.label != spin.label]
        options: list[Candidate] = []
        for _, grid in candidate_time_grids(spin, register, unit, tol):
            grid_arr = np.asarray(grid)
            phi0, phi1, dot = unit_branch_params(spin, register, unit, grid_arr)
            op = [unit_branch_params(s, register, unit, grid_arr) for s in others]
            o_phi0 = np.stack([p[0] for p in op]) if op else np.empty((0, grid_arr.size))
            o_phi1 = np.stack([p[1] for p in op]) if op else np.empty((0, grid_arr.size))
            o_dot = np.stack([p[2] for p in op]) if op else np.empty((0, grid_arr.size))
            per_t_best: list[tuple[float, float, list[Candidate]]] = []
            for i, t in enumerate(grid_arr):
                n_hi = _n_max(tol, float(t))
                if n_hi < 1:
                    continue
                Ns = np.arange(1, n_hi + 1)
                tangles = iterated_tangles(phi0[i], phi1[i], dot[i], Ns).ravel()
                maxima = _local_maxima(tangles)
                if maxima.size == 0:
                    continue
                order = np.lexsort((maxima, -tangles[maxima - 1]))
                kept = maxima[order][: tol.n_maxima]
                if o_phi0.shape[0]:
                    other_tangles = iterated_tangles(o_phi0[:, i], o_phi1[:, i], o_dot[:, i], kept)
                    quiet = other_tangles.max(axis=1) <= tol.unwanted_one_tangle_tol
                else:
                    quiet = np.ones(kept.size, dtype=bool)
                good = [
                    Candidate(float(t), int(N), float(tangles[N - 1]))
                    for N, ok in zip(kept, quiet)
                    if ok
                ]
                if good:
                    per_t_best.append((max(c.tangle for c in good), float(t), good))
            per_t_best.sort(key=lambda e: (-e[0], e[1]))
            for _, _, good in per_t_best[: tol.t_keep]:
                options.extend(good)
        if options:
            options.sort(key=_candidate_order)
            out[spin.label] = options
    return out


def _candidate_order(c: Candidate) -> tuple:
    return (-c.tangle, c.t * c.N, c.t, c.N)


def eligible_targets(
    candidates: dict[str, list[Candidate]], tol: SearchTolerances
) -> dict[str, list[Candidate]]:
    """Spins whose best single-block one-tangle reaches the target tolerance.

    A spin that cannot be driven past target_one_tangle_tol by its own block
    is never selected as a GHZ member.
    """
    return {
        label: opts
        for label, opts in candidates.items()
        if opts and opts[0].tangle >= tol.target_one_tangle_tol
    }


# ---------------------------------------------------------------------------
# Case assembly (shared by staged searches and the brute-force oracle)


def build_case(
    register: Register,
    unit: SequenceUnit,
    tol: SearchTolerances,
    labels: list[str],
    plan: SequencePlan,
    scheme: str,
) -> Case | None:
    """Recompute all metrics from the plan alone and apply the four predicates."""
    rotations = {s.label: compose_sequence(s, register, plan) for s in register.spins}
    report = metrics_from_rotations(rotations, list(labels), plan.total_time, register.labels)
    if plan.total_time > tol.gate_time_tol * (1.0 + 1e-12):
        return None
    if any(v < tol.target_one_tangle_tol for v in report.target_one_tangles_scaled.values()):
        return None
    if any(v > tol.unwanted_one_tangle_tol for v in report.unwanted_one_tangles_scaled.values()):
        return None
    targets = [rotations[l] for l in labels]
    unwanted = [rotations[l] for l in register.labels if l not in set(labels)]
    err = gate_error(targets, unwanted)
    if err.infidelity > tol.gate_error_tol:
        return None
    score = _score(report.ep.ep_scaled, plan.total_time, err.infidelity, tol, DEFAULT_RANK_WEIGHTS)
    return Case(
        scheme=scheme,
        spin_labels=tuple(labels),
        plan=plan,
        metrics=report,
        error=err,
        rank_score=score,
        tolerances=tol,
    )


def _score(ep_scaled, total_time, infidelity, tol, weights) -> float:
    w1, w2, w3 = weights
    return (
        w1 * ep_scaled
        + w2 * (1.0 - total_time / tol.gate_time_tol)
        + w3 * (1.0 - infidelity / tol.gate_error_tol)
    )


def _sort_cases(cases: list[Case]) -> list[Case]:
    cases.sort(key=lambda c: (-c.metrics.ep.ep_scaled, c.plan.total_time, c.spin_labels))
    return cases


# ---------------------------------------------------------------------------
# Sequential scheme


def _subset_iter(labels: list[str], best_tangle: dict[str, float], m: int, tol: SearchTolerances):
    """All m-subsets (register order) exactly for m <= 5, beam-searched above."""
    if m <= 5:
        yield from itertools.combinations(labels, m)
        return
    beams: list[tuple[float, tuple[str, ...]]] = [(1.0, ())]
    for depth in range(m):
        expanded: list[tuple[float, tuple[str, ...]]] = []
        for score, chosen in beams:
            start = labels.index(chosen[-1]) + 1 if chosen else 0
            for label in labels[start:]:
                if len(labels) - labels.index(label) < m - depth:
                    continue
                expanded.append((score * best_tangle[label], chosen + (label,)))
        expanded.sort(key=lambda e: (-e[0], e[1]))
        beams = expanded[: tol.beam_width]
    for _, chosen in beams:
        yield chosen


def _per_subset_options(n_options: int, m: int, tol: SearchTolerances) -> int:
    """Options per spin so the full cross product stays within combo_cap."""
    j = min(n_options, tol.enumeration_options)
    while j > 1 and j**m > tol.combo_cap:
        j -= 1
    return j


def search_sequential(
    register: Register, unit: SequenceUnit, tol: SearchTolerances
) -> list[Case]:
    """Composite search: one block per chosen target spin, blocks in label order.

    For every (M-1)-subset of eligible spins the cross product of per-spin
    block options is scanned in closed form; the combination maximizing the
    product of target one-tangles (ties: shorter total time, then first in
    option order) is evaluated fully and kept if it passes all tolerances.
    """
    if len(register) < tol.ghz_size - 1:
        return []
    candidates = eligible_targets(per_spin_candidates(register, unit, tol), tol)
    labels = [l for l in register.labels if l in candidates]
    m = tol.ghz_size - 1
    if len(labels) < m:
        return []
    best_tangle = {l: candidates[l][0].tangle for l in labels}

    cases: list[Case] = []
    for subset in _subset_iter(labels, best_tangle, m, tol):
        j = _per_subset_options(min(len(candidates[l]) for l in subset), m, tol)
        options = [candidates[l][: min(j, len(candidates[l]))] for l in subset]
        plan_blocks = _best_combo(register, unit, subset, options, tol)
        if plan_blocks is None:
            continue
        plan = SequencePlan(tuple(SequenceBlock(unit, t, N) for t, N in plan_blocks))
        case = build_case(register, unit, tol, list(subset), plan, scheme="sequential")
        if case is not None:
            cases.append(case)
    return _sort_cases(cases)


def _best_combo(
    register: Register,
    unit: SequenceUnit,
    subset: tuple[str, ...],
    options: list[list[Candidate]],
    tol: SearchTolerances,
) -> list[tuple[float, int]] | None:
    """Cross-product argmax of the composite target-tangle product.

    Vectorized over all combinations: per target spin, the block rotations
    of every option of every block position are composed in label order with
    gathered matrix products, then G1 follows from Re tr(R0^dag R1)/2.
    """
    m = len(subset)
    counts = [len(o) for o in options]
    if any(c == 0 for c in counts):
        return None
    idx_grids = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
    idx = [g.ravel() for g in idx_grids]
    n_combo = idx[0].size

    times = [np.array([c.t for c in opts]) for opts in options]
    iters = [np.array([c.N for c in opts]) for opts in options]
    T = np.zeros(n_combo)
    for b in range(m):
        T += times[b][idx[b]] * iters[b][idx[b]]
    feasible = T <= tol.gate_time_tol * (1.0 + 1e-12)
    if not feasible.any():
        return None

    # per (target spin, block position): rotation matrices of every option
    prod = np.ones(n_combo)
    for s_label in subset:
        spin = register.spin(s_label)
        W0 = np.broadcast_to(np.eye(2, dtype=complex), (n_combo, 2, 2)).copy()
        W1 = W0.copy()
        for b in range(m):
            mats0, mats1 = _block_mats(spin, register, unit, times[b], iters[b])
            W0 = mats0[idx[b]] @ W0
            W1 = mats1[idx[b]] @ W1
        inner = 0.5 * np.einsum("cij,cij->c", W0.conj(), W1).real
        prod *= 1.0 - inner**2
    prod[~feasible] = -np.inf

    # argmax with (product, -T) ordering; np.argmax keeps the first maximum,
    # matching the brute-force iteration order over the same option lists
    best_prod = prod.max()
    if not np.isfinite(best_prod):
        return None
    tie = prod >= best_prod
    T_masked = np.where(tie, T, np.inf)
    best = int(np.argmin(T_masked))
    return [(float(times[b][idx[b][best]]), int(iters[b][idx[b][best]])) for b in range(m)]


def _block_mats(
    spin: NuclearSpin,
    register: Register,
    unit: SequenceUnit,
    ts: np.ndarray,
    Ns: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """V0^N, V1^N for paired (t, N) arrays via angle scaling."""
    V0, V1 = _unit_mats(spin, register, unit, ts)
    return _power_mats(V0, Ns), _power_mats(V1, Ns)


def _unit_mats(spin, register, unit, ts) -> tuple[np.ndarray, np.ndarray]:
    ts = np.asarray(ts, dtype=float)
    out0 = np.empty(ts.shape + (2, 2), dtype=complex)
    out1 = np.empty_like(out0)
    for i, t in np.ndenumerate(ts):
        V0, V1 = unit_propagators(spin, register, unit, float(t))
        out0[i] = V0
        out1[i] = V1
    return out0, out1


def _power_mats(V: np.ndarray, Ns: np.ndarray) -> np.ndarray:
    """Angle-scaled power of a batch of SU(2) matrices."""
    c = (V[..., 0, 0] + V[..., 1, 1]).real / 2.0
    vx = (1j * (V[..., 0, 1] + V[..., 1, 0])).real / 2.0
    vy = (V[..., 1, 0] - V[..., 0, 1]).real / 2.0
    vz = (1j * (V[..., 0, 0] - V[..., 1, 1])).real / 2.0
    s = np.sqrt(vx**2 + vy**2 + vz**2)
    phi = 2.0 * np.arctan2(s, c)
    safe = np.where(s > 1e-15, s, 1.0)
    nx, ny, nz = vx / safe, vy / safe, vz / safe
    half = 0.5 * np.asarray(Ns, dtype=float) * phi
    ch, sh = np.cos(half), np.sin(half)
    out = np.empty_like(V)
    out[..., 0, 0] = ch - 1j * sh * nz
    out[..., 0, 1] = -1j * sh * (nx - 1j * ny)
    out[..., 1, 0] = -1j * sh * (nx + 1j * ny)
    out[..., 1, 1] = ch + 1j * sh * nz
    # degenerate units (phi = 0): any power is the identity
    deg = s <= 1e-15
    if np.any(deg):
        sign = np.where(c[deg] >= 0, 1.0, -1.0)
        pw = np.where(np.asarray(Ns)[deg] % 2 == 0, 1.0, sign)
        out[deg] = pw[..., None, None] * np.eye(2, dtype=complex)
    return out


# ---------------------------------------------------------------------------
# Multi-spin scheme


def search_multispin(
    register: Register, unit: SequenceUnit, tol: SearchTolerances
) -> list[Case]:
    """Single-block search driving M-1 one-tangles past tolerance at once.

    Scans every spin's resonance grids; at each (t, N) all register
    one-tangles are evaluated in closed form. A hit needs exactly M-1 spins
    at or above target tolerance with every other spin at or below the
    unwanted tolerance. Hits are grouped by spin combination, keeping the
    (product of target tangles, shorter time) maximum, then filtered through
    the full case predicates.
    """
    m = tol.ghz_size - 1
    if len(register) < m:
        return []
    L = len(register)
    best_per_combo: dict[tuple[str, ...], tuple[tuple[float, float], float, int]] = {}
    for seed in register.spins:
        for k, grid in candidate_time_grids(seed, register, unit, tol):
            grid_arr = np.asarray(grid)
            params = [unit_branch_params(s, register, unit, grid_arr) for s in register.spins]
            for i, t in enumerate(grid_arr):
                n_hi = _n_max(tol, float(t))
                if n_hi < 1:
                    continue
                Ns = np.arange(1, n_hi + 1)
                tangles = np.empty((L, n_hi))
                for si, (p0, p1, d) in enumerate(params):
                    tangles[si] = iterated_tangles(p0[i], p1[i], d[i], Ns).ravel()
                hits = tangles >= tol.target_one_tangle_tol
                quiet = tangles <= tol.unwanted_one_tangle_tol
                counts = hits.sum(axis=0)
                valid = np.nonzero((counts == m) & np.all(hits | quiet, axis=0))[0]
                for vi in valid:
                    N = int(Ns[vi])
                    members = np.nonzero(hits[:, vi])[0]
                    combo = tuple(register.spins[si].label for si in members)
                    ep = float(np.prod(tangles[members, vi]))
                    key = (ep, -float(t) * N)
                    prev = best_per_combo.get(combo)
                    if prev is None or key > prev[0]:
                        best_per_combo[combo] = (key, float(t), N)
    cases: list[Case] = []
    for combo, (_, t, N) in best_per_combo.items():
        plan = SequencePlan((SequenceBlock(unit, t, N),))
        case = build_case(register, unit, tol, list(combo), plan, scheme="multispin")
        if case is not None:
            cases.append(case)
    return _sort_cases(cases)


# ---------------------------------------------------------------------------
# Ranking


def rank_cases(cases: list[Case], weights) -> list[Case]:
    """Re-score and re-order cases by the weighted cost function.

    score = w1 * ep_scaled + w2 * (1 - T/T_max) + w3 * (1 - error/tol).
    Stable descending sort with spin-label order as the deterministic
    tiebreak.
    """
    w = tuple(float(x) for x in weights)
    if len(w) != 3:
        raise ConfigError("rank weights must have three components")
    if abs(sum(w) - 1.0) > 1e-9:
        raise ConfigError(f"rank weights must sum to 1, got {sum(w)!r}")
    rescored = [
        replace(
            c,
            rank_score=_score(
                c.metrics.ep.ep_scaled, c.plan.total_time, c.error.infidelity, c.tolerances, w
            ),
        )
        for c in cases
    ]
    rescored.sort(key=lambda c: (-c.rank_score, c.spin_labels))
    return rescored
