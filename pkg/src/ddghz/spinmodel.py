"""Electron-conditioned nuclear spin dynamics under pi-pulse sequences.

A defect electron spin (qubit states |0>, |1>) is coupled to a register of
spin-1/2 nuclei through hyperfine parameters (A, B). Between pi-pulses each
nucleus precesses under one of two Hamiltonians depending on the electron
state:

    H0 = (omega_L / 2) sigma_z
    H1 = ((omega_L + A) / 2) sigma_z + (B / 2) sigma_x

A pulse unit of duration t (e.g. CPMG: t/4 - pi - t/2 - pi - t/4) therefore
drives each nucleus through a pair of net SU(2) rotations (V0, V1)
conditioned on the initial electron state. Everything downstream (invariants,
entangling powers, searches) consumes these conditional rotations in
axis-angle form.

Units: angular frequencies in rad/s, times in seconds. Conversion from the
tabulated kHz values happens at the I/O boundary (factor 2*pi*1e3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation

KHZ_TO_RAD_PER_S = 2.0 * math.pi * 1e3

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

UNITARITY_TOL = 1e-12
AXIS_EPS = 1e-12
DEGENERATE_AXIS = (0.0, 0.0, 1.0)


def su2_matrix(phi: float, axis) -> np.ndarray:
    """Return exp(-i phi/2 sigma.n) for a unit axis n.

    Args:
        phi: rotation angle in radians.
        axis: length-3 unit vector.

    Returns:
        2x2 complex special-unitary matrix.
    """
    nx, ny, nz = axis
    c = math.cos(phi / 2.0)
    s = math.sin(phi / 2.0)
    return np.array(
        [
            [c - 1j * s * nz, -1j * s * (nx - 1j * ny)],
            [-1j * s * (nx + 1j * ny), c + 1j * s * nz],
        ],
        dtype=complex,
    )


def extract_axis_angle(V: np.ndarray, tol: float = 1e-9) -> tuple[float, tuple[float, float, float]]:
    """Decompose a 2x2 unitary into canonical axis-angle form.

    The global phase is removed first (division by a square root of the
    determinant), so the result satisfies
    ``su2_matrix(phi, n) == V`` up to a global phase.

    Canonical representative: phi in [0, 2*pi); the first nonzero axis
    component (checked in x, y, z order) is positive; a degenerate axis
    (phi == 0) defaults to (0, 0, 1).

    Args:
        V: 2x2 unitary matrix.
        tol: unitarity tolerance.

    Returns:
        (phi, n) with phi in radians and n a unit 3-vector tuple.

    Raises:
        ValueError: if V is not unitary within tol.
    """
    V = np.asarray(V, dtype=complex)
    if V.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {V.shape}")
    dev = np.abs(V.conj().T @ V - IDENTITY_2).max()
    if dev > tol:
        raise ValueError(f"matrix is not unitary within {tol:g} (deviation {dev:g})")

    det = V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0]
    V = V / np.sqrt(det)

    c = (V[0, 0] + V[1, 1]).real / 2.0
    vec = np.array(
        [
            (1j * (V[0, 1] + V[1, 0])).real / 2.0,
            (V[1, 0] - V[0, 1]).real / 2.0,
            (1j * (V[0, 0] - V[1, 1])).real / 2.0,
        ]
    )
    s = float(np.linalg.norm(vec))
    if s < AXIS_EPS:
        # phi = 0 or 2*pi: both act as the identity up to global phase
        return 0.0, DEGENERATE_AXIS

    phi = 2.0 * math.atan2(s, c)
    n = vec / s
    for comp in n:
        if abs(comp) > AXIS_EPS:
            if comp < 0.0:
                n = -n
                phi = 2.0 * math.pi - phi
            break
    phi = phi % (2.0 * math.pi)
    if phi < AXIS_EPS:
        return 0.0, DEGENERATE_AXIS
    return phi, (float(n[0]), float(n[1]), float(n[2]))


@dataclass(frozen=True)
class NuclearSpin:
    """One register nucleus: label plus hyperfine components in rad/s."""

    label: str
    A: float
    B: float

    def __post_init__(self):
        if self.B < 0:
            raise ValueError(f"spin {self.label}: B must be >= 0, got {self.B}")

    @classmethod
    def from_khz(cls, label: str, A_kHz: float, B_kHz: float) -> "NuclearSpin":
        return cls(label, A_kHz * KHZ_TO_RAD_PER_S, B_kHz * KHZ_TO_RAD_PER_S)


@dataclass(frozen=True)
class Register:
    """Ordered nuclear register sharing one Larmor frequency (rad/s)."""

    spins: tuple[NuclearSpin, ...]
    omega_larmor: float

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(self.spins))
        if not self.spins:
            raise ValueError("register must contain at least one spin")
        if self.omega_larmor <= 0:
            raise ValueError("omega_larmor must be positive")
        labels = [s.label for s in self.spins]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate spin labels in register")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.spins)

    def __len__(self) -> int:
        return len(self.spins)

    def index(self, label: str) -> int:
        for i, s in enumerate(self.spins):
            if s.label == label:
                return i
        raise KeyError(f"no spin labeled {label!r} in register")

    def spin(self, label: str) -> NuclearSpin:
        return self.spins[self.index(label)]


@dataclass(frozen=True)
class SequenceUnit:
    """Pi-pulse pattern within one unit of duration t.

    pulse_fractions are the fractional times in (0, 1) at which pi-pulses
    act; free evolution fills the gaps.
    """

    kind: str
    pulse_fractions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "pulse_fractions", tuple(float(f) for f in self.pulse_fractions))
        fr = self.pulse_fractions
        if not fr:
            raise ValueError("a sequence unit needs at least one pulse")
        if any(not 0.0 < f < 1.0 for f in fr):
            raise ValueError("pulse fractions must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(fr, fr[1:])):
            raise ValueError("pulse fractions must be strictly increasing")

    @classmethod
    def cpmg(cls) -> "SequenceUnit":
        return cls("cpmg", (0.25, 0.75))

    @classmethod
    def udd(cls, n: int) -> "SequenceUnit":
        if n < 1:
            raise ValueError("UDD order must be >= 1")
        fr = tuple(math.sin(k * math.pi / (2 * n + 2)) ** 2 for k in range(1, n + 1))
        return cls(f"udd{n}", fr)

    @classmethod
    def custom(cls, fractions) -> "SequenceUnit":
        return cls("custom", tuple(fractions))


@dataclass(frozen=True)
class SequenceBlock:
    """One (unit, t, N) block: the unit of duration t iterated N times."""

    unit: SequenceUnit
    t: float
    N: int

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("unit time must be positive")
        if self.N < 1 or int(self.N) != self.N:
            raise ValueError("iteration count must be a positive integer")
        object.__setattr__(self, "N", int(self.N))

    @property
    def duration(self) -> float:
        return self.t * self.N


@dataclass(frozen=True)
class SequencePlan:
    """Ordered blocks; blocks[0] acts first."""

    blocks: tuple[SequenceBlock, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("plan must contain at least one block")

    @property
    def total_time(self) -> float:
        return sum(b.duration for b in self.blocks)


@dataclass(frozen=True)
class ConditionalRotation:
    """Axis-angle pair of nuclear rotations conditioned on the electron state."""

    phi0: float
    n0: tuple[float, float, float]
    phi1: float
    n1: tuple[float, float, float]

    def __post_init__(self):
        for name, n in (("n0", self.n0), ("n1", self.n1)):
            if abs(np.linalg.norm(n) - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a unit vector")
        object.__setattr__(self, "n0", tuple(float(x) for x in self.n0))
        object.__setattr__(self, "n1", tuple(float(x) for x in self.n1))

    @classmethod
    def from_unitaries(cls, V0: np.ndarray, V1: np.ndarray) -> "ConditionalRotation":
        phi0, n0 = extract_axis_angle(V0)
        phi1, n1 = extract_axis_angle(V1)
        return cls(phi0, n0, phi1, n1)

    @property
    def r0(self) -> np.ndarray:
        return su2_matrix(self.phi0, self.n0)

    @property
    def r1(self) -> np.ndarray:
        return su2_matrix(self.phi1, self.n1)

    @property
    def axis_dot(self) -> float:
        return float(np.dot(self.n0, self.n1))


def conditional_hamiltonians(spin: NuclearSpin, register: Register) -> tuple[np.ndarray, np.ndarray]:
    """Nuclear Hamiltonians for electron state |0> and |1>.

    Returns:
        (H0, H1), both 2x2 Hermitian and traceless, in rad/s.
    """
    wl = register.omega_larmor
    H0 = 0.5 * wl * SIGMA_Z
    H1 = 0.5 * (wl + spin.A) * SIGMA_Z + 0.5 * spin.B * SIGMA_X
    return H0, H1


def _precession(spin: NuclearSpin, omega_larmor: float):
    """Rotation rates and axes generated by H0 and H1."""
    w0 = omega_larmor
    wz = omega_larmor + spin.A
    w1 = math.hypot(spin.B, wz)
    if w1 < 1e-30:
        axis1 = DEGENERATE_AXIS
    else:
        axis1 = (spin.B / w1, 0.0, wz / w1)
    return w0, (0.0, 0.0, 1.0), w1, axis1


def _segment_states(n_pulses: int, start: int) -> list[int]:
    """Electron state index during each free-evolution segment."""
    return [(start + i) % 2 for i in range(n_pulses + 1)]


def unit_propagators(
    spin: NuclearSpin, register: Register, unit: SequenceUnit, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """Net nuclear propagators (V0, V1) for one pulse unit of duration t.

    V0 assumes the electron starts in |0>; each pi-pulse toggles which
    Hamiltonian generates the next free segment. V1 is the same with the
    roles of H0 and H1 swapped.

    Args:
        spin: the nucleus.
        register: supplies omega_larmor.
        unit: pulse pattern.
        t: unit duration in seconds, > 0.

    Returns:
        Pair of 2x2 special-unitary matrices.
    """
    if t <= 0:
        raise ValueError("unit time must be positive")
    w0, ax0, w1, ax1 = _precession(spin, register.omega_larmor)
    bounds = (0.0,) + unit.pulse_fractions + (1.0,)
    durations = [t * (b - a) for a, b in zip(bounds, bounds[1:])]

    def product(start: int) -> np.ndarray:
        V = IDENTITY_2
        for state, tau in zip(_segment_states(len(unit.pulse_fractions), start), durations):
            if state == 0:
                seg = su2_matrix(w0 * tau, ax0)
            else:
                seg = su2_matrix(w1 * tau, ax1)
            V = seg @ V  # later segments act on the left
        return V

    return product(0), product(1)


def compose_sequence(spin: NuclearSpin, register: Register, plan: SequencePlan) -> ConditionalRotation:
    """Total conditional rotation of one nucleus under a multi-block plan.

    Blocks are multiplied in plan order (blocks[0] acts first); each block
    contributes its unit propagator raised to the N-th power by exact matrix
    multiplication.
    """
    V0 = IDENTITY_2
    V1 = IDENTITY_2
    for block in plan.blocks:
        U0, U1 = unit_propagators(spin, register, block.unit, block.t)
        V0 = np.linalg.matrix_power(U0, block.N) @ V0
        V1 = np.linalg.matrix_power(U1, block.N) @ V1
    return ConditionalRotation.from_unitaries(V0, V1)


def compose_register(register: Register, plan: SequencePlan) -> list[ConditionalRotation]:
    """compose_sequence for every spin, in register order."""
    return [compose_sequence(s, register, plan) for s in register.spins]


@dataclass(frozen=True)
class ResonanceSeed:
    """One located resonance: order k, unit time at the G1 dip, scan grid."""

    k: int
    t_analytic: float
    t_resonance: float
    g1_min: float
    grid: np.ndarray = field(repr=False)


def analytic_resonance_time(spin: NuclearSpin, register: Register, k: int) -> float:
    """First-order resonance unit time for a two-pulse unit.

    The standard condition fixes the interpulse spacing (half the CPMG unit)
    at (2k-1)*pi/(omega_L + A/2), so the unit time is twice that. Used only
    to center scans; the numerical G1 dip is authoritative.
    """
    return 2.0 * (2 * k - 1) * math.pi / (register.omega_larmor + spin.A / 2.0)


def scan_resonances(
    spin: NuclearSpin,
    register: Register,
    unit: SequenceUnit,
    k_max: int,
    window: float = 0.25e-6,
    grid_step: float = 10e-9,
    probe_iterations: int = 8,
    dip_threshold: float = 1e-6,
) -> list[ResonanceSeed]:
    """Locate resonance unit times for orders k = 1..k_max.

    For each k the scan covers the analytic seed +- window at grid_step
    resolution and looks for a local minimum of G1 at a fixed small number
    of unit iterations. One iteration is too blunt an instrument: when a
    branch angle sits near 2*pi the axis term of G1 is suppressed and the
    dip at the axis anti-alignment disappears, so the default probes the
    8th power, which resolves every nonzero-B resonance of the bundled
    register while staying well inside the fine-grid window. Orders whose
    deepest dip stays above 1 - dip_threshold are reported resonance-free
    (omitted), which covers B = 0 spins where G1 is identically 1.

    Returns:
        List of ResonanceSeed; the grid of each seed is re-centered on the
        numerical dip, spanning [t_res - window, t_res + window].
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if window <= 0 or grid_step <= 0:
        raise ValueError("window and grid_step must be positive")
    if probe_iterations < 1:
        raise ValueError("probe_iterations must be >= 1")
    # delayed import: metrics depends on this module
    from .metrics import g1_iterated

    seeds = []
    for k in range(1, k_max + 1):
        center = analytic_resonance_time(spin, register, k)
        grid = _time_grid(center, window, grid_step)
        if grid.size < 3:
            continue
        values = np.empty(grid.size)
        for i, t in enumerate(grid):
            V0, V1 = unit_propagators(spin, register, unit, t)
            cr = ConditionalRotation.from_unitaries(V0, V1)
            values[i] = float(g1_iterated(cr, probe_iterations))
        interior = (
            (values[1:-1] <= values[:-2]) & (values[1:-1] <= values[2:])
        )
        candidates = np.nonzero(interior)[0] + 1
        if candidates.size == 0:
            continue
        best = candidates[np.argmin(values[candidates])]
        if 1.0 - values[best] < dip_threshold:
            continue
        t_res = float(grid[best])
        seeds.append(
            ResonanceSeed(
                k=k,
                t_analytic=center,
                t_resonance=t_res,
                g1_min=float(values[best]),
                grid=_time_grid(t_res, window, grid_step),
            )
        )
    return seeds


def _time_grid(center: float, window: float, step: float) -> np.ndarray:
    """Symmetric grid center +- window without cumulative float drift."""
    n = int(round(window / step))
    grid = center + step * np.arange(-n, n + 1)
    return grid[grid > 0]


def check_special_unitary(V: np.ndarray, tol: float = UNITARITY_TOL) -> None:
    """Raise InvariantViolation if V is not unitary within tol."""
    dev = np.abs(V.conj().T @ V - np.eye(V.shape[0])).max()
    if dev > tol:
        raise InvariantViolation(f"propagator deviates from unitarity by {dev:g}")
