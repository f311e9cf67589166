"""
Delayed-choice quantum eraser

The slit photon becomes an entangled signal/idler pair. The signal slot holds
the path (U, L); the idler slot holds the detector channel D1..D4 reached
through the beamsplitter network. Outcome tuples are ordered (signal, idler).

Two circuit modes:

- ``paper``: the printed prefactors, no reflection phases. The two idler
  branch vectors overlap, so fringes leak into the signal marginal.
- ``unitary``: symmetric beamsplitters (reflection picks up a factor i) and a
  fixed phase on the lower idler arm. The idler branches are orthogonal, D1
  shows fringes and D2 the complementary anti-fringes.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .measure import (
    JointDistribution,
    MeasurementEvent,
    Schedule,
    collapse,
    event_projector,
    joint_distribution,
    joint_probability,
)
from .qcore import (
    TOLERANCE,
    ProjectiveFamily,
    StateVector,
    computational_family,
    family_from_basis,
    make_state,
)
from .wheeler import FringePattern, check_theta_grid, symmetric_grid

logger = logging.getLogger(__name__)

SIGNAL_SLOT = 0
IDLER_SLOT = 1
PATHS = ("U", "L")
DETECTORS = ("D1", "D2", "D3", "D4")
DEFAULT_THETA_MAX = np.pi / 3
# lower idler arm delay that puts D1 on the symmetric superposition
DEFAULT_ARM_PHASE = -np.pi / 2


class CircuitMode(str, Enum):
    PAPER = "paper"
    UNITARY = "unitary"


class ScheduleOrder(str, Enum):
    SIGNAL_FIRST = "signal_first"
    IDLER_FIRST = "idler_first"


@dataclass(frozen=True, eq=False)
class EraserConfig:
    k: float
    d: float
    theta_grid: np.ndarray
    mode: CircuitMode = CircuitMode.UNITARY

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.d <= 0:
            raise ValueError(f"d must be positive, got {self.d}")
        object.__setattr__(self, "mode", CircuitMode(self.mode))
        object.__setattr__(self, "theta_grid", check_theta_grid(self.theta_grid))

    @classmethod
    def from_bins(
        cls,
        k: float,
        d: float,
        theta_bins: int,
        mode: CircuitMode = CircuitMode.UNITARY,
        theta_max: float = DEFAULT_THETA_MAX,
    ) -> "EraserConfig":
        return cls(k, d, symmetric_grid(theta_bins, theta_max), CircuitMode(mode))

    def phases(self) -> np.ndarray:
        """k d sin(theta) over the grid"""
        return self.k * self.d * np.sin(self.theta_grid)


@dataclass(frozen=True, eq=False)
class EraserState:
    """Signal path (2) x idler detector channel (4)"""

    state: StateVector
    mode: CircuitMode

    def __post_init__(self):
        if self.state.dims != (2, 4):
            raise ValueError(f"eraser state must have dims (2, 4), got {self.state.dims}")

    def amplitude(self, path: str, detector: str) -> complex:
        return self.state[PATHS.index(path), DETECTORS.index(detector)]

    def idler_branch(self, path: str) -> np.ndarray:
        """Idler amplitudes over D1..D4 attached to one signal path"""
        return np.array(self.state.tensor()[PATHS.index(path)])


def _beamsplitter(mode: CircuitMode) -> np.ndarray:
    """Output amplitudes (transmitted, reflected) for a unit input"""
    c = 1 / np.sqrt(2)
    if mode is CircuitMode.PAPER:
        return np.array([[c, c], [c, c]], dtype=np.complex128)
    return np.array([[c, 1j * c], [1j * c, c]], dtype=np.complex128)


def build_state(
    mode: CircuitMode = CircuitMode.UNITARY, arm_phase: float = DEFAULT_ARM_PHASE
) -> EraserState:
    """Slit superposition, pair production and idler optics.

    BS_A splits the upper idler between D4 (transmitted) and the recombining
    BS_C; BS_B splits the lower idler between D3 and BS_C. At BS_C the upper
    idler transmits to D1 and reflects to D2, the lower one the other way round.
    """
    mode = CircuitMode(mode)
    bs = _beamsplitter(mode)
    t, r = bs[0, 0], bs[0, 1]
    delay = np.exp(1j * arm_phase) if mode is CircuitMode.UNITARY else 1.0

    upper = np.zeros(4, dtype=np.complex128)
    upper[DETECTORS.index("D4")] = t
    upper[DETECTORS.index("D1")] = r * t
    upper[DETECTORS.index("D2")] = r * r

    lower = np.zeros(4, dtype=np.complex128)
    lower[DETECTORS.index("D3")] = t
    lower[DETECTORS.index("D1")] = r * delay * r
    lower[DETECTORS.index("D2")] = r * delay * t

    slit = make_state((2,), [1, 1])
    # each path carries its own idler branch, so the pair is not a product state
    amps = np.concatenate([slit[0] * upper, slit[1] * lower])
    state = make_state((2, 4), amps)
    logger.debug("Built %s-mode eraser state with amplitudes %s", mode.value, state.amps)
    return EraserState(state, mode)


def detector_family() -> ProjectiveFamily:
    """Which of D1..D4 the idler reaches"""
    return computational_family(len(DETECTORS))


def screen_family(theta: float, config: EraserConfig) -> ProjectiveFamily:
    """Signal-slot family whose outcome 0 is the screen kernel at angle theta.

    <kernel|psi> = (c_U exp(i phi/2) + c_L exp(-i phi/2)) / sqrt(2), with
    phi = k d sin(theta).
    """
    half = config.k * config.d * np.sin(theta) / 2
    c = 1 / np.sqrt(2)
    kernel = [c * np.exp(-1j * half), c * np.exp(1j * half)]
    complement = [c * np.exp(-1j * half), -c * np.exp(1j * half)]
    return family_from_basis([kernel, complement])


def idler_marginals(state: EraserState) -> JointDistribution:
    """P(Dj) with the signal photon unobserved"""
    return joint_distribution(
        state.state,
        [(IDLER_SLOT, detector_family())],
        labels=[DETECTORS],
        names=["idler"],
    )


def _screen_intensity(c_u: complex, c_l: complex, config: EraserConfig) -> np.ndarray:
    half = config.phases() / 2
    return np.abs(c_u * np.exp(1j * half) + c_l * np.exp(-1j * half)) ** 2


def conditional_pattern(state: EraserState, detector: str, config: EraserConfig) -> FringePattern:
    """Screen pattern of the signal photons whose idler reached ``detector``"""
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}, expected one of {DETECTORS}")
    event = MeasurementEvent(IDLER_SLOT, detector_family(), DETECTORS.index(detector))
    collapsed = collapse(state.state, event_projector(state.state.dims, event))
    column = DETECTORS.index(detector)
    c_u, c_l = collapsed[0, column], collapsed[1, column]
    return FringePattern.from_raw(config.theta_grid, _screen_intensity(c_u, c_l, config))


@dataclass(frozen=True, eq=False)
class ScreenTable:
    """Joint density over (theta bin, detector).

    ``density[i, j]`` is the screen intensity at ``theta[i]`` carried by the
    idler outcome ``DETECTORS[j]``; its mean over a full fringe period is the
    detector's marginal probability.
    """

    theta: np.ndarray
    density: np.ndarray
    order: ScheduleOrder

    def column(self, detector: str) -> np.ndarray:
        return self.density[:, DETECTORS.index(detector)]

    def row_sums(self) -> np.ndarray:
        return self.density.sum(axis=1)


def joint_screen_distribution(
    state: EraserState, config: EraserConfig, order: ScheduleOrder = ScheduleOrder.SIGNAL_FIRST
) -> ScreenTable:
    """Evaluate the screen x detector table through measurement schedules"""
    order = ScheduleOrder(order)
    detectors = detector_family()
    density = np.zeros((config.theta_grid.size, len(DETECTORS)))
    for i, theta in enumerate(config.theta_grid):
        signal = MeasurementEvent(SIGNAL_SLOT, screen_family(theta, config), 0)
        for j in range(len(DETECTORS)):
            idler = MeasurementEvent(IDLER_SLOT, detectors, j)
            events = (signal, idler) if order is ScheduleOrder.SIGNAL_FIRST else (idler, signal)
            # the kernel outcome carries half the weight of a unit-modulus amplitude pair
            density[i, j] = 2.0 * joint_probability(state.state, Schedule(events))
    density[density < 1e-15] = 0.0
    return ScreenTable(np.array(config.theta_grid), density, order)


def signal_marginal(state: EraserState, config: EraserConfig) -> FringePattern:
    """Screen pattern summed over all four detectors"""
    table = joint_screen_distribution(state, config)
    return FringePattern.from_raw(config.theta_grid, table.row_sums())


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    signal_first: ScreenTable
    idler_first: ScreenTable
    max_difference: float

    @property
    def consistent(self) -> bool:
        return self.max_difference < TOLERANCE


def schedule_equivalence(state: EraserState, config: EraserConfig) -> EquivalenceReport:
    """Signal-first against idler-first evaluation of the joint table"""
    first = joint_screen_distribution(state, config, ScheduleOrder.SIGNAL_FIRST)
    second = joint_screen_distribution(state, config, ScheduleOrder.IDLER_FIRST)
    difference = float(np.max(np.abs(first.density - second.density)))
    logger.info("Signal-first vs idler-first max difference: %.3e", difference)
    return EquivalenceReport(first, second, difference)
