"""
Born rule, collapse, conditional and sequential joint probabilities

A schedule is an ordered list of measurement events, earliest first. The joint
probability of a schedule is the squared norm of the lifted projector chain
applied to the state.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .qcore import (
    TOLERANCE,
    DimensionError,
    LinearOperator,
    ProjectiveFamily,
    StateVector,
    apply,
    lift,
    make_state,
)

logger = logging.getLogger(__name__)

# entries below this are stored as exact zeros
ZERO_CUTOFF = 1e-15

OutcomeTuple = Tuple[int, ...]


class ImpossibleOutcomeError(ValueError):
    """Conditioning on, or collapsing onto, an outcome of zero probability"""


@dataclass(frozen=True, eq=False)
class MeasurementEvent:
    """Outcome ``outcome`` of ``family`` measured on subsystem ``slot``"""

    slot: int
    family: ProjectiveFamily
    outcome: int

    def __post_init__(self):
        if not 0 <= self.outcome < len(self.family):
            raise ValueError(
                f"outcome {self.outcome} out of range for a family of size {len(self.family)}"
            )

    def check(self, dims: Sequence[int]):
        if not 0 <= self.slot < len(dims):
            raise DimensionError(f"slot {self.slot} out of range for dims {tuple(dims)}")
        if self.family.dim != dims[self.slot]:
            raise DimensionError(
                f"family of dimension {self.family.dim} does not fit slot {self.slot} "
                f"of dims {tuple(dims)}"
            )


@dataclass(frozen=True)
class Schedule:
    """Measurement events in global time order, earliest first"""

    events: Tuple[MeasurementEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def check(self, dims: Sequence[int]):
        for event in self.events:
            event.check(dims)


@dataclass(frozen=True)
class JointDistribution:
    """Probabilities keyed by outcome tuples.

    ``labels`` optionally names the outcomes per tuple position, e.g.
    ``(("up", "down"), ("up", "down"))``.
    """

    entries: Dict[OutcomeTuple, float]
    labels: Optional[Tuple[Tuple[str, ...], ...]] = None
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        cleaned = {}
        for key, p in self.entries.items():
            p = float(p)
            if p < -TOLERANCE or p > 1.0 + TOLERANCE:
                raise ValueError(f"probability {p!r} for {key} outside [0, 1]")
            cleaned[tuple(key)] = 0.0 if p < ZERO_CUTOFF else min(p, 1.0)
        object.__setattr__(self, "entries", cleaned)
        if self.total() > 1.0 + TOLERANCE:
            raise ValueError(f"probabilities sum to {self.total()!r} > 1")

    def __getitem__(self, key) -> float:
        return self.entries.get(tuple(key), 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def marginal(self, positions: Sequence[int]) -> "JointDistribution":
        """Sum out every tuple position not listed in ``positions``"""
        positions = tuple(positions)
        summed: Dict[OutcomeTuple, float] = {}
        for key, p in self.entries.items():
            reduced = tuple(key[i] for i in positions)
            summed[reduced] = summed.get(reduced, 0.0) + p
        labels = tuple(self.labels[i] for i in positions) if self.labels else None
        names = tuple(self.names[i] for i in positions) if self.names else None
        return JointDistribution(summed, labels=labels, names=names)

    def label(self, key: OutcomeTuple) -> Tuple[str, ...]:
        if not self.labels:
            return tuple(str(k) for k in key)
        return tuple(self.labels[i][k] for i, k in enumerate(key))


def event_projector(dims: Sequence[int], event: MeasurementEvent) -> LinearOperator:
    """The event's projector lifted to the full space"""
    event.check(dims)
    return lift(event.family[event.outcome], dims, event.slot)


def born_probability(s: StateVector, p: LinearOperator) -> float:
    """<s|P|s> for a projector already lifted to the state's space"""
    value = np.vdot(s.amps, apply(p, s))
    if abs(value.imag) > TOLERANCE:
        raise ArithmeticError(f"expectation value has imaginary part {value.imag!r}")
    return max(0.0, float(value.real))


def collapse(s: StateVector, p: LinearOperator) -> StateVector:
    """Project onto the range of ``p`` and renormalize"""
    if born_probability(s, p) <= TOLERANCE:
        raise ImpossibleOutcomeError("impossible outcome: projector has zero probability")
    return make_state(s.dims, apply(p, s))


def conditional_probability(
    s: StateVector, target: MeasurementEvent, given: MeasurementEvent
) -> float:
    """P(target | given), with ``given`` measured first"""
    try:
        collapsed = collapse(s, event_projector(s.dims, given))
    except ImpossibleOutcomeError as e:
        raise ImpossibleOutcomeError(f"cannot condition on an impossible event: {e}") from e
    return born_probability(collapsed, event_projector(s.dims, target))


def _chain(s: StateVector, schedule: Schedule) -> np.ndarray:
    schedule.check(s.dims)
    vector = s.amps
    for event in schedule:
        vector = event_projector(s.dims, event).matrix @ vector
    return vector


def joint_probability(s: StateVector, schedule: Schedule) -> float:
    """||P_n ... P_2 P_1 |s>||^2 with P_1 the earliest event"""
    vector = _chain(s, schedule)
    return float(np.vdot(vector, vector).real)


def raw_product_expectation(s: StateVector, schedule: Schedule) -> complex:
    """The single-product value <s|P_1 P_2 ... P_n|s>.

    Agrees with ``joint_probability`` when the projectors commute; for
    noncommuting same-slot events it can be complex. Not used by any check.
    """
    schedule.check(s.dims)
    vector = s.amps
    for event in reversed(schedule.events):
        vector = event_projector(s.dims, event).matrix @ vector
    return complex(np.vdot(s.amps, vector))


def chained_conditional_probability(s: StateVector, schedule: Schedule) -> float:
    """Product of stepwise conditional probabilities along the schedule"""
    schedule.check(s.dims)
    total = 1.0
    current = s
    for event in schedule:
        projector = event_projector(s.dims, event)
        p = born_probability(current, projector)
        if p <= TOLERANCE:
            return 0.0
        total *= p
        current = collapse(current, projector)
    return total


def joint_distribution(
    s: StateVector,
    measurements: Sequence[Tuple[int, ProjectiveFamily]],
    labels: Optional[Sequence[Sequence[str]]] = None,
    names: Optional[Sequence[str]] = None,
) -> JointDistribution:
    """Joint probabilities of every outcome tuple of the ordered (slot, family) list"""
    measurements = tuple(measurements)
    for slot, family in measurements:
        MeasurementEvent(slot, family, 0).check(s.dims)

    lifted = [
        [lift(projector, s.dims, slot).matrix for projector in family]
        for slot, family in measurements
    ]
    entries: Dict[OutcomeTuple, float] = {}

    def descend(depth: int, vector: np.ndarray, outcomes: OutcomeTuple):
        if depth == len(lifted):
            entries[outcomes] = float(np.vdot(vector, vector).real)
            return
        for outcome, matrix in enumerate(lifted[depth]):
            descend(depth + 1, matrix @ vector, outcomes + (outcome,))

    descend(0, s.amps, ())
    return JointDistribution(
        entries,
        labels=tuple(tuple(l) for l in labels) if labels else None,
        names=tuple(names) if names else None,
    )


def correlation(distribution: JointDistribution) -> float:
    """<O_A O_B> for two two-outcome observables with eigenvalues +1 (outcome 0) and -1"""
    sign = (1.0, -1.0)
    return float(
        sum(sign[a] * sign[b] * p for (a, b), p in distribution.entries.items())
    )


@dataclass(frozen=True)
class BayesReport:
    """The two Bayes products and the squared joint amplitude for one outcome pair"""

    a_given_b_times_b: float
    b_given_a_times_a: float
    joint_weight: float
    max_difference: float
    degenerate: bool = False

    @property
    def consistent(self) -> bool:
        return self.max_difference < TOLERANCE


def bayes_symmetry_check(
    s: StateVector, ev_a: MeasurementEvent, ev_b: MeasurementEvent
) -> BayesReport:
    """Compare P(A|B)P(B), P(B|A)P(A) and |alpha_IJ|^2.

    Conditioning on a zero-probability event counts its product as 0 and the
    report is marked degenerate instead of raising.
    """
    if ev_a.slot == ev_b.slot:
        raise ValueError("bayes_symmetry_check needs events on different slots")
    proj_a = event_projector(s.dims, ev_a)
    proj_b = event_projector(s.dims, ev_b)
    p_a = born_probability(s, proj_a)
    p_b = born_probability(s, proj_b)

    degenerate = False
    if p_b > TOLERANCE:
        ab = born_probability(collapse(s, proj_b), proj_a) * p_b
    else:
        ab, degenerate = 0.0, True
    if p_a > TOLERANCE:
        ba = born_probability(collapse(s, proj_a), proj_b) * p_a
    else:
        ba, degenerate = 0.0, True

    both = proj_a.matrix @ (proj_b.matrix @ s.amps)
    weight = float(np.vdot(both, both).real)
    values = (ab, ba, weight)
    spread = max(abs(x - y) for x, y in itertools.combinations(values, 2))
    if degenerate:
        logger.debug("Bayes check on a zero-probability event; treating as consistent")
        spread = 0.0
    return BayesReport(ab, ba, weight, spread, degenerate)
