"""
Branch ledger for premeasurement

A premeasurement adjoins a pointer subsystem and correlates its basis states
with the outcomes of a projective family. Pointer subsystems are never acted
on again; their basis components are the branches. No dynamics happens
between events: each premeasurement is an instantaneous isometry.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .measure import ZERO_CUTOFF
from .qcore import (
    TOLERANCE,
    DimensionError,
    ProjectiveFamily,
    StateVector,
    Unitary,
    computational_family,
    lift,
    make_state,
    singlet_state,
    tensor_state,
)

logger = logging.getLogger(__name__)

SPIN_SYMBOLS = ("up", "down")
# reported when the two orders reach different label sets; amplitude moduli never exceed 1
LABEL_MISMATCH = 1.0


class PointerError(ValueError):
    """An operation would touch a pointer subsystem"""


@dataclass(frozen=True, order=True)
class PointerLabel:
    """(observer, outcome symbol) pairs, sorted by observer"""

    entries: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        entries = tuple(sorted((str(o), str(s)) for o, s in self.entries))
        observers = [o for o, _ in entries]
        if len(set(observers)) != len(observers):
            raise ValueError(f"observer ids must be unique within a label: {observers}")
        object.__setattr__(self, "entries", entries)

    def outcome_of(self, observer: str) -> str:
        return dict(self.entries)[observer]

    def __str__(self) -> str:
        return ", ".join(f"{o}: {s}" for o, s in self.entries) or "-"


@dataclass(frozen=True, eq=False)
class Branch:
    label: PointerLabel
    amplitude: complex
    relative_state: Optional[StateVector] = None

    @property
    def weight(self) -> float:
        return min(1.0, abs(self.amplitude) ** 2)


@dataclass(frozen=True)
class PointerSlot:
    slot: int
    observer: str
    symbols: Tuple[str, ...]


@dataclass(frozen=True, eq=False)
class WorldState:
    """A state together with the subsystems that serve as pointers"""

    state: StateVector
    pointers: Tuple[PointerSlot, ...] = ()

    @property
    def pointer_slots(self) -> Tuple[int, ...]:
        return tuple(p.slot for p in self.pointers)

    @property
    def system_slots(self) -> Tuple[int, ...]:
        return tuple(i for i in range(len(self.state.dims)) if i not in self.pointer_slots)


@dataclass(frozen=True, eq=False)
class Premeasurement:
    slot: int
    family: ProjectiveFamily
    observer: str
    symbols: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        symbols = self.symbols or tuple(str(i) for i in range(len(self.family)))
        if len(symbols) != len(self.family):
            raise ValueError(
                f"{len(symbols)} symbols given for a family of {len(self.family)} outcomes"
            )
        object.__setattr__(self, "symbols", tuple(symbols))


def premeasurement_map(dims: Sequence[int], slot: int, family: ProjectiveFamily) -> np.ndarray:
    """Isometry V with V|psi> = sum_i (P_i|psi>) (x) |i>, the pointer index fastest"""
    lifted = [lift(p, dims, slot).matrix for p in family]
    dim, n = lifted[0].shape[0], len(lifted)
    isometry = np.zeros((dim * n, dim), dtype=np.complex128)
    for i, matrix in enumerate(lifted):
        isometry[i::n, :] = matrix
    return isometry


def premeasure(
    world: Union[StateVector, WorldState],
    slot: int,
    pointer_family: ProjectiveFamily,
    observer_id: str,
    symbols: Optional[Sequence[str]] = None,
) -> WorldState:
    """Adjoin a pointer for ``observer_id`` that records ``pointer_family`` on ``slot``"""
    if isinstance(world, StateVector):
        world = WorldState(world)
    if slot in world.pointer_slots:
        raise PointerError(f"would re-measure pointer: slot {slot} is a pointer")
    if any(p.observer == observer_id for p in world.pointers):
        raise ValueError(f"observer {observer_id!r} already holds a pointer")
    if not 0 <= slot < len(world.state.dims):
        raise DimensionError(f"slot {slot} out of range for dims {world.state.dims}")
    event = Premeasurement(slot, pointer_family, observer_id, tuple(symbols) if symbols else None)

    dims = world.state.dims
    amps = premeasurement_map(dims, slot, pointer_family) @ world.state.amps
    state = StateVector(dims + (len(pointer_family),), amps)
    pointer = PointerSlot(len(dims), observer_id, event.symbols)
    logger.debug("Observer %s premeasured slot %d into pointer slot %d", observer_id, slot, pointer.slot)
    return WorldState(state, world.pointers + (pointer,))


def apply_premeasurements(
    s: Union[StateVector, WorldState], events: Sequence[Premeasurement]
) -> WorldState:
    """Premeasure the events in order"""
    world = s if isinstance(s, WorldState) else WorldState(s)
    for event in events:
        world = premeasure(world, event.slot, event.family, event.observer, event.symbols)
    return world


def branch_decompose(
    world: Union[StateVector, WorldState], pointers: Optional[Sequence[PointerSlot]] = None
) -> Tuple[Branch, ...]:
    """One branch per pointer-basis component of nonzero weight, sorted by label.

    The branch amplitude is the norm of the component times the phase of the
    largest entry of its relative state, so relative states are phase-fixed.
    """
    if isinstance(world, StateVector):
        world = WorldState(world)
    pointers = tuple(world.pointers if pointers is None else pointers)
    pointer_axes = [p.slot for p in pointers]
    system_axes = [i for i in range(len(world.state.dims)) if i not in pointer_axes]
    system_dims = tuple(world.state.dims[i] for i in system_axes)

    tensor = np.moveaxis(world.state.tensor(), pointer_axes, range(len(pointer_axes)))
    shape = tuple(world.state.dims[i] for i in pointer_axes)
    branches = []
    for index in np.ndindex(*shape):
        component = np.asarray(tensor[index]).reshape(-1)
        weight = float(np.vdot(component, component).real)
        if weight < ZERO_CUTOFF:
            continue
        relative = make_state(system_dims or (1,), component)
        peak = relative.amps[int(np.argmax(np.abs(relative.amps)))]
        phase = peak / abs(peak)
        label = PointerLabel(tuple((p.observer, p.symbols[i]) for p, i in zip(pointers, index)))
        branches.append(
            Branch(label, complex(np.sqrt(weight) * phase), make_state(relative.dims, relative.amps / phase))
        )
    return tuple(sorted(branches, key=lambda b: b.label))


def branch_weights(branches: Sequence[Branch]) -> Dict[PointerLabel, float]:
    """Label to Born weight"""
    return {b.label: b.weight for b in branches}


@dataclass(frozen=True, eq=False)
class OrderReport:
    first: Tuple[Branch, ...]
    second: Tuple[Branch, ...]
    max_difference: float

    @property
    def consistent(self) -> bool:
        return self.max_difference < TOLERANCE


def same_family(a: ProjectiveFamily, b: ProjectiveFamily) -> bool:
    """Equal outcome count and matching projector matrices within TOLERANCE"""
    if len(a) != len(b) or a.dims != b.dims:
        return False
    return all(np.allclose(p.matrix, q.matrix, rtol=0.0, atol=TOLERANCE) for p, q in zip(a, b))


def _same_event(a: Premeasurement, b: Premeasurement) -> bool:
    return a.slot == b.slot and a.symbols == b.symbols and same_family(a.family, b.family)


def order_independence(
    s: StateVector, first: Sequence[Premeasurement], second: Sequence[Premeasurement]
) -> OrderReport:
    """Compare the branch sets reached by two orders of the same premeasurements"""
    by_observer = {e.observer: e for e in first}
    if len(by_observer) != len(first):
        raise ValueError("each observer may premeasure once per order")
    if len(second) != len(first) or any(
        e.observer not in by_observer or not _same_event(e, by_observer[e.observer])
        for e in second
    ):
        raise ValueError("both orders must contain the same premeasurements")

    a = branch_decompose(apply_premeasurements(s, first))
    b = branch_decompose(apply_premeasurements(s, second))
    if [x.label for x in a] != [y.label for y in b]:
        logger.warning("Branch labels differ between the two orders")
        return OrderReport(a, b, LABEL_MISMATCH)

    amps_a = np.array([x.amplitude for x in a])
    amps_b = np.array([y.amplitude for y in b])
    overlap = np.vdot(amps_b, amps_a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    difference = float(np.max(np.abs(amps_a - phase * amps_b))) if len(a) else 0.0
    return OrderReport(a, b, difference)


@dataclass(frozen=True)
class StabilityReport:
    before: Dict[PointerLabel, float]
    after: Dict[PointerLabel, float]
    max_drift: float

    @property
    def consistent(self) -> bool:
        return self.max_drift < TOLERANCE


def branch_stability(world: WorldState, unitary, slot: int) -> StabilityReport:
    """Apply a unitary on an unmeasured slot and compare branch weights"""
    if slot in world.pointer_slots:
        raise PointerError(f"would re-measure pointer: slot {slot} carries a pointer label")
    matrix = unitary.matrix if isinstance(unitary, Unitary) else np.asarray(unitary)
    lifted = lift(Unitary((matrix.shape[0],), matrix), world.state.dims, slot)
    evolved = WorldState(
        StateVector(world.state.dims, lifted.matrix @ world.state.amps), world.pointers
    )
    before = branch_weights(branch_decompose(world))
    after = branch_weights(branch_decompose(evolved))
    drift = max(abs(before.get(k, 0.0) - after.get(k, 0.0)) for k in set(before) | set(after))
    return StabilityReport(before, after, drift)


def epr_events() -> Tuple[Premeasurement, Premeasurement]:
    """Alice reads slot 0 and Bob slot 1, both along z"""
    z = computational_family(2)
    return (
        Premeasurement(0, z, "Alice", SPIN_SYMBOLS),
        Premeasurement(1, z, "Bob", SPIN_SYMBOLS),
    )


def epr_worlds(alice_first: bool = True, spectator: Optional[StateVector] = None) -> WorldState:
    """The singlet after both observers premeasured, optionally with a spectator subsystem"""
    state = singlet_state()
    if spectator is not None:
        state = tensor_state(state, spectator)
    alice, bob = epr_events()
    return apply_premeasurements(state, (alice, bob) if alice_first else (bob, alice))
