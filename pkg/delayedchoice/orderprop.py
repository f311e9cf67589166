"""
Randomized and exhaustive checks that reordering measurements across
subsystems leaves joint probabilities unchanged
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .measure import MeasurementEvent, Schedule, joint_probability
from .qcore import (
    ProjectiveFamily,
    StateVector,
    family_from_basis,
    identity,
    make_state,
    spin_family,
)

logger = logging.getLogger(__name__)

GENERATOR_NAME = "PCG64"
MAX_EVENTS = 12
# largest joint dimension a random trial may draw
MAX_SPACE_DIM = 64
SPREAD_TOLERANCE = 1e-12
SEED_BOUND = 2**62


class ScheduleTooLargeError(ValueError):
    """Too many events to enumerate every interleaving"""


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an integer seed or a SeedSequence"""
    return np.random.Generator(np.random.PCG64(seed))


def random_state(dims: Sequence[int], seed: int) -> StateVector:
    """Normalized complex Gaussian state, deterministic per seed"""
    rng = make_rng(seed)
    size = int(np.prod(dims))
    raw = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return make_state(dims, raw)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Unitary from the phase-fixed QR decomposition of a complex Gaussian matrix"""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    diagonal = np.diag(r)
    return q * (diagonal / np.abs(diagonal))


def random_family(dim: int, seed: int) -> ProjectiveFamily:
    """Rank-1 complete family from a seeded random orthonormal basis"""
    if dim < 1:
        raise ValueError(f"dimension must be at least 1, got {dim}")
    if dim == 1:
        return ProjectiveFamily((identity((1,)),))
    unitary = random_unitary(dim, make_rng(seed))
    return family_from_basis(unitary.T)


def interleavings(n: int, m: int) -> Iterator[Tuple[int, ...]]:
    """Yield, for each merge of an n- and an m-sequence, the positions taken by the first"""
    return itertools.combinations(range(n + m), n)


@dataclass(frozen=True)
class InterleavingReport:
    num_interleavings: int
    probabilities: Tuple[float, ...]
    max_spread: float
    seed: int = 0

    @property
    def consistent(self) -> bool:
        return self.max_spread < SPREAD_TOLERANCE


def _single_slot(events: Sequence[MeasurementEvent], name: str):
    slots = {e.slot for e in events}
    if len(slots) > 1:
        raise ValueError(f"all events of {name} must be on one slot, got slots {sorted(slots)}")
    return slots.pop() if slots else None


def check_interleavings(
    s: StateVector,
    seq_a: Sequence[MeasurementEvent],
    seq_b: Sequence[MeasurementEvent],
    seed: int = 0,
    control: bool = False,
) -> InterleavingReport:
    """Evaluate the joint probability of every order-preserving merge of two sequences.

    Sequences sharing one slot are logged at WARNING unless ``control`` marks
    the run as a deliberate same-slot comparison.
    """
    seq_a, seq_b = tuple(seq_a), tuple(seq_b)
    n, m = len(seq_a), len(seq_b)
    if n + m > MAX_EVENTS:
        raise ScheduleTooLargeError(
            f"state space too large: {n + m} events exceed the limit of {MAX_EVENTS}"
        )
    slot_a = _single_slot(seq_a, "seq_a")
    slot_b = _single_slot(seq_b, "seq_b")
    if slot_a is not None and slot_a == slot_b:
        log = logger.debug if control else logger.warning
        log("Both sequences act on slot %d; order invariance is not expected", slot_a)

    probabilities: List[float] = []
    for positions in interleavings(n, m):
        events = []
        a, b = iter(seq_a), iter(seq_b)
        taken = set(positions)
        for index in range(n + m):
            events.append(next(a) if index in taken else next(b))
        probabilities.append(joint_probability(s, Schedule(tuple(events))))

    spread = max(probabilities) - min(probabilities)
    logger.debug("%d interleavings, spread %.3e", len(probabilities), spread)
    return InterleavingReport(len(probabilities), tuple(probabilities), spread, seed)


def same_slot_control() -> InterleavingReport:
    """|up_z> with a z measurement and an x measurement on the same particle"""
    up = make_state((2,), [1, 0])
    z_up = MeasurementEvent(0, spin_family(0.0), 0)
    x_plus = MeasurementEvent(0, spin_family(np.pi / 2), 0)
    return check_interleavings(up, [z_up], [x_plus], control=True)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    dims: Tuple[int, int]
    len_a: int
    len_b: int
    num_interleavings: int
    max_spread: float


@dataclass(frozen=True)
class CampaignSummary:
    trials: int
    seed: int
    worst_spread: float
    worst_trial: int
    total_interleavings: int
    results: Tuple[TrialResult, ...]
    generator: str = GENERATOR_NAME

    @property
    def consistent(self) -> bool:
        return self.worst_spread < SPREAD_TOLERANCE


def _random_sequence(
    rng: np.random.Generator, slot: int, dim: int, length: int
) -> List[MeasurementEvent]:
    events = []
    for _ in range(length):
        family = random_family(dim, int(rng.integers(SEED_BOUND)))
        events.append(MeasurementEvent(slot, family, int(rng.integers(dim))))
    return events


def run_trial(trial: int, seed: int, max_dims: Tuple[int, int], max_len: int) -> TrialResult:
    """One seeded random instance; its randomness depends only on (seed, trial)"""
    rng = make_rng(np.random.SeedSequence([seed, trial]))
    dims = (int(rng.integers(2, max_dims[0] + 1)), int(rng.integers(2, max_dims[1] + 1)))
    len_a = int(rng.integers(0, max_len + 1))
    len_b = int(rng.integers(0, max_len + 1))
    state = random_state(dims, int(rng.integers(SEED_BOUND)))
    seq_a = _random_sequence(rng, 0, dims[0], len_a)
    seq_b = _random_sequence(rng, 1, dims[1], len_b)
    report = check_interleavings(state, seq_a, seq_b, seed=seed)
    return TrialResult(trial, dims, len_a, len_b, report.num_interleavings, report.max_spread)


def fuzz_campaign(
    trials: int,
    max_dims: Tuple[int, int] = (4, 4),
    max_len: int = 3,
    seed: int = 0,
    workers: int = 1,
) -> CampaignSummary:
    """Run ``trials`` seeded interleaving checks and keep the worst spread"""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if min(max_dims) < 2:
        raise ValueError(f"max_dims must be at least 2 per slot, got {tuple(max_dims)}")
    if max_dims[0] * max_dims[1] > MAX_SPACE_DIM:
        raise ValueError(
            f"state space too large: max_dims {tuple(max_dims)} exceed dimension {MAX_SPACE_DIM}"
        )
    if 2 * max_len > MAX_EVENTS:
        raise ScheduleTooLargeError(
            f"state space too large: max_len {max_len} allows more than {MAX_EVENTS} events"
        )
    max_dims = (int(max_dims[0]), int(max_dims[1]))

    def work(trial: int) -> TrialResult:
        return run_trial(trial, seed, max_dims, max_len)

    logger.info("Running %d interleaving trials (seed %d, %d workers)", trials, seed, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(work, range(trials)))
    else:
        results = tuple(work(t) for t in range(trials))

    worst = max(results, key=lambda r: (r.max_spread, -r.trial))
    return CampaignSummary(
        trials=trials,
        seed=seed,
        worst_spread=worst.max_spread,
        worst_trial=worst.trial,
        total_interleavings=sum(r.num_interleavings for r in results),
        results=results,
    )

