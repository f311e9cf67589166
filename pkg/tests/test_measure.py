"""
Unit tests for Born probabilities, collapse and schedules
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delayedchoice.measure import (
    ImpossibleOutcomeError,
    JointDistribution,
    MeasurementEvent,
    Schedule,
    bayes_symmetry_check,
    born_probability,
    chained_conditional_probability,
    collapse,
    conditional_probability,
    correlation,
    event_projector,
    joint_distribution,
    joint_probability,
    raw_product_expectation,
)
from delayedchoice.orderprop import make_rng, random_family, random_state
from delayedchoice.qcore import DimensionError, computational_family, make_state, spin_family


def z_event(slot, outcome):
    return MeasurementEvent(slot, computational_family(2), outcome)


class TestBornRule:
    """Tests for single-event probabilities and collapse"""

    def test_singlet_z_probabilities(self, singlet):
        """Test P(up) = 1/2 on either particle of the singlet"""
        p = event_projector(singlet.dims, z_event(0, 0))
        assert born_probability(singlet, p) == pytest.approx(0.5)

    def test_collapse(self, singlet):
        """Test that Alice up leaves Bob down"""
        collapsed = collapse(singlet, event_projector(singlet.dims, z_event(0, 0)))
        assert abs(collapsed[(0, 1)]) == pytest.approx(1.0)

    def test_collapse_impossible_outcome(self):
        """Test collapsing onto a zero-probability outcome raises"""
        s = make_state((2,), [1, 0])
        with pytest.raises(ImpossibleOutcomeError, match="impossible outcome"):
            collapse(s, event_projector(s.dims, z_event(0, 1)))

    def test_conditional_probability(self, singlet):
        """Test perfect anticorrelation along z"""
        assert conditional_probability(singlet, z_event(1, 0), z_event(0, 0)) == pytest.approx(0.0)
        assert conditional_probability(singlet, z_event(1, 1), z_event(0, 0)) == pytest.approx(1.0)

    def test_conditional_on_impossible_event(self):
        """Test conditioning on a zero-probability event raises"""
        s = make_state((2, 2), [1, 0, 0, 0])
        with pytest.raises(ImpossibleOutcomeError):
            conditional_probability(s, z_event(1, 0), z_event(0, 1))

    def test_event_slot_out_of_range(self, singlet):
        """Test events must address an existing slot"""
        with pytest.raises(DimensionError):
            event_projector(singlet.dims, z_event(2, 0))

    def test_outcome_out_of_range(self):
        """Test outcomes must index the family"""
        with pytest.raises(ValueError):
            z_event(0, 2)

    def test_complete_family_sums_to_one(self):
        """Test the outcome probabilities of a complete family add up to 1"""
        for seed in range(50):
            s = random_state((3, 2), seed)
            family = random_family(3, 100 + seed)
            total = sum(
                born_probability(s, event_projector(s.dims, MeasurementEvent(0, family, i)))
                for i in range(3)
            )
            assert abs(total - 1.0) < 1e-12


class TestSchedules:
    """Tests for sequential joint probabilities"""

    def test_empty_schedule(self, singlet):
        """Test the empty schedule has probability 1"""
        assert joint_probability(singlet, Schedule()) == pytest.approx(1.0)

    def test_cross_slot_order_irrelevant(self):
        """Test both orders of events on different slots agree"""
        s = random_state((2, 3), 7)
        a = MeasurementEvent(0, random_family(2, 1), 1)
        b = MeasurementEvent(1, random_family(3, 2), 2)
        first = joint_probability(s, Schedule((a, b)))
        second = joint_probability(s, Schedule((b, a)))
        assert abs(first - second) < 1e-12

    def test_same_slot_order_matters(self):
        """Test z then x against x then z on |up>"""
        up = make_state((2,), [1, 0])
        z = MeasurementEvent(0, spin_family(0.0), 0)
        x = MeasurementEvent(0, spin_family(np.pi / 2), 0)
        assert joint_probability(up, Schedule((z, x))) == pytest.approx(0.5)
        assert joint_probability(up, Schedule((x, z))) == pytest.approx(0.25)

    def test_raw_product_differs_from_chain(self):
        """Test that the single-product value is not a joint probability for same-slot events"""
        up = make_state((2,), [1, 0])
        z = MeasurementEvent(0, spin_family(0.0), 0)
        x = MeasurementEvent(0, spin_family(np.pi / 2), 0)
        raw = raw_product_expectation(up, Schedule((x, z)))
        assert raw == pytest.approx(0.5)
        assert joint_probability(up, Schedule((x, z))) == pytest.approx(0.25)

    def test_raw_product_agrees_across_slots(self):
        """Test the single product equals the chain norm for commuting events"""
        s = random_state((2, 2), 3)
        a = MeasurementEvent(0, random_family(2, 4), 0)
        b = MeasurementEvent(1, random_family(2, 5), 1)
        raw = raw_product_expectation(s, Schedule((a, b)))
        assert abs(raw - joint_probability(s, Schedule((a, b)))) < 1e-12

    def test_chained_conditionals_match_chain_norm(self):
        """Test the chain rule on a fixed mixed-slot schedule"""
        s = random_state((3, 2), 11)
        events = (
            MeasurementEvent(0, random_family(3, 1), 0),
            MeasurementEvent(1, random_family(2, 2), 1),
            MeasurementEvent(0, random_family(3, 3), 2),
        )
        chained = chained_conditional_probability(s, Schedule(events))
        assert abs(chained - joint_probability(s, Schedule(events))) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_chain_rule_random_schedules(self, seed):
        """Test stepwise conditionals multiply to the chain norm on random schedules"""
        rng = make_rng(seed)
        s = random_state((2, 3), seed)
        events = []
        for _ in range(int(rng.integers(1, 5))):
            slot = int(rng.integers(2))
            dim = s.dims[slot]
            family = random_family(dim, int(rng.integers(2**32)))
            events.append(MeasurementEvent(slot, family, int(rng.integers(dim))))
        schedule = Schedule(tuple(events))

        chained = chained_conditional_probability(s, schedule)

        assert abs(chained - joint_probability(s, schedule)) < 1e-12

    def test_chained_conditionals_zero_branch(self):
        """Test an impossible step makes the product 0"""
        s = make_state((2,), [1, 0])
        assert chained_conditional_probability(s, Schedule((z_event(0, 1),))) == 0.0


class TestJointDistribution:
    """Tests for distributions over outcome tuples"""

    def test_singlet_distribution(self, singlet):
        """Test the singlet gives only opposite z outcomes"""
        dist = joint_distribution(singlet, [(0, spin_family(0.0)), (1, spin_family(0.0))])
        assert dist[(0, 1)] == pytest.approx(0.5)
        assert dist[(0, 0)] == 0.0
        assert dist.total() == pytest.approx(1.0)

    def test_singlet_correlation(self, singlet):
        """Test E(a, b) = -cos(a - b) for the singlet"""
        dist = joint_distribution(singlet, [(0, spin_family(0.0)), (1, spin_family(np.pi / 3))])
        assert correlation(dist) == pytest.approx(-0.5)

    def test_marginal(self, singlet):
        """Test marginals keep labels and names of the kept positions"""
        dist = joint_distribution(
            singlet,
            [(0, spin_family(0.0)), (1, spin_family(0.4))],
            labels=[("up", "down"), ("up", "down")],
            names=["alice", "bob"],
        )
        alice = dist.marginal([0])
        assert alice[(0,)] == pytest.approx(0.5)
        assert alice.names == ("alice",)
        assert alice.label((1,)) == ("down",)

    def test_tiny_entries_snap_to_zero(self):
        """Test entries below the cutoff are stored as 0"""
        dist = JointDistribution({(0,): 1e-17, (1,): 1.0})
        assert dist[(0,)] == 0.0

    def test_probability_out_of_range(self):
        """Test probabilities above 1 are rejected"""
        with pytest.raises(ValueError):
            JointDistribution({(0,): 1.5})

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_no_signaling(self, seed):
        """Test that Alice's marginal does not depend on Bob's measurement choice"""
        s = random_state((2, 3), seed)
        alice = random_family(2, seed + 1)
        first = joint_distribution(s, [(0, alice), (1, random_family(3, seed + 2))]).marginal([0])
        second = joint_distribution(s, [(0, alice), (1, random_family(3, seed + 3))]).marginal([0])
        for outcome in range(2):
            assert abs(first[(outcome,)] - second[(outcome,)]) < 1e-12


    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_marginalizing_last_family(self, seed):
        """Test summing out the last measurement gives the shorter distribution"""
        s = random_state((2, 3), seed)
        fam_a = random_family(2, seed + 1)
        fam_b = random_family(3, seed + 2)
        fam_c = random_family(2, seed + 3)

        longer = joint_distribution(s, [(0, fam_a), (1, fam_b), (0, fam_c)]).marginal([0, 1])
        shorter = joint_distribution(s, [(0, fam_a), (1, fam_b)])

        for key, p in shorter.entries.items():
            assert abs(longer[key] - p) < 1e-12

    def test_earlier_far_measurement_invisible(self):
        """Test summing over an earlier measurement on the other slot leaves P(A) unchanged"""
        for seed in range(300):
            s = random_state((2, 3), seed)
            a = MeasurementEvent(0, random_family(2, 3000 + seed), seed % 2)
            fam_b = random_family(3, 6000 + seed)
            with_b = sum(
                joint_probability(s, Schedule((MeasurementEvent(1, fam_b, j), a)))
                for j in range(3)
            )
            assert abs(with_b - joint_probability(s, Schedule((a,)))) < 1e-12


class TestBayesSymmetry:
    """Tests for the Bayes product comparison"""

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_random_states_consistent(self, seed):
        """Test Bayes symmetry on random two-qubit states"""
        s = random_state((2, 2), seed)
        a = MeasurementEvent(0, random_family(2, seed + 1), 0)
        b = MeasurementEvent(1, random_family(2, seed + 2), 1)
        report = bayes_symmetry_check(s, a, b)
        assert report.consistent
        assert not report.degenerate

    def test_degenerate_event(self):
        """Test that a zero-probability condition is reported, not raised"""
        s = make_state((2, 2), [1, 0, 0, 0])
        report = bayes_symmetry_check(s, z_event(0, 0), z_event(1, 1))
        assert report.degenerate
        assert report.consistent
        assert report.joint_weight == 0.0

    def test_same_slot_rejected(self, singlet):
        """Test the Bayes check needs two slots"""
        with pytest.raises(ValueError, match="different slots"):
            bayes_symmetry_check(singlet, z_event(0, 0), z_event(0, 1))

    def test_thousand_random_bipartite_states(self):
        """Test both Bayes products equal the squared joint amplitude on 1000 states"""
        worst = 0.0
        for seed in range(1000):
            s = random_state((2, 3), seed)
            a = MeasurementEvent(0, random_family(2, 5000 + seed), seed % 2)
            b = MeasurementEvent(1, random_family(3, 9000 + seed), seed % 3)
            worst = max(worst, bayes_symmetry_check(s, a, b).max_difference)
        assert worst < 1e-12

    def test_thousand_random_qutrit_pairs(self):
        """Test both Bayes products equal the squared joint amplitude on 1000 3x3 states"""
        worst = 0.0
        for seed in range(1000):
            s = random_state((3, 3), seed)
            a = MeasurementEvent(0, random_family(3, 7000 + seed), seed % 3)
            b = MeasurementEvent(1, random_family(3, 11000 + seed), (seed // 3) % 3)
            worst = max(worst, bayes_symmetry_check(s, a, b).max_difference)
        assert worst < 1e-12


class TestWorkedExample:
    """Tests on sqrt(0.5)|00> + sqrt(0.3)|01> + sqrt(0.2)|10>"""

    @pytest.fixture
    def state(self):
        return make_state((2, 2), [np.sqrt(0.5), np.sqrt(0.3), np.sqrt(0.2), 0])

    def test_marginal_of_a(self, state):
        """Test P(A=0) = 0.8"""
        p = born_probability(state, event_projector(state.dims, z_event(0, 0)))
        assert p == pytest.approx(0.8, abs=1e-12)

    def test_conditional_on_b(self, state):
        """Test P(A=0 | B=1) = 1"""
        p = conditional_probability(state, z_event(0, 0), z_event(1, 1))
        assert p == pytest.approx(1.0, abs=1e-12)

    def test_bayes_values(self, state):
        """Test all three Bayes values equal 0.3"""
        report = bayes_symmetry_check(state, z_event(0, 0), z_event(1, 1))
        assert report.a_given_b_times_b == pytest.approx(0.3, abs=1e-12)
        assert report.b_given_a_times_a == pytest.approx(0.3, abs=1e-12)
        assert report.joint_weight == pytest.approx(0.3, abs=1e-12)
        assert report.consistent
