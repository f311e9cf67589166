"""
Tests for the delayed-choice quantum eraser
"""

import numpy as np
import pytest

from delayedchoice.eraser import (
    DETECTORS,
    IDLER_SLOT,
    SIGNAL_SLOT,
    CircuitMode,
    EraserConfig,
    ScheduleOrder,
    build_state,
    conditional_pattern,
    detector_family,
    idler_marginals,
    joint_screen_distribution,
    schedule_equivalence,
    screen_family,
    signal_marginal,
)
from delayedchoice.measure import MeasurementEvent, Schedule, joint_probability
from delayedchoice.tables import Table, to_csv


class TestEraserState:
    """Tests for the signal/idler state"""

    def test_dims(self, unitary_eraser):
        """Test the signal path times detector layout"""
        assert unitary_eraser.state.dims == (2, 4)
        assert unitary_eraser.mode is CircuitMode.UNITARY

    def test_which_path_detectors(self, unitary_eraser):
        """Test that D4 only follows the upper path and D3 only the lower one"""
        assert abs(unitary_eraser.amplitude("U", "D4")) == pytest.approx(0.5)
        assert unitary_eraser.amplitude("L", "D4") == 0
        assert unitary_eraser.amplitude("U", "D3") == 0
        assert abs(unitary_eraser.amplitude("L", "D3")) == pytest.approx(0.5)

    def test_unitary_idler_branches_orthogonal(self, unitary_eraser):
        """Test the two idler branches are orthogonal in unitary mode"""
        upper = unitary_eraser.idler_branch("U")
        lower = unitary_eraser.idler_branch("L")
        assert abs(np.vdot(upper, lower)) < 1e-12

    def test_paper_idler_branches_overlap(self, paper_eraser):
        """Test the two idler branches overlap in paper mode"""
        upper = paper_eraser.idler_branch("U")
        lower = paper_eraser.idler_branch("L")
        assert abs(np.vdot(upper, lower)) == pytest.approx(0.25)

    @pytest.mark.parametrize("mode", list(CircuitMode))
    def test_idler_marginals_uniform(self, mode):
        """Test each detector fires a quarter of the time"""
        marginals = idler_marginals(build_state(mode))
        for j in range(len(DETECTORS)):
            assert marginals[(j,)] == pytest.approx(0.25)
        assert marginals.total() == pytest.approx(1.0)

    @pytest.mark.parametrize("mode", list(CircuitMode))
    def test_signal_first_leaves_idler_marginals(self, mode, eraser_config):
        """Test detecting the signal first does not change P(Dj)"""
        state = build_state(mode)
        marginals = idler_marginals(state)
        family = screen_family(0.4, eraser_config)
        for j in range(len(DETECTORS)):
            total = sum(
                joint_probability(
                    state.state,
                    Schedule(
                        (
                            MeasurementEvent(SIGNAL_SLOT, family, o),
                            MeasurementEvent(IDLER_SLOT, detector_family(), j),
                        )
                    ),
                )
                for o in range(2)
            )
            assert total == pytest.approx(marginals[(j,)], abs=1e-12)

    def test_screen_family_complete(self, eraser_config):
        """Test the screen kernel family sums to the identity"""
        family = screen_family(0.3, eraser_config)
        assert np.allclose(family[0].matrix + family[1].matrix, np.eye(2))


class TestEraserPatterns:
    """Tests for conditional and marginal screen patterns"""

    def test_d1_fringes(self, unitary_eraser, eraser_config):
        """Test D1 coincidences show full-visibility fringes peaked at theta = 0"""
        pattern = conditional_pattern(unitary_eraser, "D1", eraser_config)
        assert pattern.visibility == pytest.approx(1.0, abs=1e-9)
        assert np.argmax(pattern.intensity) == 90

    def test_d2_anti_fringes(self, unitary_eraser, eraser_config):
        """Test D2 coincidences are dark where D1 is bright"""
        pattern = conditional_pattern(unitary_eraser, "D2", eraser_config)
        assert pattern.visibility == pytest.approx(1.0, abs=1e-9)
        assert pattern.intensity[90] == pytest.approx(0.0, abs=1e-12)

    def test_d1_d2_complementary(self, unitary_eraser, eraser_config):
        """Test D2 peaks at theta = pi/6 where D1 goes dark"""
        d1 = conditional_pattern(unitary_eraser, "D1", eraser_config)
        d2 = conditional_pattern(unitary_eraser, "D2", eraser_config)
        assert d1.intensity[135] == pytest.approx(0.0, abs=1e-12)
        assert d2.intensity[135] == pytest.approx(d2.intensity.max())

    @pytest.mark.parametrize("mode", list(CircuitMode))
    @pytest.mark.parametrize("detector", ["D3", "D4"])
    def test_which_path_no_fringes(self, mode, eraser_config, detector):
        """Test D3 and D4 coincidences show a flat pattern"""
        pattern = conditional_pattern(build_state(mode), detector, eraser_config)
        assert pattern.visibility < 1e-12

    @pytest.mark.parametrize("mode", list(CircuitMode))
    def test_d1_full_visibility_both_modes(self, mode, eraser_config):
        """Test D1 fringes reach full visibility in either mode"""
        pattern = conditional_pattern(build_state(mode), "D1", eraser_config)
        assert pattern.visibility == pytest.approx(1.0, abs=1e-12)

    def test_d1_plus_d2_flat(self, unitary_eraser, eraser_config):
        """Test the D1 and D2 joint columns add up to a theta-independent intensity"""
        table = joint_screen_distribution(unitary_eraser, eraser_config)
        total = table.column("D1") + table.column("D2")
        assert np.max(total) - np.min(total) < 1e-12
        assert total[0] == pytest.approx(0.5)

    def test_unknown_detector(self, unitary_eraser, eraser_config):
        """Test that detector names outside D1..D4 are rejected"""
        with pytest.raises(ValueError, match="unknown detector"):
            conditional_pattern(unitary_eraser, "D5", eraser_config)

    def test_unitary_signal_marginal_flat(self, unitary_eraser, eraser_config):
        """Test that fringes vanish once the idler outcomes are summed"""
        table = joint_screen_distribution(unitary_eraser, eraser_config)
        assert np.allclose(table.row_sums(), 1.0, atol=1e-12)
        assert signal_marginal(unitary_eraser, eraser_config).visibility == pytest.approx(0.0, abs=1e-9)

    def test_paper_signal_marginal_leaks(self, paper_eraser, eraser_config):
        """Test the overlapping idler branches leave half-visibility fringes"""
        marginal = signal_marginal(paper_eraser, eraser_config)
        assert marginal.visibility == pytest.approx(0.5, abs=1e-12)

    def test_column_matches_conditional(self, unitary_eraser, eraser_config):
        """Test the D1 column is the D1 conditional pattern scaled by P(D1)"""
        table = joint_screen_distribution(unitary_eraser, eraser_config)
        pattern = conditional_pattern(unitary_eraser, "D1", eraser_config)
        column = table.column("D1")
        assert np.allclose(column / column.mean(), pattern.intensity, atol=1e-9)


class TestScheduleEquivalence:
    """Tests for signal-first against idler-first evaluation"""

    @pytest.mark.parametrize("mode", list(CircuitMode))
    def test_orders_agree(self, mode, eraser_config):
        """Test signal-first and idler-first tables agree"""
        report = schedule_equivalence(build_state(mode), eraser_config)
        assert report.consistent
        assert report.signal_first.order is ScheduleOrder.SIGNAL_FIRST
        assert report.idler_first.order is ScheduleOrder.IDLER_FIRST

    def test_serialized_tables_identical(self, unitary_eraser, eraser_config):
        """Test the two orders serialize to the same CSV text"""
        report = schedule_equivalence(unitary_eraser, eraser_config)

        def render(table):
            rows = [tuple(float(x) for x in row) for row in table.density]
            return to_csv(Table(DETECTORS, rows))

        assert render(report.signal_first) == render(report.idler_first)


class TestEraserConfig:
    """Tests for eraser configuration"""

    def test_default_grid(self, eraser_config):
        """Test the default grid has 181 bins from -pi/3 with 0 in the middle"""
        assert eraser_config.theta_grid.size == 181
        assert eraser_config.theta_grid[0] == pytest.approx(-np.pi / 3)
        assert eraser_config.theta_grid[90] == pytest.approx(0.0, abs=1e-15)

    def test_single_bin_rejected(self):
        """Test that one theta bin is rejected"""
        with pytest.raises(ValueError, match="theta_grid nonempty and strictly increasing"):
            EraserConfig.from_bins(1.0, 1.0, 1)

    def test_nonpositive_k_rejected(self):
        """Test that k must be positive"""
        with pytest.raises(ValueError):
            EraserConfig.from_bins(0.0, 1.0, 11)

    def test_mode_from_string(self):
        """Test that modes can be given as strings"""
        config = EraserConfig.from_bins(1.0, 1.0, 11, "paper")
        assert config.mode is CircuitMode.PAPER
