"""
Two-slit spherical waves, the far-field fringe law and telescope detection

Geometry is the plane holding the slits and the screen. ``from_geometry``
places the slits at (0, +d/2) and (0, -d/2) and the screen on an arc of
radius ``screen_distance`` around their midpoint, so that at angle theta the
path difference |r - r2| - |r - r1| tends to d sin(theta).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .measure import JointDistribution
from .qcore import TOLERANCE

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

TELESCOPE_LABELS = ("T1", "T2")


class GeometryError(ValueError):
    """Slit, screen or telescope placement is unusable"""


def check_theta_grid(theta_grid) -> np.ndarray:
    """Read-only copy of a strictly increasing grid inside (-pi/2, pi/2)"""
    grid = np.asarray(theta_grid, dtype=float).reshape(-1)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("theta_grid nonempty and strictly increasing")
    if np.any(np.abs(grid) >= np.pi / 2):
        raise ValueError("theta_grid angles must satisfy |theta| < pi/2")
    grid.setflags(write=False)
    return grid


def symmetric_grid(theta_bins: int, theta_max: float) -> np.ndarray:
    """``theta_bins`` equally spaced angles covering [-theta_max, theta_max]"""
    if theta_bins < 2:
        raise ValueError(
            "theta_grid nonempty and strictly increasing needs at least 2 bins "
            f"to span an interval, got {theta_bins}"
        )
    if not 0 < theta_max < np.pi / 2:
        raise ValueError(f"theta_max must lie in (0, pi/2), got {theta_max}")
    return check_theta_grid(np.linspace(-theta_max, theta_max, theta_bins))


@dataclass(frozen=True, eq=False)
class FringePattern:
    """Screen intensity over a theta grid, normalized to grid-mean 1"""

    theta: np.ndarray
    intensity: np.ndarray

    def __post_init__(self):
        if np.any(self.intensity < 0):
            raise ValueError("intensity must be nonnegative")

    @classmethod
    def from_raw(cls, theta, raw) -> "FringePattern":
        raw = np.asarray(raw, dtype=float)
        mean = float(np.mean(raw))
        if mean <= 0:
            raise ValueError("pattern has no intensity on the grid")
        return cls(np.asarray(theta, dtype=float), np.clip(raw / mean, 0.0, None))

    @property
    def visibility(self) -> float:
        high, low = float(np.max(self.intensity)), float(np.min(self.intensity))
        return (high - low) / (high + low)


@dataclass(frozen=True, eq=False)
class WheelerConfig:
    k: float
    r1: Point
    r2: Point
    screen_distance: float
    theta_grid: np.ndarray
    telescope_aim: Point
    acceptance_halfwidth: float

    def __post_init__(self):
        object.__setattr__(self, "r1", tuple(float(x) for x in self.r1))
        object.__setattr__(self, "r2", tuple(float(x) for x in self.r2))
        object.__setattr__(self, "telescope_aim", tuple(float(x) for x in self.telescope_aim))
        object.__setattr__(self, "theta_grid", check_theta_grid(self.theta_grid))
        if self.k <= 0:
            raise GeometryError(f"k must be positive, got {self.k}")
        if self.d == 0:
            raise GeometryError("slit positions r1 and r2 must differ")
        if self.screen_distance <= self.d:
            raise GeometryError(
                f"screen_distance {self.screen_distance} must exceed the slit separation {self.d}"
            )
        if self.acceptance_halfwidth <= 0:
            raise GeometryError("acceptance_halfwidth must be positive")
        separation = self.slit_separation_angle()
        if separation <= 2 * self.acceptance_halfwidth:
            raise GeometryError(
                f"acceptance windows of half-width {self.acceptance_halfwidth} overlap: "
                f"slits are {separation:.3e} rad apart as seen from the telescope"
            )

    @property
    def d(self) -> float:
        return float(np.hypot(self.r1[0] - self.r2[0], self.r1[1] - self.r2[1]))

    def slit_separation_angle(self) -> float:
        """Angle between the two slit directions seen from the telescope"""
        t = np.array(self.telescope_aim)
        u = np.array(self.r1) - t
        v = np.array(self.r2) - t
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0 or nv == 0:
            raise GeometryError("telescope cannot sit on a slit")
        cosine = np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)
        return float(np.arccos(cosine))

    @classmethod
    def from_geometry(
        cls,
        k: float,
        d: float,
        screen_distance: float,
        theta_grid: Sequence[float],
        telescope_angle: float = 0.0,
        acceptance_halfwidth: Optional[float] = None,
    ) -> "WheelerConfig":
        if d <= 0:
            raise GeometryError(f"slit separation d must be positive, got {d}")
        if not abs(telescope_angle) < np.pi / 2:
            raise GeometryError("telescope_angle must satisfy |angle| < pi/2")
        r1, r2 = (0.0, d / 2), (0.0, -d / 2)
        aim = (
            screen_distance * np.cos(telescope_angle),
            screen_distance * np.sin(telescope_angle),
        )
        if acceptance_halfwidth is None:
            u, v = np.subtract(r1, aim), np.subtract(r2, aim)
            cosine = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
            acceptance_halfwidth = float(np.arccos(np.clip(cosine, -1.0, 1.0))) / 4
            logger.debug("Default acceptance half-width %.6g rad", acceptance_halfwidth)
        return cls(k, r1, r2, screen_distance, theta_grid, aim, acceptance_halfwidth)


def screen_point(theta, config: WheelerConfig) -> np.ndarray:
    """Screen position(s) at angle theta, measured from the slit midpoint"""
    mid = (np.array(config.r1) + np.array(config.r2)) / 2
    theta = np.asarray(theta, dtype=float)
    offsets = config.screen_distance * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return mid + offsets


def _distances(r: np.ndarray, config: WheelerConfig) -> Tuple[np.ndarray, np.ndarray]:
    r = np.asarray(r, dtype=float)
    d1 = np.linalg.norm(r - np.array(config.r1), axis=-1)
    d2 = np.linalg.norm(r - np.array(config.r2), axis=-1)
    return d1, d2


def psi_exact(r, config: WheelerConfig) -> Union[complex, np.ndarray]:
    """Sum of the two spherical waves leaving the slits"""
    d1, d2 = _distances(r, config)
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise GeometryError("singular point: psi is evaluated at a slit")
    psi = np.exp(1j * config.k * d1) / d1 + np.exp(1j * config.k * d2) / d2
    return complex(psi) if np.ndim(psi) == 0 else psi


def path_difference(theta, d: float):
    """Far-field path difference d sin(theta)"""
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) >= np.pi / 2):
        raise ValueError("path_difference needs |theta| < pi/2")
    result = d * np.sin(theta)
    return float(result) if result.ndim == 0 else result


def far_field_intensity(theta, config: WheelerConfig):
    """|1 + exp(i k d sin theta)|^2 = 2 (1 + cos(k d sin theta))"""
    phase = config.k * path_difference(theta, config.d)
    result = 2.0 * (1.0 + np.cos(phase))
    return float(result) if np.ndim(result) == 0 else result


def far_field_pattern(config: WheelerConfig) -> FringePattern:
    """Far-field intensity over the config grid, grid-mean 1"""
    return FringePattern.from_raw(config.theta_grid, far_field_intensity(config.theta_grid, config))


def exact_screen_intensity(theta, config: WheelerConfig):
    """|psi|^2 |r - r1|^2 on the screen, which the far-field law approximates"""
    r = screen_point(theta, config)
    d1, _ = _distances(r, config)
    return np.abs(psi_exact(r, config)) ** 2 * d1**2


def exact_screen_pattern(config: WheelerConfig) -> FringePattern:
    return FringePattern.from_raw(
        config.theta_grid, exact_screen_intensity(config.theta_grid, config)
    )


def far_field_relative_error(theta: float, config: WheelerConfig) -> float:
    """|exact - far field| / far field at one screen angle"""
    exact = float(exact_screen_intensity(theta, config))
    approx = far_field_intensity(theta, config)
    return abs(exact - approx) / approx


def predicted_maxima(config: WheelerConfig) -> np.ndarray:
    """Angles on the grid's span where k d sin(theta) = 2 n pi"""
    grid = config.theta_grid
    kd = config.k * config.d
    n_max = int(np.floor(kd * np.sin(np.max(np.abs(grid))) / (2 * np.pi)))
    sines = 2 * np.pi * np.arange(-n_max, n_max + 1) / kd
    angles = np.arcsin(sines)
    return angles[(angles >= grid[0]) & (angles <= grid[-1])]


def locate_maxima(pattern: FringePattern) -> np.ndarray:
    """Interior grid angles where the intensity is a strict local maximum"""
    y = pattern.intensity
    interior = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])) + 1
    return pattern.theta[interior]


def telescope_probabilities(config: WheelerConfig) -> Tuple[float, float]:
    """Detection chances of the telescopes aimed at slit 1 and slit 2.

    Weights are the inverse squared distances from the telescope to each slit;
    the acceptance windows are treated as perfectly separating.
    """
    t = np.array(config.telescope_aim)
    d1 = float(np.linalg.norm(t - np.array(config.r1)))
    d2 = float(np.linalg.norm(t - np.array(config.r2)))
    if d1 <= TOLERANCE or d2 <= TOLERANCE:
        raise GeometryError("telescope cannot sit on a slit")
    w1, w2 = 1.0 / d1**2, 1.0 / d2**2
    logger.debug("Telescope distances to the slits: %.6g, %.6g", d1, d2)
    return w1 / (w1 + w2), w2 / (w1 + w2)


def delayed_choice(
    config: WheelerConfig, screen_in: bool
) -> Union[FringePattern, JointDistribution]:
    """Screen in: the far-field fringe pattern. Screen out: telescope click chances."""
    if screen_in:
        return far_field_pattern(config)
    p1, p2 = telescope_probabilities(config)
    return JointDistribution(
        {(0,): p1, (1,): p2}, labels=(TELESCOPE_LABELS,), names=("telescope",)
    )
