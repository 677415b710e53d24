"""Everything attached to one characteristic angle: c_hat, its cycle data, kneading sequence, parameter ray."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache

from ..angles import ExactAngle
from ..boettcher import ParameterRay, land_parameter_ray
from ..dynamics import MisiurewiczData, landing_data, solve_misiurewicz
from ..symbolic import ItinerarySeq, classify_angle, kneading
from .partition import PartitionCurve, build_partition


@dataclass
class MisiurewiczContext:
    theta: ExactAngle
    c_hat: complex
    data: MisiurewiczData
    e: ItinerarySeq
    ray: ParameterRay
    _partitions: dict = field(default_factory=dict, repr=False)
    _eps: dict = field(default_factory=dict, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    def parameter_at(self, eps: float) -> tuple[complex, float]:
        """(c, potential) on the parameter ray with |c - c_hat| = eps."""
        with self._lock:
            if eps not in self._eps:
                self._eps[eps] = self.ray.at_distance(eps)
            return self._eps[eps]

    def at_potential(self, g: float) -> complex:
        with self._lock:
            return self.ray.at_potential(g)

    def partition(self, c: complex) -> PartitionCurve:
        key = complex(c)
        with self._lock:
            if key not in self._partitions:
                self._partitions[key] = build_partition(key, self.theta)
            return self._partitions[key]

    def partition_at_landing(self) -> PartitionCurve:
        key = ("landing", self.c_hat)
        with self._lock:
            if key not in self._partitions:
                self._partitions[key] = build_partition(self.c_hat, self.theta, landing=self.c_hat)
            return self._partitions[key]

    def partition_at_eps(self, eps: float) -> PartitionCurve:
        if eps == 0:
            return self.partition_at_landing()
        return self.partition(self.parameter_at(eps)[0])


def make_context(theta: ExactAngle, r0: float = 2.0, tol: float = 1e-10) -> MisiurewiczContext:
    """Land R_M(theta), polish the landing point as a Misiurewicz root and collect its data."""
    if theta.num == 0 or theta.den % 2:
        raise ValueError(f"angle {theta} must be nonzero with even denominator")
    cls = classify_angle(theta)
    c0, _, _, _, poly = land_parameter_ray(theta, cls.period, r0, tol)
    # the critical value has the angle's preperiod, so the critical point has one more
    c_hat = solve_misiurewicz(cls.preperiod + 1, cls.period, c0)
    data = landing_data(c_hat)
    ray = ParameterRay(theta, c_hat, poly=poly)
    return MisiurewiczContext(theta, c_hat, data, kneading(theta), ray)


@lru_cache(maxsize=16)
def cached_context(theta: ExactAngle) -> MisiurewiczContext:
    return make_context(theta)
