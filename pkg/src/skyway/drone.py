"""Drone specification, payload-dependent range and battery bookkeeping.

Battery state is a plain float fraction in [0, 1] of a full charge.
"""
from __future__ import annotations

from dataclasses import dataclass

DIST_TOL = 1e-9  # km of slack granted to range checks


class DroneError(ValueError):
    pass


class OverloadError(DroneError):
    def __init__(self, payload: float, max_payload: float):
        self.payload = payload
        self.max_payload = max_payload
        super().__init__(f"payload {payload} kg exceeds maximum {max_payload} kg")


class InfeasibleLeg(DroneError):
    def __init__(self, length: float, available_range: float):
        self.length = length
        self.available_range = available_range
        super().__init__(f"leg of {length} km exceeds remaining range {available_range} km")


@dataclass(frozen=True)
class DroneSpec:
    """Delivery drone. Defaults are the DJI Matrice 300 figures used in the
    experiments; range runs from 33 km empty down to 3 km at max payload."""

    max_payload: float = 15.3  # kg
    max_speed: float = 82.8  # km/h
    range_empty: float = 33.0  # km
    range_full: float = 3.0  # km
    recharge_duration: float = 2.15  # h
    drop_handling_time: float = 0.0  # h
    cruise_fraction: float = 1.0  # cruise speed as a fraction of max_speed

    def __post_init__(self):
        if not self.max_payload > 0:
            raise DroneError("max_payload must be positive")
        if not self.max_speed > 0:
            raise DroneError("max_speed must be positive")
        if not 0 < self.range_full <= self.range_empty:
            raise DroneError("need 0 < range_full <= range_empty")
        if not self.recharge_duration > 0:
            raise DroneError("recharge_duration must be positive")
        if self.drop_handling_time < 0:
            raise DroneError("drop_handling_time must be non-negative")
        if not 0 < self.cruise_fraction <= 1:
            raise DroneError("cruise_fraction must lie in (0, 1]")

    @property
    def cruise_speed(self) -> float:
        return self.max_speed * self.cruise_fraction


@dataclass(frozen=True)
class Package:
    weight: float
    destination: int

    def __post_init__(self):
        if not self.weight > 0:
            raise DroneError("package weight must be positive")


def flight_range(spec: DroneSpec, payload: float) -> float:
    """Full-battery range in km, linear in payload between the two endpoints."""
    if payload < 0:
        raise DroneError("payload must be non-negative")
    if payload > spec.max_payload:
        raise OverloadError(payload, spec.max_payload)
    if payload == spec.max_payload:
        return spec.range_full
    return spec.range_empty - (spec.range_empty - spec.range_full) * (payload / spec.max_payload)


def travel_time(spec: DroneSpec, length: float) -> float:
    if length < 0:
        raise DroneError("negative length")
    return length / spec.cruise_speed


def can_fly(spec: DroneSpec, battery: float, payload: float, length: float) -> bool:
    if length < 0 or battery < 0:
        return False
    try:
        return length <= battery * flight_range(spec, payload) + DIST_TOL
    except DroneError:
        return False


def consume(spec: DroneSpec, battery: float, payload: float, length: float) -> float:
    """Battery fraction left after flying ``length`` km with ``payload`` aboard."""
    if not 0.0 <= battery <= 1.0:
        raise DroneError(f"battery fraction {battery} outside [0, 1]")
    if length < 0:
        raise DroneError("negative length")
    rng = flight_range(spec, payload)
    if length > battery * rng + DIST_TOL:
        raise InfeasibleLeg(length, battery * rng)
    if length == 0:
        return battery
    return max(0.0, battery - length / rng)
