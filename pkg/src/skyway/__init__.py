"""Drone multi-package delivery over a skyway network of recharging stations."""
from .composer import DeliveryRequest, InfeasibleRequest, Margins, RequestError, best_plan, compose_heuristic
from .drone import DroneSpec, OverloadError, Package, flight_range, travel_time
from .exhaustive import brute_force_oracle, compose_exhaustive
from .network import SkywayNetwork, generate_network, load_network, save_network, sector_cover
from .plan import CompositionPlan, load_plan, save_plan
from .stations import OccupancySchedule, empty_schedule, generate_schedule, ready_time

__version__ = "0.1.0"
