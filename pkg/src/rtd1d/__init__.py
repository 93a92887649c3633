"""rtd1d: self-consistent 1D Schrodinger-Poisson simulation of resonant
tunneling diodes, with resonance-aware frequency integration for both the
stationary and transient regimes."""

from .config import RunConfig, build_config, emit_config, ingest_config
from .core import BiasSchedule, DeviceGeometry, Grids, PhysicalParams
from .driver import (
    StationaryArtifacts,
    TransientArtifacts,
    cached_stationary,
    emit_stationary,
    emit_transient,
    run_stationary,
    run_transient,
)
from .resonance import Resonance, solve_resonance

__all__ = [
    "BiasSchedule",
    "DeviceGeometry",
    "Grids",
    "PhysicalParams",
    "Resonance",
    "RunConfig",
    "StationaryArtifacts",
    "TransientArtifacts",
    "build_config",
    "cached_stationary",
    "emit_config",
    "emit_stationary",
    "emit_transient",
    "ingest_config",
    "run_stationary",
    "run_transient",
    "solve_resonance",
]
