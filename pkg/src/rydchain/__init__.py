"""Simulation toolkit for spin chains of laser-trapped circular Rydberg atoms.

Van der Waals pair couplings map onto an XXZ chain in a transverse
drive; the package covers the static model (exact diagonalization and
DMRG), adiabatic drive ramps with atomic-motion noise, the evaporative
preparation of fixed-length chains, the trapping optics, and the
lifetime budget of the resulting register.
"""

__version__ = "0.1.0"

from .couplings import (
    COUPLINGS_48_50,
    CouplingSet,
    FieldCurve,
    SpinCouplings,
    couplings_at_fields,
    exchange_time,
    pair_energy,
    spin_couplings,
)
from .model import (
    ChainSpec,
    MotionalChainSpec,
    OperatorSpec,
    build_chain,
    build_motional_chain,
)
from .ed import (
    GroundResult,
    TimeDependentHamiltonian,
    evolve,
    fidelity,
    ground_state,
    measure,
    product_state,
)
from .mps import MpsState, dmrg_ground_state, phase_point, phase_scan
from .ramps import RampSchedule, SweepResult, generate_ramp, quench_ramp, run_sweep, sweep_spec
from .evaporation import (
    EvaporationConfig,
    Schedule,
    TrajectoryEnsemble,
    ensemble,
    evaporation_curve,
    integrate,
    paper_config,
    prepared_chain_trajectories,
    reduced_config,
)
from .trap import BeamSpec, TrapReport, paper_beams, trap_profile
from .lifetime import LifetimeBudget, LossChannel, combine, reference_channels

__all__ = [
    "__version__",
    "COUPLINGS_48_50",
    "CouplingSet",
    "FieldCurve",
    "SpinCouplings",
    "couplings_at_fields",
    "exchange_time",
    "pair_energy",
    "spin_couplings",
    "ChainSpec",
    "MotionalChainSpec",
    "OperatorSpec",
    "build_chain",
    "build_motional_chain",
    "GroundResult",
    "TimeDependentHamiltonian",
    "evolve",
    "fidelity",
    "ground_state",
    "measure",
    "product_state",
    "MpsState",
    "dmrg_ground_state",
    "phase_point",
    "phase_scan",
    "RampSchedule",
    "SweepResult",
    "generate_ramp",
    "quench_ramp",
    "run_sweep",
    "sweep_spec",
    "EvaporationConfig",
    "Schedule",
    "TrajectoryEnsemble",
    "ensemble",
    "evaporation_curve",
    "integrate",
    "paper_config",
    "prepared_chain_trajectories",
    "reduced_config",
    "BeamSpec",
    "TrapReport",
    "paper_beams",
    "trap_profile",
    "LifetimeBudget",
    "LossChannel",
    "combine",
    "reference_channels",
]
