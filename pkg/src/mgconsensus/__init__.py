"""Self-triggered ternary consensus for networked microgrids under DoS.

Deterministic event-driven simulator plus the offline design, online
self-adaptation, and attack-trace tooling around it.
"""

from .aggregation import DgSpec, MgEquivalent, aggregate, dg_from_rating, share_power
from .attacks import (
    ChannelSet,
    DosParams,
    DosSequence,
    generate_channel_set,
    generate_sequence,
    podf_bound,
    podf_witness,
    verify_sequence,
    worst_case_sequence,
)
from .controller import clock_reset, deadzone_sign, dwell_time_floor
from .design import (
    DesignCertificate,
    consensus_set_check,
    convergence_bound,
    global_design,
    local_design,
    lyapunov,
)
from .engine import EngineConfig, RunMetrics, Simulation
from .errors import ConfigError
from .scenario import Scenario, load_scenario, parse_scenario
from .topology import Topology, load_topology

__version__ = "1.0.0"

__all__ = [
    "ChannelSet", "ConfigError", "DesignCertificate", "DgSpec", "DosParams",
    "DosSequence", "EngineConfig", "MgEquivalent", "RunMetrics", "Scenario",
    "Simulation", "Topology", "aggregate", "clock_reset", "consensus_set_check",
    "convergence_bound", "deadzone_sign", "dg_from_rating", "dwell_time_floor",
    "generate_channel_set", "generate_sequence", "global_design", "load_scenario",
    "load_topology", "local_design", "lyapunov", "parse_scenario", "podf_bound",
    "podf_witness", "share_power", "verify_sequence", "worst_case_sequence",
    "__version__",
]
