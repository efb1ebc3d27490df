"""Compositional hybrid dynamical systems: phase spaces, open systems, networks, simulation."""

from .geometry import Box, Interval, SmoothFn, default_tol, set_default_tol
from .hyds import Execution, HybridDynamicalSystem, check_hds_map, validate_execution
from .hyph import HybridPhaseSpace, HyPhMap, Path, UnderlyingPoint, product_all
from .networks import Network, NetworkMap, induced_system_map
from .opensys import HybridSubmersion, OpenSystem, SSubMap
from .relations import Guard, Relation
from .simulate import JumpPolicy, SimConfig, simulate

__version__ = "0.1.0"
