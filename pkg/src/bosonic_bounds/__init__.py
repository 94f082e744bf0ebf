"""Upper, lower and exact ground-state energies of bosonic atoms and stars."""

__version__ = "0.1.0"

from .core_model import PhasePoint, PhysicalConstants, SystemKind, SystemSpec, reduce  # noqa: E402
from .estimates import EnergyEstimate  # noqa: E402

__all__ = ["EnergyEstimate", "PhasePoint", "PhysicalConstants", "SystemKind", "SystemSpec", "reduce", "__version__"]
