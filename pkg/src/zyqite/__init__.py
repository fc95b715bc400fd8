"""Statevector simulation of variational imaginary-time evolution for weighted MAXCUT."""

from .graph import Convention, Ensemble, WeightedGraph
from .varit import VarItConfig
from .baseline_adam import AdamConfig

__all__ = ["Convention", "Ensemble", "WeightedGraph", "VarItConfig", "AdamConfig"]
__version__ = "0.1.0"
