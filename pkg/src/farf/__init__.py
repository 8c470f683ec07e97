"""FARF: fair and adaptive random forests for discriminated data streams."""

from .core import (
    AttributeSpec, ConfigError, Instance, RandomSource, SchemaError, StreamSchema,
    UndefinedStatisticError,
)
from .drift import Adwin
from .ensemble import FarfEnsemble, HoeffdingTreeLearner, StepReport
from .metrics import ConfusionTracker, DiscTracker
from .sampling import SamplingPolicy
from .tree import FairTree, SplitConfig

__version__ = "0.1.0"

__all__ = [
    "Adwin", "AttributeSpec", "ConfigError", "ConfusionTracker", "DiscTracker", "FairTree",
    "FarfEnsemble", "HoeffdingTreeLearner", "Instance", "RandomSource", "SamplingPolicy",
    "SchemaError", "SplitConfig", "StepReport", "StreamSchema", "UndefinedStatisticError",
]
