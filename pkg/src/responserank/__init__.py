"""Learning preference strength from response-time-ranked comparisons.

Submodules: ``synth`` (data generation), ``ranking`` (stratified rankings and
batch packing), ``model`` (utility network + AdamW), ``losses``, ``metrics``,
``learners`` and ``harness`` (seeded experiment sweeps).
"""
from .harness import ExperimentConfig, run_condition, run_sweep
from .learners import Learner, fit
from .losses import bt_bce, pl_nll
from .metrics import pdc
from .synth import LabelerConfig, LabelerKind, build_dataset

__all__ = ["ExperimentConfig", "run_condition", "run_sweep", "Learner", "fit", "bt_bce",
           "pl_nll", "pdc", "LabelerConfig", "LabelerKind", "build_dataset"]
__version__ = "0.1.0"
