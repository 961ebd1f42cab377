"""Trust-region method for total-variation-regularized integer optimal control.

The package solves min F(v) + alpha TV(v) over integer-valued
piecewise-constant controls on a 1D domain by sequential linear integer
programming: each step linearizes F, solves the resulting L1 trust-region
integer subproblem exactly by dynamic programming, and accepts or shrinks
the radius by an actual-vs-predicted reduction test.  The bundled model is a
causal-convolution tracking objective; stationarity diagnostics and an
exhaustive r-optimality verifier certify the returned controls on small
grids.
"""

__version__ = "0.1.0"

from .controls import (Control, LevelSet, StepRepresentation, UniformGrid,
                       l1_distance, refine, to_step_representation,
                       total_variation)
from .model import (ConvolutionKernel, CosineTarget, ProblemInstance,
                    QuadratureRule, cosine_tracking_instance,
                    instance_from_config)
from .trip import (TripInstance, TripSolution, assemble, budget_units,
                   solve_bruteforce, solve_dp)
from .driver import (InitStrategy, IterationRecord, RadiusStrategy,
                     SlipConfig, SlipResult, Termination, run,
                     run_mesh_sequenced, zero_control)
from .stationarity import (StationarityReport, sl_measure,
                           verify_r_optimality)
from .experiments import ExperimentSpec, oracle_compare, run_experiment

__all__ = [
    "__version__",
    "Control", "LevelSet", "StepRepresentation", "UniformGrid",
    "l1_distance", "refine", "to_step_representation", "total_variation",
    "ConvolutionKernel", "CosineTarget", "ProblemInstance", "QuadratureRule",
    "cosine_tracking_instance", "instance_from_config",
    "TripInstance", "TripSolution", "assemble", "budget_units",
    "solve_bruteforce", "solve_dp",
    "InitStrategy", "IterationRecord", "RadiusStrategy", "SlipConfig",
    "SlipResult", "Termination", "run", "run_mesh_sequenced", "zero_control",
    "StationarityReport", "sl_measure", "verify_r_optimality",
    "ExperimentSpec", "oracle_compare", "run_experiment",
]
