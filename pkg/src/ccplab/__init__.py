"""Workbench for a d-dimensional communication game: exact classical
optima, see-saw quantum lower bounds, and moment-relaxation upper
bounds, with a CLI front end."""

from .game import (Behavior, CglmpTensor, GameInput, GameSpec,
                   LinearStrategy, PayoffKernel, build_cglmp_tensor,
                   build_payoff_kernel, cglmp_value, game_value_of_behavior)
from .classical import (ClassicalSolution, MessageFunction, SearchSpaceError,
                        best_response, classical_optimum,
                        linear_strategy_value)
from .sdp import SdpProblem, SdpSolution, solve_sdp
from .pm import (Povm, PrepareMeasureStrategy, run_pm, run_pm_frozen)
from .bell import EntangledStrategy, run_bell
from .npa import BoundReport, upper_bound
from .simulate import SimulationResult
from .verify import run_checks

__version__ = "1.0.0"

__all__ = [
    "Behavior", "CglmpTensor", "GameInput", "GameSpec", "LinearStrategy",
    "PayoffKernel", "build_cglmp_tensor", "build_payoff_kernel",
    "cglmp_value", "game_value_of_behavior",
    "ClassicalSolution", "MessageFunction", "SearchSpaceError",
    "best_response", "classical_optimum", "linear_strategy_value",
    "SdpProblem", "SdpSolution", "solve_sdp",
    "Povm", "PrepareMeasureStrategy", "run_pm", "run_pm_frozen",
    "EntangledStrategy", "run_bell",
    "BoundReport", "upper_bound",
    "SimulationResult",
    "run_checks",
    "__version__",
]
