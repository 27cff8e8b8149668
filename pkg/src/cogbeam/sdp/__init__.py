"""SDP relaxation: generic small-SDP solver, rank-one extraction, Case-2 design."""

from .solver import (SdpProblem, SdpSolution, RankOneVector, solve,  # noqa: F401
                     extract_rank_one)
from .case2 import Case2Result, solve_case2, realized_case2  # noqa: F401,E402
