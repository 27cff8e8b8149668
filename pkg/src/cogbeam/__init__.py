"""Robust transmit/receive beamforming for a secondary MIMO link sharing
spectrum with a primary user under norm-bounded channel errors."""

from .errors import (CampaignAborted, CogbeamError, ConditioningError, DomainError,  # noqa: F401
                     NumericError, SdpError, ValidationError)
from .channel import (ChannelSet, RobustMatrices, SystemConfig, UncertaintyModel,  # noqa: F401
                      build_robust_matrices, sample_channels, sample_multiuser_channels,
                      worst_case_margin)
from .beamformer import (BeamformerPair, DesignMethod, DesignReport,  # noqa: F401
                         closed_form_transmit, realized_performance, receive_beamformer,
                         robust_sinr)
from .multiuser import (AllocationMode, AllocationResult, case1_sum_rate,  # noqa: F401
                        design_case1, fair_split, optimal_split, per_user_gain)
from .sdp import SdpProblem, SdpSolution, extract_rank_one, solve, solve_case2  # noqa: F401

__version__ = '0.1.0'
