"""Group-based shrinkage estimators for adaptive DS-UWB channel estimation and reception."""
from .analysis import mse_lower_bound, mse_of_alpha, verify_statements
from .estimators import GseState, RlsState, gse_apply, gse_optimal_alpha
from .harness import ExperimentResult, ExperimentSpec, load_config, run
from .numerics import GroupPartition, dft_matrix, partial_dft, walsh_codes
from .uwb import ChannelRealization, SystemConfig, gen_channel, load_channel

__all__ = [
    "ChannelRealization", "ExperimentResult", "ExperimentSpec", "GroupPartition",
    "GseState", "RlsState", "SystemConfig", "dft_matrix", "gen_channel",
    "gse_apply", "gse_optimal_alpha", "load_channel", "load_config",
    "mse_lower_bound", "mse_of_alpha", "partial_dft", "run", "verify_statements",
    "walsh_codes",
]
__version__ = "0.1.0"
