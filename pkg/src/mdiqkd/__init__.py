"""Finite-key key rates for three-intensity decoy-state MDI-QKD."""
from .channel import ChannelParams, ProtocolParams, simulate
from .fluctuation import METHODS, BoundResult, FluctuationConfig, NoEventsError, estimate_bounds
from .keyrate import evaluate, key_rate
from .optimizer import OptimizerOptions, optimize

__all__ = [
    "ChannelParams", "ProtocolParams", "simulate", "METHODS", "BoundResult", "FluctuationConfig",
    "NoEventsError", "estimate_bounds", "evaluate", "key_rate", "OptimizerOptions", "optimize",
]
