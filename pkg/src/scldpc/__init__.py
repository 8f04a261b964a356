"""Quasi-cyclic spatially coupled LDPC codes with complexity-budgeted windowed decoding."""

from .channel import ChannelSpec, generate_allzero_llrs
from .construction import (
    CodeRealization,
    CodeSpec,
    ConstructionError,
    InvalidShiftError,
    build_coupled,
    code_rates,
    has_four_cycle,
    lift,
    sample_realization,
)
from .kernel import DEFAULT_QUANT, DecoderState, QuantSpec
from .windowed import (
    BudgetSpec,
    EtSet,
    Strategy,
    WindowConfig,
    configure,
    decode_fbd,
    decode_windowed,
)

__all__ = [
    "ChannelSpec", "generate_allzero_llrs",
    "CodeRealization", "CodeSpec", "ConstructionError", "InvalidShiftError",
    "build_coupled", "code_rates", "has_four_cycle", "lift", "sample_realization",
    "DEFAULT_QUANT", "DecoderState", "QuantSpec",
    "BudgetSpec", "EtSet", "Strategy", "WindowConfig", "configure", "decode_fbd", "decode_windowed",
]
