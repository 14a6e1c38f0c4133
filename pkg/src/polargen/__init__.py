"""Polar codes over heterogeneous BMS channels: construction, rate matching,
SC decoding, FER experiments and a folded-encoder cycle simulator."""

from .channel import (
    BmsChannel,
    ChannelParameterError,
    ChannelStats,
    channel_stats,
    degrading_merge,
    make_awgn_quantized,
    make_channel,
)
from .codec import LLR_MAX, TxChannel, encode, init_llrs, sc_decode
from .construction import (
    BitChannelQuality,
    OracleSizeError,
    construct,
    construct_bec_z,
    construct_modified_tal_vardy,
    exact_oracle,
    select_info_set,
    tran,
    transform_pair,
)
from .folded import CycleReport, FoldedSchedule, build_schedule, leading_frozen_count, simulate
from .harness import ExperimentConfig, FerPoint, FerResult, run_fer
from .ratematch import CodeSpec, bit_reverse, make_pattern, underlying_vector

__version__ = "0.1.0"

__all__ = [
    "BitChannelQuality",
    "BmsChannel",
    "ChannelParameterError",
    "ChannelStats",
    "CodeSpec",
    "CycleReport",
    "ExperimentConfig",
    "FerPoint",
    "FerResult",
    "FoldedSchedule",
    "LLR_MAX",
    "OracleSizeError",
    "TxChannel",
    "bit_reverse",
    "build_schedule",
    "channel_stats",
    "construct",
    "construct_bec_z",
    "construct_modified_tal_vardy",
    "degrading_merge",
    "encode",
    "exact_oracle",
    "init_llrs",
    "leading_frozen_count",
    "make_awgn_quantized",
    "make_channel",
    "make_pattern",
    "run_fer",
    "sc_decode",
    "select_info_set",
    "simulate",
    "tran",
    "transform_pair",
    "underlying_vector",
]
