"""Desk-scale simulation of the random-coding recognition scheme."""

from .runner import (
    SimulationResult,
    ci95_halfwidth,
    enumerate_fixed_code,
    run_trials,
    simulate_fixed_code,
    sweep,
    trend_ok,
)
from .scheme import (
    EVENTS,
    Code,
    CodeConfig,
    TrialOutcome,
    TypicalityRecognizer,
    classify,
    detect_collision,
    encode_patterns,
    generate_codebooks,
    make_rng,
    memory_encode,
    recognize,
    sensory_encode,
    simulate_trial,
    train_code,
)
from .typicality import (
    PairTypicality,
    flip_masks,
    pack_bits,
    popcount,
    sample_typical,
    sample_typical_binary,
    typicality_test,
    unpack_bits,
)

__all__ = [
    "EVENTS",
    "Code",
    "CodeConfig",
    "PairTypicality",
    "SimulationResult",
    "TrialOutcome",
    "TypicalityRecognizer",
    "ci95_halfwidth",
    "classify",
    "detect_collision",
    "encode_patterns",
    "flip_masks",
    "enumerate_fixed_code",
    "generate_codebooks",
    "make_rng",
    "memory_encode",
    "pack_bits",
    "popcount",
    "recognize",
    "run_trials",
    "sample_typical",
    "sample_typical_binary",
    "sensory_encode",
    "simulate_fixed_code",
    "simulate_trial",
    "sweep",
    "train_code",
    "trend_ok",
    "typicality_test",
    "unpack_bits",
]
