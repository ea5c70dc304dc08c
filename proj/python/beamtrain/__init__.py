"""Hierarchical-codebook beam training for multipath mmWave MIMO."""

from ._core import (
    BeamtrainError,
    ChannelRealization,
    CodebookState,
    ExperimentConfig,
    MeasurementModel,
    TrainingOutcome,
    beam_gain,
    bottom_center,
    bottom_codeword,
    cli_main,
    draw_channel,
    estimate_gain,
    exhaustive_sweep,
    format_config,
    initial_index_set,
    inner_product,
    midpoint_alignment_residual,
    midpoint_phase_check,
    overhead,
    parse_config,
    pattern_samples,
    run_monte_carlo,
    snr_to_noise,
    steering_vector,
    success_detection,
    synthesize,
    train_baseline_subtraction,
    train_dynamic,
    true_bin,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
