"""Crowded multi-antenna uplink simulator: pilot-hopping user identification
over Rician fading plus LOS-only and MMSE-updated channel estimation."""

__version__ = "0.1.0"

from .airlink import (
    CapacityExceededError,
    DespreadSet,
    FrameParams,
    HoppingCodebook,
    PilotBook,
    SuperframeRealization,
    UserPopulation,
    build_hopping_codebook,
    build_pilot_book,
    despread,
    read_frame_dump,
    synthesize_superframe,
    write_frame_dump,
)
from .aoa import (
    AoaEstimate,
    CovarianceEstimate,
    estimate_source_count,
    hermitian_eig,
    music_spectrum,
    sample_covariance,
)
from .channel import (
    ArrayGeometry,
    ChannelRealization,
    UserProfile,
    draw_channel,
    normalized_steering,
    steering,
    steering_ula,
    steering_upa,
)
from .estimate import (
    ChannelEstimateSet,
    DegenerateEstimateError,
    DetectedData,
    IllConditionedError,
    LosEstimate,
    NotIdentifiedError,
    coherent_detect,
    los_estimate,
    mmse_nlos,
    nmse,
    residual,
    slice_qam4,
)
from .harness import (
    ExperimentConfig,
    MetricRecord,
    MethodTrialResult,
    TrialOutcome,
    aggregate,
    generate_population,
    inspect_trial,
    parse_config,
    run_point,
    run_sweep,
    run_trial,
)
from .identify import (
    IdentificationReport,
    Match,
    ProjectionTable,
    SteeringPattern,
    default_threshold,
    extract_pattern,
    extract_patterns,
    match_patterns,
    project,
    threshold_identify,
)
