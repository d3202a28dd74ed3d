"""Eye typing from eye-strip images.

A small CNN classifies a 32-pixel-tall eye strip into 9 gaze directions
plus an eye-closed state; a majority filter stabilizes the per-frame
stream; a two-level phone-pad keyboard turns stabilized directions and
voluntary blinks into text.  See the README for the command-line tools
and the TCP typing service.
"""

from .augment import AugmentConfig, hflip_with_label_swap, training_stream
from .estimator import (
    EvalReport,
    GazeDirectionClassifier,
    NoEyesDetected,
    TrainingDiverged,
    disambiguate,
    evaluate,
)
from .filtering import (
    MajorityFilter,
    NoiseScript,
    filter_stream,
    recommend_capacity,
    simulate_sequence,
    sweep_script,
)
from .network import GazeNet, ModelConfig
from .service import KeyboardService, Session, SessionConfig, replay_log
from .states import (
    CLOSED,
    DIRECTION_NAMES,
    MIRROR,
    N_STATES,
    STATE_NAMES,
    check_state,
    direction_vector,
    mirror,
)
from .synth import (
    SynthParams,
    default_params,
    generate_dataset,
    load_manifest,
    load_split,
    render_eye_strip,
    unknown_params,
)
from .t9 import (
    Keyboard,
    Layout,
    SessionMetrics,
    compute_metrics,
    default_layout,
    selection_stream,
    type_script,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig", "hflip_with_label_swap", "training_stream",
    "EvalReport", "GazeDirectionClassifier", "NoEyesDetected",
    "TrainingDiverged", "disambiguate", "evaluate",
    "MajorityFilter", "NoiseScript", "filter_stream", "recommend_capacity",
    "simulate_sequence", "sweep_script",
    "GazeNet", "ModelConfig",
    "KeyboardService", "Session", "SessionConfig", "replay_log",
    "CLOSED", "DIRECTION_NAMES", "MIRROR", "N_STATES", "STATE_NAMES",
    "check_state", "direction_vector", "mirror",
    "SynthParams", "default_params", "generate_dataset", "load_manifest",
    "load_split", "render_eye_strip", "unknown_params",
    "Keyboard", "Layout", "SessionMetrics", "compute_metrics",
    "default_layout", "selection_stream", "type_script",
    "__version__",
]
