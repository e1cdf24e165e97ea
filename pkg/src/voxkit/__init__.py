"""voxkit: speech and biosignal processing toolkit.

Pitch tracking, PSOLA pitch flattening, DTW content alignment, EMG
preprocessing, and a full evaluation metric suite (local/global f0
deviation, speaker consistency, word/character error rates).
"""

from .align import (
    DtwResult,
    FeatureSequence,
    content_loss,
    dtw,
    nearest_interpolate,
    warp_to_reference,
)
from .core import AudioBuffer, FrameGrid, SynthSpec, frame, synthesize
from .emg import (
    EmgFeatures,
    EmgPreprocessConfig,
    EmgRecording,
    apply_lead_shift,
    load_session,
    preprocess,
    save_session,
)
from .errors import DomainError, FormatError, VoxkitError
from .metrics import (
    ErrorRateReport,
    F0DeviationReport,
    SpeakerEmbedding,
    error_rate,
    frame_f0_loss,
    global_f0_error,
    global_pitch_loss,
    local_f0_deviation,
    speaker_consistency,
)
from .pitch import F0Contour, GlobalPitch, PitchConfig, global_pitch, track_pitch
from .psola import (
    FlattenTarget,
    PitchMarks,
    find_pitch_marks,
    flatten_pitch,
    resynthesize,
)
from .testkit import brute_force_dtw, brute_force_edit, perturb_contour

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "DomainError",
    "DtwResult",
    "EmgFeatures",
    "EmgPreprocessConfig",
    "EmgRecording",
    "ErrorRateReport",
    "F0Contour",
    "F0DeviationReport",
    "FeatureSequence",
    "FlattenTarget",
    "FormatError",
    "FrameGrid",
    "GlobalPitch",
    "PitchConfig",
    "PitchMarks",
    "SpeakerEmbedding",
    "SynthSpec",
    "VoxkitError",
    "apply_lead_shift",
    "brute_force_dtw",
    "brute_force_edit",
    "content_loss",
    "dtw",
    "error_rate",
    "find_pitch_marks",
    "flatten_pitch",
    "frame",
    "frame_f0_loss",
    "global_f0_error",
    "global_pitch",
    "global_pitch_loss",
    "load_session",
    "local_f0_deviation",
    "nearest_interpolate",
    "perturb_contour",
    "preprocess",
    "resynthesize",
    "save_session",
    "speaker_consistency",
    "synthesize",
    "track_pitch",
    "warp_to_reference",
]
