"""Action-label hyperactivity scoring and ADHD/control screening pipeline."""

from .classifier import (
    ClassifierConfig,
    classify_sequence,
    classify_window,
    import_labels,
    load_classifier_config,
)
from .errors import (
    AdrScreenError,
    EmptyInputError,
    EvaluationError,
    ParseError,
    SchemaError,
)
from .evaluation import (
    EvaluationSummary,
    evaluate_cohort,
    roc_auc,
    trapezoidal_auc,
    with_roc,
    write_evaluation,
)
from .features import (
    LIMB_JOINTS,
    TORSO_JOINTS,
    Window,
    WindowFeatures,
    compute_features,
    make_windows,
)
from .ingest import (
    AdrReportRow,
    CohortManifest,
    parse_adr_results,
    parse_diagnoses,
    parse_label_file,
    parse_manifest,
    parse_skeleton_file,
    write_adr_results,
    write_diagnoses,
    write_label_file,
    write_manifest,
    write_skeleton_file,
    write_timeline,
)
from .model import (
    COCO_KEYPOINT_NAMES,
    NUM_KEYPOINTS,
    ActionLabel,
    ActionLabelSequence,
    AdrResult,
    Diagnosis,
    Group,
    Keypoint,
    ParticipantRecord,
    Sex,
    SkeletonFrame,
    SkeletonSequence,
    View,
    Violation,
    validate_sequence,
)
from .scoring import (
    DEFAULT_FIXED_THRESHOLD,
    FusedAdr,
    ThresholdMode,
    ThresholdPolicy,
    adr,
    derive_threshold,
    diagnose,
    fuse_views,
    hyperactivity_score,
    score_participant,
)
from .synthetic import (
    CohortSpec,
    GeneratedParticipant,
    SkeletonMotionParams,
    expected_adr,
    gen_labels,
    gen_skeleton,
    generate_cohort,
    simulate_cohort,
)

__version__ = "0.1.0"
