"""Very-sparse-point-cloud target localization for monocular AR sessions.

A SLAM-style landmark cloud is projected into each camera frame, the
points that land inside a 2D detection box are kept and accumulated
across frames, and once enough landmarks are gathered the target's
center and principal axes are recovered from the point covariance.
"""

from .camera import CameraRig, NdcPoint, look_at, project_cloud, project_to_ndc
from .cloud import PointCloud
from .detection import (
    Detection,
    Detector,
    FileDetector,
    NdcBox,
    OracleDetector,
    PixelBox,
    normalize_box,
    select_detection,
)
from .errors import (
    DegenerateCloudError,
    InputFormatError,
    InsufficientDataError,
    InvalidBoxError,
    InvalidCameraError,
    InvalidInputError,
    SparselocError,
)
from .linalg3 import EigenTriple, Mat4, SingularTriple, SymMatrix3, Vec3
from .locator import (
    FilteredSet,
    LocatorConfig,
    TargetPose,
    accumulate,
    estimate_pose,
    filter_in_box,
    ready,
)
from .simulator import SceneSpec, SimulatedScene, default_scene_spec

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CameraRig",
    "NdcPoint",
    "look_at",
    "project_cloud",
    "project_to_ndc",
    "PointCloud",
    "Detection",
    "Detector",
    "FileDetector",
    "NdcBox",
    "OracleDetector",
    "PixelBox",
    "normalize_box",
    "select_detection",
    "SparselocError",
    "InvalidInputError",
    "InvalidCameraError",
    "InvalidBoxError",
    "InsufficientDataError",
    "DegenerateCloudError",
    "InputFormatError",
    "EigenTriple",
    "Mat4",
    "SingularTriple",
    "SymMatrix3",
    "Vec3",
    "FilteredSet",
    "LocatorConfig",
    "TargetPose",
    "accumulate",
    "estimate_pose",
    "filter_in_box",
    "ready",
    "SceneSpec",
    "SimulatedScene",
    "default_scene_spec",
]
