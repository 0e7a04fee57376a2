"""Python access to the motionskill core."""

try:
    from ._motionskill import *  # noqa: F401,F403
    from ._motionskill import MotionSkillError
except ImportError:
    from _motionskill import *  # noqa: F401,F403
    from _motionskill import MotionSkillError

__all__ = [
    "MotionSkillError",
    "evaluate",
    "filter_series",
    "frequency_response",
    "kinematic_features",
    "min_jerk_profile",
    "pca",
    "run_cli",
    "scale",
    "stratified_kfold",
]
