"""Four-stage tile rasterizer: project, duplicate-with-keys, sort, render."""
from .config import RenderConfig, resolve_threads
from .frame import FrameResult, StageMetrics, render_frame, tile_accuracy
from .keys import SortedPairs, SplatPairs, duplicate_with_keys, make_keys, sort_pairs
from .project import ProjectedSplat, ProjectedSplats, ewa_project, project, project_scene
from .render import RenderOutput, render
from .sh import eval_sh

__all__ = [
    "FrameResult", "ProjectedSplat", "ProjectedSplats", "RenderConfig", "RenderOutput",
    "SortedPairs", "SplatPairs", "StageMetrics", "duplicate_with_keys", "eval_sh",
    "ewa_project", "make_keys", "project", "project_scene", "render", "render_frame",
    "resolve_threads", "sort_pairs", "tile_accuracy",
]
