"""CPU tile rasterizer for 3D Gaussian splats with QuadBox tile culling."""
from .geometry import (
    ALPHA_MIN,
    Conic2D,
    Cov2D,
    Extents,
    axis_extents,
    invert_cov,
    opacity_gamma,
    stretch_factor,
    support_point,
)
from .quadbox import (
    BoundStrategy,
    QuadBox,
    SubBox,
    build_adr_box,
    build_dualbox,
    build_quadbox,
    build_vanilla_box,
)
from .traversal import TileGrid, TileRect, TileSpan, count_tiles, naive_traverse, qpass, subbox_tile_rect

__version__ = "0.1.0"

__all__ = [
    "ALPHA_MIN", "BoundStrategy", "Conic2D", "Cov2D", "Extents", "QuadBox", "SubBox", "TileGrid",
    "TileRect", "TileSpan", "axis_extents", "build_adr_box", "build_dualbox", "build_quadbox",
    "build_vanilla_box", "count_tiles", "invert_cov", "naive_traverse", "opacity_gamma", "qpass",
    "stretch_factor", "subbox_tile_rect", "support_point",
]
