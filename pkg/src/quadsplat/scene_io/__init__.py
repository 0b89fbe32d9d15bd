from .cameras import CameraModel, load_cameras, parse_cameras, save_cameras
from .images import encode_rgb8, linear_to_srgb, ppm_bytes, read_ppm, write_image
from .ply import load_ply, parse_ply, ply_bytes, save_ply
from .scene import Gaussian3D, Scene, sh_coeff_count
from .synth import PRESETS, SynthParams, preset, synth_camera, synth_scene

__all__ = [
    "CameraModel", "Gaussian3D", "PRESETS", "Scene", "SynthParams",
    "encode_rgb8", "linear_to_srgb", "load_cameras", "load_ply", "parse_cameras",
    "parse_ply", "ply_bytes", "ppm_bytes", "preset", "read_ppm", "save_cameras", "save_ply",
    "sh_coeff_count", "synth_camera", "synth_scene", "write_image",
]
