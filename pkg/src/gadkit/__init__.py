"""gadkit: guided anisotropic diffusion for raster post-processing.

Edge-preserving diffusion filtering where the diffusion barriers come
from separate guide images, plus the pipelines built on it: cleansing
noisy change labels, sharpening spatial attention weights, and restoring
boundary precision in upsampled segmentation probabilities.
"""

from .attention import (
    AttentionGrid,
    attention_backward,
    attention_forward,
    global_average_pool,
    sharpen_attention,
)
from .diffusion import (
    GadParams,
    anisotropic_diffuse,
    coeff_scalar,
    combined_coefficients,
    diffusion_step,
    edge_coefficients,
    gad_filter,
)
from .errors import (
    MissingClassError,
    RasterFormatError,
    ShapeError,
    UndefinedMetricError,
)
from .fields import (
    EdgeField,
    bilinear_upsample,
    box_downsample,
    edge_divergence,
    gradient_edges,
)
from .labels import LabelMap, MergeStrategy, binarize, class_weights, cleanse, merge
from .metrics import ConfusionCounts, boundary_mask, confusion, dice, global_accuracy
from .upsample import RefinePipelineConfig, refine_upsampled, simulate_low_res

__version__ = "0.1.0"

__all__ = [
    "AttentionGrid",
    "ConfusionCounts",
    "EdgeField",
    "GadParams",
    "LabelMap",
    "MergeStrategy",
    "MissingClassError",
    "RasterFormatError",
    "RefinePipelineConfig",
    "ShapeError",
    "UndefinedMetricError",
    "anisotropic_diffuse",
    "attention_backward",
    "attention_forward",
    "bilinear_upsample",
    "binarize",
    "boundary_mask",
    "box_downsample",
    "class_weights",
    "cleanse",
    "coeff_scalar",
    "combined_coefficients",
    "confusion",
    "dice",
    "diffusion_step",
    "edge_coefficients",
    "edge_divergence",
    "gad_filter",
    "global_accuracy",
    "global_average_pool",
    "gradient_edges",
    "merge",
    "refine_upsampled",
    "sharpen_attention",
    "simulate_low_res",
]
