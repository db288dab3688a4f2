"""Relational local explanations for black-box models.

Quantifies pairwise relationships between input elements (image patches or
words) by shuffling element positions, scoring the shuffles with the model,
and fitting a sparse linear surrogate on adjacency features.
"""

from .decompose import (
    ImageBuffer,
    SampleDecomposition,
    SlotLayout,
    partition_image,
    read_image,
    reassemble,
    tokenize_text,
    write_png,
    write_ppm,
)
from .errors import RleError
from .eval import (
    IrofReport,
    Segmentation,
    attribution_to_pixels,
    grid_segmentation,
    irof,
    random_attribution,
    slic_segment,
)
from .explain import (
    LocalExplanation,
    RelationalExplanation,
    RelationalLocalExplainer,
    explanation_from_json,
    explanation_to_json,
    to_local,
    top_pairs,
)
from .models import (
    BridgeModel,
    CallableModel,
    Model,
    ScoreInput,
    SyntheticModel,
    SyntheticSpec,
    spawn_bridge,
)
from .perturb import (
    build_adjacency,
    expand_lower_triangle,
    lower_triangle,
    pair_index,
    weak_permute,
)
from .surrogate import AuxiliaryDataset, SparseLinearSurrogate, lambda_max

__version__ = "0.1.0"

__all__ = [
    "AuxiliaryDataset",
    "BridgeModel",
    "CallableModel",
    "ImageBuffer",
    "IrofReport",
    "LocalExplanation",
    "Model",
    "RelationalExplanation",
    "RelationalLocalExplainer",
    "RleError",
    "SampleDecomposition",
    "ScoreInput",
    "Segmentation",
    "SlotLayout",
    "SparseLinearSurrogate",
    "SyntheticModel",
    "SyntheticSpec",
    "attribution_to_pixels",
    "build_adjacency",
    "expand_lower_triangle",
    "explanation_from_json",
    "explanation_to_json",
    "grid_segmentation",
    "irof",
    "lambda_max",
    "lower_triangle",
    "pair_index",
    "partition_image",
    "random_attribution",
    "read_image",
    "reassemble",
    "slic_segment",
    "spawn_bridge",
    "to_local",
    "tokenize_text",
    "top_pairs",
    "weak_permute",
    "write_png",
    "write_ppm",
]
