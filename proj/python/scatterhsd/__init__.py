"""Python bindings for the scatterhsd C++ core."""

from ._scatterhsd import (
    NUM_CLASSES,
    InvalidInput,
    IoError,
    NumericsError,
    ParseError,
    ShapeError,
    bin_activations,
    chamfer,
    class_name,
    default_config,
    fps,
    gen_shape,
    knn,
    learning_rate,
    multi_view,
    mutual_information,
    nearest_map,
    normalize,
    scatter_sample,
    train_and_evaluate,
)

__all__ = [
    "NUM_CLASSES",
    "InvalidInput",
    "IoError",
    "NumericsError",
    "ParseError",
    "ShapeError",
    "bin_activations",
    "chamfer",
    "class_name",
    "default_config",
    "fps",
    "gen_shape",
    "knn",
    "learning_rate",
    "multi_view",
    "mutual_information",
    "nearest_map",
    "normalize",
    "scatter_sample",
    "train_and_evaluate",
]
