"""Target classification: synthetic dataset, 4-class CNN, training, inference."""

from favbot.vision.cnn import (
    N_CLASSES,
    CnnParams,
    EpochMetrics,
    TrainConfig,
    classify,
    evaluate,
    forward,
    init_params,
    metrics_to_csv,
    train,
)
from favbot.vision.dataset import (
    generate_dataset,
    load_dataset,
    save_dataset,
    zone_of_centroid_x,
)
from favbot.vision.weights_io import (
    export_params,
    import_params,
    packaged_params,
    read_params_file,
    write_params_file,
)

__all__ = [
    "N_CLASSES",
    "CnnParams",
    "EpochMetrics",
    "TrainConfig",
    "classify",
    "evaluate",
    "forward",
    "init_params",
    "metrics_to_csv",
    "train",
    "generate_dataset",
    "load_dataset",
    "save_dataset",
    "zone_of_centroid_x",
    "export_params",
    "import_params",
    "packaged_params",
    "read_params_file",
    "write_params_file",
]
