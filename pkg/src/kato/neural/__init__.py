from .features import LabeledSample, default_bounds, encode_sort, normalize
from .model import (
    ARCHS,
    SelectionModel,
    backward,
    canonical_arch,
    forward,
    init_model,
    kato_forward,
    mlp_forward,
    node_probabilities,
    predict_selection,
    sa_forward,
    select_from_probabilities,
)
from .train import (
    AdamState,
    TrainConfig,
    TrainHistory,
    adam_step,
    batch_gradients,
    bce_loss,
    dataset_loss,
    selection_accuracy,
    train,
)
