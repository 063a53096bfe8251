from .loss import softmax_loss, softmax_loss_tensor
from .sampling import fisher_yates, sample_negatives
from .template import TruncationPolicy, format_input, normalize_ws
from .tokenizer import ByteTokenizer, EOS_ID, PAD_ID, SEP_ID, VOCAB_SIZE
from .trainer import (
    AdamW,
    TrainConfig,
    TrainResult,
    TrainingInstance,
    lr_at_step,
    train,
)

__all__ = [
    "AdamW",
    "ByteTokenizer",
    "EOS_ID",
    "PAD_ID",
    "SEP_ID",
    "VOCAB_SIZE",
    "TrainConfig",
    "TrainResult",
    "TrainingInstance",
    "TruncationPolicy",
    "fisher_yates",
    "format_input",
    "lr_at_step",
    "normalize_ws",
    "sample_negatives",
    "softmax_loss",
    "softmax_loss_tensor",
    "train",
]
