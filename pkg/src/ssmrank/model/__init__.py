from .autodiff import Tape, Tensor, record
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ModelConfig, desk_config
from .network import RerankModel, count_params_formula, init_params

__all__ = [
    "Tape",
    "Tensor",
    "record",
    "ModelConfig",
    "desk_config",
    "RerankModel",
    "count_params_formula",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
]
