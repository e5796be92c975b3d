from .models import (
    LstmConfig,
    LstmModel,
    TransformerConfig,
    TransformerModel,
    make_model,
    positional_signal,
    predict_legal,
)
from .optim import NonFiniteGradient, RmsProp
from .tape import Tensor, mse_masked

__all__ = [
    "LstmConfig",
    "LstmModel",
    "TransformerConfig",
    "TransformerModel",
    "make_model",
    "positional_signal",
    "predict_legal",
    "NonFiniteGradient",
    "RmsProp",
    "Tensor",
    "mse_masked",
]
