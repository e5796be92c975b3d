"""fllab: a formal-language laboratory.

Counter automata and DFAs for 27 study languages, positive-sample dataset
generation with exact next-symbol targets, hand-assigned transformer
constructions verified against the automata, and a small trainable
transformer/LSTM stack for desk-scale character-prediction experiments.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
