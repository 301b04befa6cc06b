"""Differentiable compute layer: tape autodiff, the weight-conditioned
actor/critic, Adam, and binary checkpoints."""

from .adam import AdamState, GradientError, adam_step
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .network import NetworkSpec, SpecError, forward, forward_tape, init_params, masked_softmax
from .tape import MASK_FILL, InvalidMaskError, Var, backward

__all__ = [
    "AdamState", "GradientError", "adam_step",
    "Checkpoint", "CheckpointError", "load_checkpoint", "save_checkpoint",
    "NetworkSpec", "SpecError", "forward", "forward_tape", "init_params",
    "masked_softmax", "MASK_FILL", "InvalidMaskError", "Var", "backward",
]
