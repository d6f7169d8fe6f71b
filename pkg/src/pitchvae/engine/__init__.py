from .tensor import (
    Tensor,
    Tape,
    tensor,
    constant,
    parameter,
    backward,
    active_tape,
    no_grad,
    set_default_dtype,
    default_dtype,
)
from . import ops
from .check import grad_check

__all__ = [
    "Tensor",
    "Tape",
    "tensor",
    "constant",
    "parameter",
    "backward",
    "active_tape",
    "no_grad",
    "set_default_dtype",
    "default_dtype",
    "ops",
    "grad_check",
]
