"""Adam optimizer with bias correction.

Functional core (adam_step) over plain arrays plus a thin class wrapper
that binds graph leaves. Updates are applied in place so parameter nodes
keep their identity across training steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .autodiff import Node
from .errors import ContractError, TrainingDivergenceError


@dataclass
class AdamState:
    """First and second moment estimates plus the shared step counter."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    *,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[Sequence[np.ndarray], AdamState]:
    """Apply one Adam update in place; returns (params, state) for chaining.

    m <- b1 m + (1-b1) g        mhat = m / (1 - b1^t)
    v <- b2 v + (1-b2) g^2      vhat = v / (1 - b2^t)
    p <- p - lr * mhat / (sqrt(vhat) + eps)
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ContractError(
            f"adam_step: got {len(params)} params, {len(grads)} grads, "
            f"state sized {len(state.m)}"
        )
    for p, g, m in zip(params, grads, state.m):
        if p.shape != g.shape or p.shape != m.shape:
            raise ContractError(
                f"adam_step: shape mismatch between param {p.shape}, "
                f"grad {g.shape}, state {m.shape}"
            )
    for g in grads:
        if g.size and not np.isfinite(g).all():
            raise TrainingDivergenceError(
                f"non-finite gradient at optimizer step {state.step + 1}"
            )
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params, state


@dataclass
class Adam:
    """Adam bound to a fixed list of graph leaves."""

    nodes: list[Node]
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    state: AdamState = field(init=False)

    def __post_init__(self):
        self.state = AdamState.for_params([n.value for n in self.nodes])

    def step(self) -> None:
        adam_step(
            [n.value for n in self.nodes],
            [n.grad for n in self.nodes],
            self.state,
            lr=self.lr,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
        )

    def zero_grad(self) -> None:
        for n in self.nodes:
            n.zero_grad()
