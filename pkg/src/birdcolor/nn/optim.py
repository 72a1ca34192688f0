"""AdamW with a cosine-annealed learning rate."""

from __future__ import annotations

import numpy as np


class CosineSchedule:
    """lr_init at step 0 decaying to exactly lr_final at step total-1."""

    def __init__(self, lr_init: float, lr_final: float, total_steps: int):
        if total_steps < 1:
            raise ValueError("total_steps must be >= 1")
        if lr_final >= lr_init:
            raise ValueError("lr_final must be < lr_init")
        self.lr_init = lr_init
        self.lr_final = lr_final
        self.total_steps = total_steps

    def lr(self, step: int) -> float:
        if self.total_steps == 1:
            return self.lr_init
        t = step / (self.total_steps - 1)
        return self.lr_final + 0.5 * (self.lr_init - self.lr_final) * (1.0 + np.cos(np.pi * t))


class AdamW:
    """Decoupled weight decay; decay applies to weight matrices only
    (names ending in ".w"), not biases or the pooling alpha."""

    def __init__(
        self,
        param_names: list[str],
        schedule: CosineSchedule,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 1e-2,
    ):
        self.names = list(param_names)
        self.schedule = schedule
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> float:
        """One update in place; returns the learning rate used."""
        lr = self.schedule.lr(self.step_count)
        self.step_count += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**self.step_count
        bias2 = 1.0 - b2**self.step_count
        for name in self.names:
            p, g = params[name], grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m, v = self.m[name], self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / bias1) / (np.sqrt(v / bias2) + self.eps)
            if self.weight_decay and name.endswith(".w"):
                update = update + self.weight_decay * p
            p -= lr * update
        return lr
