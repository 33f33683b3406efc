"""AdamW with decoupled weight decay.

Moments are float64; parameter masters stay float32, updated by computing
the step in float64 and casting back.  Bias terms (1-d arrays) skip decay.
"""

from __future__ import annotations

import numpy as np


class AdamW:
    def __init__(self, params: dict, lr: float, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros(v.shape, dtype=np.float64) for k, v in params.items()}
        self.v = {k: np.zeros(v.shape, dtype=np.float64) for k, v in params.items()}

    def update(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for k, p in params.items():
            g = np.asarray(grads[k], dtype=np.float64)
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            step = (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)
            p64 = p.astype(np.float64)
            if self.weight_decay and p.ndim > 1:
                p64 = p64 - self.lr * self.weight_decay * p64
            params[k] = (p64 - self.lr * step).astype(np.float32)

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {"_t": np.array([self.t], dtype=np.float64)}
        for k in self.m:
            out[f"m_{k}"] = self.m[k]
            out[f"v_{k}"] = self.v[k]
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        self.t = int(arrays["_t"][0])
        for k in self.m:
            self.m[k] = np.asarray(arrays[f"m_{k}"], dtype=np.float64)
            self.v[k] = np.asarray(arrays[f"v_{k}"], dtype=np.float64)
