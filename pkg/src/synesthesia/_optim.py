"""Adam over a flat list of numpy arrays, shared by the plan optimizer and
the speech-classifier trainer."""

import numpy as np


class Adam:
    """Standard Adam with bias correction.

    One moment pair per parameter array; `step` updates the arrays in
    place. The first step moves each coordinate by ~lr * sign(grad)
    (exactly lr * g/(|g| + eps) after bias correction).
    """

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads, lrs=None):
        """In-place update; `lrs` optionally overrides the rate per array."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * (g * g)
            mhat = self.m[i] / bc1
            vhat = self.v[i] / bc2
            lr = self.lr if lrs is None else lrs[i]
            p -= lr * mhat / (np.sqrt(vhat) + self.eps)
        return params
