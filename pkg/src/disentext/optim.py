"""Adam and RMSProp over nested ``{group: {name: array}}`` parameter dicts."""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


def _all_finite(grads):
    return all(np.all(np.isfinite(g)) for d in grads.values() for g in d.values())


def global_norm(grads):
    return float(np.sqrt(sum(float((g * g).sum()) for d in grads.values() for g in d.values())))


def clip_by_global_norm(grads, max_norm):
    norm = global_norm(grads)
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for d in grads.values():
            for g in d.values():
                g *= scale
    return norm


class Optimizer:
    slots: tuple[str, ...] = ()

    def __init__(self, lr=1e-3, eps=1e-8):
        self.lr = lr
        self.eps = eps
        self.t = 0
        self.state: dict[str, dict[str, dict[str, np.ndarray]]] = {s: {} for s in self.slots}
        self.skipped = 0

    def _slot(self, slot, group, name, like):
        d = self.state[slot].setdefault(group, {})
        if name not in d:
            d[name] = np.zeros_like(like)
        return d[name]

    def step(self, params, grads, groups=None):
        """Update ``params[group][name]`` in place; returns False if skipped."""
        groups = list(grads) if groups is None else groups
        sub = {g: grads[g] for g in groups}
        if not _all_finite(sub):
            self.skipped += 1
            log.warning("non-finite gradient; %s step skipped", type(self).__name__)
            return False
        self.t += 1
        for g in groups:
            for name, grad in sub[g].items():
                self._update(g, name, params[g][name], grad)
        return True

    def _update(self, group, name, p, g):
        raise NotImplementedError

    def arrays(self):
        """Flat ``{slot/group/name: array}`` view for serialisation."""
        return {
            f"{slot}/{g}/{n}": a
            for slot, groups in self.state.items()
            for g, d in groups.items()
            for n, a in d.items()
        }

    def load_arrays(self, flat):
        self.state = {s: {} for s in self.slots}
        for key, a in flat.items():
            slot, g, n = key.split("/")
            self.state[slot].setdefault(g, {})[n] = a


class Adam(Optimizer):
    slots = ("m", "v")

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        super().__init__(lr, eps)
        self.beta1, self.beta2 = beta1, beta2

    def _update(self, group, name, p, g):
        m = self._slot("m", group, name, p)
        v = self._slot("v", group, name, p)
        m *= self.beta1
        m += (1 - self.beta1) * g
        v *= self.beta2
        v += (1 - self.beta2) * g * g
        mhat = m / (1 - self.beta1**self.t)
        vhat = v / (1 - self.beta2**self.t)
        p -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


class RMSProp(Optimizer):
    slots = ("v",)

    def __init__(self, lr=1e-3, decay=0.9, eps=1e-8):
        super().__init__(lr, eps)
        self.decay = decay

    def _update(self, group, name, p, g):
        v = self._slot("v", group, name, p)
        v *= self.decay
        v += (1 - self.decay) * g * g
        p -= self.lr * g / (np.sqrt(v) + self.eps)


def adam_step(state: Adam, params, grads, lr=None):
    if lr is not None:
        state.lr = lr
    state.step(params, grads)
    return params


def rmsprop_step(state: RMSProp, params, grads, lr=None):
    if lr is not None:
        state.lr = lr
    state.step(params, grads)
    return params
