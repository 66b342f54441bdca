"""Fully connected ReLU networks with hand-written backpropagation and Adam.

Two evaluation routes share the same parameters:

* :meth:`Network.evaluate` contracts with ``einsum`` (no BLAS), so every row
  is accumulated in a fixed order and a batch evaluation is bitwise equal to
  evaluating its points one at a time.
* :meth:`Network.forward_train` / :meth:`Network.backward` use BLAS matmul for
  speed during training.
"""

import json
import struct
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import ConfigError, InputError


INITS = ("glorot", "he")


class Network:
    """Affine-ReLU stack with an affine output layer.

    Weights start Glorot-uniform (``"glorot"``) or He-normal (``"he"``); biases
    start at zero.
    """

    kind = "scalar"

    def __init__(self, in_dim, hidden, out_dim, seed=0, init="glorot"):
        hidden = [int(w) for w in hidden]
        if in_dim < 1 or out_dim < 1 or any(w < 1 for w in hidden):
            raise InputError("layer widths must be positive")
        if init not in INITS:
            raise ConfigError(f"unknown initialisation {init!r}; expected one of {list(INITS)}", key="init")
        self.init = init
        self.in_dim = int(in_dim)
        self.hidden = hidden
        self.out_dim = int(out_dim)
        self.seed = int(seed)
        rng = np.random.default_rng(self.seed)
        sizes = [self.in_dim] + hidden + [self.out_dim]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if init == "he":
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            else:
                bound = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    def parameters(self) -> List[np.ndarray]:
        """Parameter arrays in layer order ``W0, b0, W1, b1, ...`` (live views)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @property
    def n_params(self):
        return sum(p.size for p in self.parameters())

    def get_flat(self):
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat):
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise InputError(f"expected {self.n_params} parameters, got {flat.size}")
        pos = 0
        for p in self.parameters():
            p[...] = flat[pos : pos + p.size].reshape(p.shape)
            pos += p.size

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.in_dim,):
            raise InputError(f"expected inputs of dimension {self.in_dim}, got shape {x.shape}")
        return x

    def evaluate(self, x):
        """Raw outputs ``(..., out_dim)``; row-order independent."""
        x = self._check_input(x)
        h = x.reshape(-1, self.in_dim)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = np.einsum("nk,km->nm", h, w) + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h.reshape(x.shape[:-1] + (self.out_dim,))

    def forward_train(self, x):
        """Outputs for a ``(n, in_dim)`` batch plus the cache for :meth:`backward`."""
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        return h, acts

    def backward(self, acts, grad_out):
        """Parameter gradients given d(loss)/d(outputs), in :meth:`parameters` order."""
        grads = [None] * (2 * len(self.weights))
        delta = grad_out
        for i in range(len(self.weights) - 1, -1, -1):
            grads[2 * i] = acts[i].T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0)
        return grads

    def copy(self):
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def __call__(self, x):
        return self.evaluate(x)


class YzNet(Network):
    """Network with ``d + 1`` outputs: column 0 is ``u``, columns ``1..d`` are ``∇u``."""

    kind = "yznet"

    def __init__(self, d, hidden, seed=0, init="glorot"):
        super().__init__(d, hidden, d + 1, seed, init)

    @property
    def dim(self):
        return self.in_dim

    def forward(self, x):
        """``(u, z)`` for one point or a batch of points."""
        out = self.evaluate(x)
        return out[..., 0], out[..., 1:]


def init(d, hidden, seed=0, init="glorot"):
    return YzNet(d, hidden, seed, init)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_network(cls, net, lr, **kw):
        params = net.parameters()
        return cls(lr=lr, m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kw)


def adam_step(net, grads, state):
    """Apply one bias-corrected Adam update in place; returns ``(net, state)``."""
    params = net.parameters()
    if len(grads) != len(params) or any(g.shape != p.shape for g, p in zip(grads, params)):
        raise InputError("gradients do not match the parameter shapes")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    c1 = 1.0 - state.beta1**state.t
    c2 = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return net, state


# --- checkpoints --------------------------------------------------------------

CHECKPOINT_MAGIC = b"WOSNNCKP"
CHECKPOINT_VERSION = 1


def save_checkpoint(net, file, metadata=None):
    """Magic, version, JSON header, then the raw little-endian f8 parameters."""
    header = {
        "kind": net.kind,
        "in_dim": net.in_dim,
        "out_dim": net.out_dim,
        "hidden": net.hidden,
        "seed": net.seed,
        "init": net.init,
        "n_params": net.n_params,
        "metadata": metadata or {},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(file, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC + struct.pack("<HI", CHECKPOINT_VERSION, len(blob)) + blob)
        fh.write(net.get_flat().astype("<f8").tobytes())


def load_checkpoint(file):
    """Returns ``(network, metadata)``."""
    with open(file, "rb") as fh:
        data = fh.read()
    if data[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise ConfigError(f"{file}: not a checkpoint file")
    version, hlen = struct.unpack_from("<HI", data, len(CHECKPOINT_MAGIC))
    if version != CHECKPOINT_VERSION:
        raise ConfigError(f"{file}: unsupported checkpoint version {version}")
    pos = len(CHECKPOINT_MAGIC) + 6
    header = json.loads(data[pos : pos + hlen])
    flat = np.frombuffer(data, dtype="<f8", offset=pos + hlen).astype(float)
    if header["kind"] == "yznet":
        net = YzNet(header["in_dim"], header["hidden"], header["seed"], header["init"])
    else:
        net = Network(header["in_dim"], header["hidden"], header["out_dim"], header["seed"], header["init"])
    net.set_flat(flat)
    return net, header["metadata"]
