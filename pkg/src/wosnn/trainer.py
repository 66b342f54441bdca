"""Training on recorded walks.

For a path ``x_0 .. x_k`` with target ``g(x̄) - Σ Ḡ_i f(y_i)`` the network's
boundary prediction is

    u(x_0) + Σ_{i<k} z(x_i) · (x_{i+1} - x_i)

and the loss is the mean squared mismatch over a minibatch.  Only live steps
are evaluated; padded steps have zero increments and contribute nothing.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError, TrainingError
from .fields import FieldGrid
from .nn import AdamState, Network, adam_step


@dataclass
class PathDataset:
    """Walks padded to a common length by repeating the final shell point.

    ``centers`` has shape ``(N, max_len + 1, d)``; ``lengths[n]`` is the step
    count ``k`` of path ``n``.
    """

    centers: np.ndarray
    lengths: np.ndarray
    targets: np.ndarray

    def __len__(self):
        return len(self.targets)

    def __getitem__(self, idx):
        return PathDataset(self.centers[idx], self.lengths[idx], self.targets[idx])

    @property
    def max_len(self):
        return self.centers.shape[1] - 1

    @property
    def dim(self):
        return self.centers.shape[2]

    @property
    def deltas(self):
        return self.centers[:, 1:] - self.centers[:, :-1]


def vectorize(paths, max_len=None):
    """Pad paths into a :class:`PathDataset` (``max_len`` defaults to the longest ``k``)."""
    if not paths:
        raise ConfigError("cannot vectorize an empty path list")
    dims = {p.centers.shape[1] for p in paths}
    if len(dims) != 1:
        raise InputError("paths have mixed dimensions")
    if not all(p.valid for p in paths):
        raise InputError("only valid paths can be vectorized")
    lengths = np.array([p.k for p in paths], dtype=np.int64)
    longest = int(lengths.max())
    max_len = longest if max_len is None else int(max_len)
    if max_len < longest:
        raise InputError(f"max_len {max_len} is shorter than the longest path ({longest})")
    centers = np.empty((len(paths), max_len + 1, dims.pop()))
    for n, p in enumerate(paths):
        centers[n, : p.k + 1] = p.centers
        centers[n, p.k + 1 :] = p.centers[-1]
    targets = np.array([p.target for p in paths], dtype=float)
    return PathDataset(centers, lengths, targets)


def repad(dataset, max_len):
    """Same paths padded to a different ``max_len``."""
    if max_len < int(dataset.lengths.max()):
        raise InputError("max_len is shorter than the longest path")
    n, _, d = dataset.centers.shape
    centers = np.empty((n, max_len + 1, d))
    keep = min(max_len, dataset.max_len) + 1
    centers[:, :keep] = dataset.centers[:, :keep]
    centers[:, keep:] = dataset.centers[:, -1:]
    return PathDataset(centers, dataset.lengths.copy(), dataset.targets.copy())


def _live_mask(batch):
    # step 0 is always evaluated for the solution head
    steps = np.arange(batch.max_len)
    return (steps[None, :] < batch.lengths[:, None]) | (steps[None, :] == 0)


def predict_boundary(net, batch):
    """Per-path boundary predictions (no gradients)."""
    mask = _live_mask(batch)
    out, _ = net.forward_train(batch.centers[:, :-1][mask])
    return _accumulate(out, batch, mask)[0]


def _accumulate(out, batch, mask):
    d = batch.dim
    delta = batch.deltas[mask]
    contrib = out[:, 1] * delta[:, 0]
    for j in range(1, d):
        contrib = contrib + out[:, 1 + j] * delta[:, j]
    dense = np.zeros(mask.shape)
    dense[mask] = contrib
    first = np.zeros(mask.shape, dtype=bool)
    first[:, 0] = True
    pred = out[first[mask], 0].copy()
    # fixed left-to-right order keeps the sum independent of the padding width
    for i in range(mask.shape[1]):
        pred += dense[:, i]
    return pred, delta, first[mask]


def path_loss(net, batch):
    """Mean squared boundary mismatch and its parameter gradients."""
    if len(batch) == 0:
        raise InputError("empty batch")
    mask = _live_mask(batch)
    out, acts = net.forward_train(batch.centers[:, :-1][mask])
    pred, delta, is_first = _accumulate(out, batch, mask)
    resid = pred - batch.targets
    loss = float(np.mean(resid * resid))
    scale = (2.0 / len(batch)) * resid
    path_of_row = np.repeat(np.arange(len(batch)), mask.sum(axis=1))
    grad_out = np.zeros_like(out)
    grad_out[is_first, 0] = scale
    grad_out[:, 1:] = scale[path_of_row, None] * delta
    return loss, net.backward(acts, grad_out)


@dataclass
class TrainConfig:
    lr: float = 3e-4
    batch_size: int = 2048
    epochs: int = 50
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1", key="epochs")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1", key="batch_size")
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive", key="lr")


def _minibatches(n, cfg, rng):
    order = rng.permutation(n) if cfg.shuffle else np.arange(n)
    size = min(cfg.batch_size, n)
    return [order[i : i + size] for i in range(0, n, size)]


def _fit(net, n, loss_fn, cfg, callback=None):
    if cfg.batch_size > n:
        raise ConfigError(f"batch_size {cfg.batch_size} exceeds dataset size {n}", key="batch_size")
    rng = np.random.default_rng(cfg.seed)
    state = AdamState.for_network(net, cfg.lr)
    history = []
    for epoch in range(1, cfg.epochs + 1):
        total = 0.0
        for idx in _minibatches(n, cfg, rng):
            loss, grads = loss_fn(idx)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss in epoch {epoch}", epoch=epoch)
            adam_step(net, grads, state)
            total += loss * len(idx)
        history.append(total / n)
        if callback is not None:
            callback(epoch, history[-1], net)
    return net, history


def train(net, dataset, cfg, callback=None):
    """Minibatch Adam on :func:`path_loss`; returns ``(net, epoch_losses)``.

    ``callback(epoch, loss, net)`` runs after every epoch.
    """
    if len(dataset) == 0:
        raise ConfigError("dataset is empty")
    return _fit(net, len(dataset), lambda idx: path_loss(net, dataset[idx]), cfg, callback)


def regression_loss(net, x, y):
    out, acts = net.forward_train(x)
    resid = out[:, 0] - y
    grad_out = ((2.0 / len(y)) * resid)[:, None]
    return float(np.mean(resid * resid)), net.backward(acts, grad_out)


def train_wos_driven(points, estimates, cfg, hidden=(32, 64, 128), seed=None, callback=None, init="glorot"):
    """Regress a scalar network directly on WoS point estimates."""
    x = np.asarray(points, dtype=float)
    y = np.asarray(estimates, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise InputError("points and estimates must have equal lengths")
    net = Network(x.shape[1], hidden, 1, cfg.seed if seed is None else seed, init)
    return _fit(net, len(y), lambda idx: regression_loss(net, x[idx], y[idx]), cfg, callback)


def predict_field(net, grid):
    """Both heads of a :class:`YzNet` on every node: ``(u_grid, grad_grid)``."""
    u, z = net.forward(grid.coords)
    return grid.with_values(u), grid.with_values(z)


def predict_scalar_field(net, grid):
    return grid.with_values(net.evaluate(grid.coords)[:, 0])
