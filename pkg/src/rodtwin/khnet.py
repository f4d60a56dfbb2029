"""Learned boundary-integral reconstruction network.

Two small dense stacks (128/64/1, tanh) play the roles of the boundary kernel
and its normal derivative. For an interior point i and boundary sensor j the
physical layer forms phi_ij = u_j * dG_ij - G_ij * dhat_j and the integration
layer contracts it with fixed boundary quadrature weights to give the
normalized temperature estimate at i. Training is plain minibatch Adam on MSE
with hand-written reverse-mode gradients; no autodiff framework.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import TrainSettings
from .conduction import TemperatureField
from .errors import (ConfigurationError, DomainError, ShapeError,
                     TrainingError)
from .mesh import RodMesh
from .pipeline import Dataset, NormConstants, SensorSet

LAYER_SIZES = (5, 128, 64, 1)
PARAM_KEYS = ("W1", "b1", "W2", "b2", "W3", "b3")

DIVERGENCE_FACTOR = 10.0
DIVERGENCE_PATIENCE = 50


# ---------------------------------------------------------------------------
# dense stacks
# ---------------------------------------------------------------------------

def init_stack(rng: np.random.Generator, sizes=LAYER_SIZES) -> dict:
    """Uniform +-1/sqrt(fan_in) initialization of one dense stack."""
    params = {}
    for li in range(3):
        fan_in, fan_out = sizes[li], sizes[li + 1]
        s = 1.0 / np.sqrt(fan_in)
        params[f"W{li + 1}"] = rng.uniform(-s, s, size=(fan_in, fan_out))
        params[f"b{li + 1}"] = np.zeros(fan_out)
    return params


def _check_shapes(params: dict, n_features: int):
    try:
        if params["W1"].shape[0] != n_features:
            raise ShapeError(f"stack expects {params['W1'].shape[0]} features, "
                             f"got {n_features}")
        if params["W1"].shape[1] != params["W2"].shape[0] \
                or params["W2"].shape[1] != params["W3"].shape[0] \
                or params["W3"].shape[1] != 1:
            raise ShapeError("inconsistent layer shapes")
    except (KeyError, AttributeError, IndexError) as e:
        raise ShapeError(f"malformed stack parameters: {e}") from e


def dense_forward(params: dict, x) -> np.ndarray:
    """y = W3.tanh(W2.tanh(W1 x + b1) + b2) + b3 (linear output)."""
    x = np.atleast_2d(np.asarray(x, float))
    _check_shapes(params, x.shape[1])
    a1 = np.tanh(x @ params["W1"] + params["b1"])
    a2 = np.tanh(a1 @ params["W2"] + params["b2"])
    return (a2 @ params["W3"] + params["b3"]).ravel()


def _dense_forward_cache(params: dict, x: np.ndarray):
    a1 = np.tanh(x @ params["W1"] + params["b1"])
    a2 = np.tanh(a1 @ params["W2"] + params["b2"])
    y = (a2 @ params["W3"] + params["b3"]).ravel()
    return y, (x, a1, a2)


def _dense_backward(params: dict, cache, dy: np.ndarray) -> dict:
    x, a1, a2 = cache
    dz3 = dy[:, None]
    grads = {"W3": a2.T @ dz3, "b3": dz3.sum(axis=0)}
    dz2 = (dz3 @ params["W3"].T) * (1.0 - a2 * a2)
    grads["W2"] = a1.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    dz1 = (dz2 @ params["W2"].T) * (1.0 - a1 * a1)
    grads["W1"] = x.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return grads


# ---------------------------------------------------------------------------
# physical + integration layers
# ---------------------------------------------------------------------------

def kh_physical_layer(u, dhat, G, dG):
    """Boundary integrand phi = u * dG - G * dhat (elementwise)."""
    return np.asarray(u) * np.asarray(dG) - np.asarray(G) * np.asarray(dhat)


def kh_integrate(phi, w):
    """Weighted boundary sum T_hat_i = sum_j w_j phi_ij; weights are fixed."""
    return np.asarray(phi) @ np.asarray(w) if np.ndim(phi) == 2 \
        else float(np.dot(phi, w))


def boundary_features(points: np.ndarray, sensors_rz: np.ndarray,
                      norm: NormConstants) -> np.ndarray:
    """Normalized kernel inputs for every (interior point, sensor) pair.

    points: (N, 2) of (r, z) [m]; sensors_rz: (M, 2). Output (N, M, 5):
    [r', z', z_j', dz', rho] with coordinates min-max scaled (radius in the
    100x-stretched frame), dz' over the full axial range and rho the scaled
    Euclidean distance over the scaled-frame diagonal.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    sns = np.atleast_2d(np.asarray(sensors_rz, float))
    r100 = 100.0 * pts[:, 0]
    z = pts[:, 1]
    rj100 = 100.0 * sns[:, 0]
    zj = sns[:, 1]

    rn = (r100 - norm.r_center) / norm.r_scale
    zn = (z - norm.z_center) / norm.z_scale
    zjn = (zj - norm.z_center) / norm.z_scale
    dzn = (z[:, None] - zj[None, :]) / (2.0 * norm.z_scale)
    diag = np.hypot(2.0 * norm.r_scale, 2.0 * norm.z_scale)
    rho = np.hypot(r100[:, None] - rj100[None, :], z[:, None] - zj[None, :]) / diag

    n, mcount = pts.shape[0], sns.shape[0]
    feats = np.empty((n, mcount, 5))
    feats[:, :, 0] = rn[:, None]
    feats[:, :, 1] = zn[:, None]
    feats[:, :, 2] = zjn[None, :]
    feats[:, :, 3] = dzn
    feats[:, :, 4] = rho
    return feats


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

@dataclass
class KhModel:
    G_stack: dict
    dG_stack: dict
    norm: NormConstants
    eta: float
    layer_sizes: tuple = LAYER_SIZES

    def predict_normalized(self, feats, u_n, dhat_n, w):
        """Forward the full pipeline; feats (N, M, 5), sensor vectors (M,)."""
        n, mcount, nf = feats.shape
        flat = feats.reshape(n * mcount, nf)
        g = dense_forward(self.G_stack, flat).reshape(n, mcount)
        dg = dense_forward(self.dG_stack, flat).reshape(n, mcount)
        phi = kh_physical_layer(u_n, dhat_n, g, dg)
        return kh_integrate(phi, w)


def mse_loss(predictions, truths) -> float:
    p = np.asarray(predictions, float).ravel()
    t = np.asarray(truths, float).ravel()
    if p.size == 0 or p.size != t.size:
        raise DomainError("mse_loss needs equal nonempty vectors")
    d = p - t
    return float(d @ d / p.size)


def lr_schedule(epoch: int, schedule=TrainSettings().schedule) -> float:
    """Staged decaying learning rate; clamps at the final stage."""
    if epoch < 0:
        raise DomainError("epoch must be >= 0")
    for threshold, lr in schedule:
        if epoch < threshold:
            return lr
    return schedule[-1][1]


# ---------------------------------------------------------------------------
# gradients + Adam
# ---------------------------------------------------------------------------

def loss_and_gradients(model: KhModel, feats, u_n, dhat_n, w, y):
    """MSE loss and exact reverse-mode gradients for both stacks.

    feats (B, M, 5); u_n/dhat_n/w (B, M) per-sample sensor vectors; y (B,).
    """
    b, mcount, nf = feats.shape
    if b == 0:
        raise DomainError("empty batch")
    flat = feats.reshape(b * mcount, nf)
    g, cache_g = _dense_forward_cache(model.G_stack, flat)
    dg, cache_d = _dense_forward_cache(model.dG_stack, flat)
    g = g.reshape(b, mcount)
    dg = dg.reshape(b, mcount)
    phi = u_n * dg - g * dhat_n
    yhat = np.einsum("bm,bm->b", w, phi)

    resid = yhat - y
    loss = float(resid @ resid / b)
    dyhat = 2.0 * resid / b
    dphi = dyhat[:, None] * w
    d_dg = (dphi * u_n).ravel()
    d_g = (-dphi * dhat_n).ravel()

    grads_g = _dense_backward(model.G_stack, cache_g, d_g)
    grads_d = _dense_backward(model.dG_stack, cache_d, d_dg)
    for gr in (grads_g, grads_d):
        for v in gr.values():
            if not np.all(np.isfinite(v)):
                raise TrainingError("non-finite gradient encountered")
    return loss, grads_g, grads_d


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def for_model(cls, model: KhModel) -> "AdamState":
        zeros = {}
        for name, stack in (("G", model.G_stack), ("dG", model.dG_stack)):
            for k, p in stack.items():
                zeros[f"{name}.{k}"] = np.zeros_like(p)
        return cls(m={k: v.copy() for k, v in zeros.items()},
                   v={k: v.copy() for k, v in zeros.items()})


def adam_step(model: KhModel, state: AdamState, grads_g: dict, grads_d: dict,
              alpha: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> None:
    """In-place Adam update with bias correction."""
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for name, stack, grads in (("G", model.G_stack, grads_g),
                               ("dG", model.dG_stack, grads_d)):
        for k in PARAM_KEYS:
            key = f"{name}.{k}"
            grad = grads[k].reshape(stack[k].shape)
            m = state.m[key]
            v = state.v[key]
            m *= beta1
            m += (1.0 - beta1) * grad
            v *= beta2
            v += (1.0 - beta2) * grad * grad
            stack[k] -= alpha * (m / bc1) / (np.sqrt(v / bc2) + eps)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainHistory:
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    best_epoch: int = -1
    wall_time: float = 0.0


def _assemble_split(dataset: Dataset, split: str):
    """Stack (features, u, dhat, w, y) over every (case, interior point) sample."""
    cases = dataset.split(split)
    if not cases:
        raise ConfigurationError(f"dataset has no {split!r} cases")
    norm = dataset.norm
    feats, u, d, w, y = [], [], [], [], []
    for c in cases:
        pts = np.column_stack([c.r, c.z])
        srz = np.column_stack([c.sensors.r, c.sensors.z])
        f = boundary_features(pts, srz, norm)
        n = f.shape[0]
        feats.append(f)
        u.append(np.tile(norm.norm_T(c.sensors.T), (n, 1)))
        d.append(np.tile(norm.norm_d(c.sensors.dhat), (n, 1)))
        w.append(np.tile(c.sensors.w, (n, 1)))
        y.append(norm.norm_T(c.T))
    return (np.concatenate(feats), np.concatenate(u), np.concatenate(d),
            np.concatenate(w), np.concatenate(y))


def _full_mse(model: KhModel, arrays) -> float:
    feats, u, d, w, y = arrays
    n, mcount, nf = feats.shape
    flat = feats.reshape(n * mcount, nf)
    g = dense_forward(model.G_stack, flat).reshape(n, mcount)
    dg = dense_forward(model.dG_stack, flat).reshape(n, mcount)
    yhat = np.einsum("bm,bm->b", w, u * dg - g * d)
    return mse_loss(yhat, y)


def _clone_params(stack: dict) -> dict:
    return {k: v.copy() for k, v in stack.items()}


def train(dataset: Dataset, settings: TrainSettings | None = None
          ) -> tuple[KhModel, TrainHistory]:
    """Minibatch Adam over all training samples with per-epoch validation.

    Deterministic under a fixed seed; retains the best-validation checkpoint.
    """
    settings = settings or dataset.config.training
    for split in ("train", "validate", "test"):
        if not dataset.split(split):
            raise ConfigurationError(f"dataset is missing the {split!r} split")

    tr = _assemble_split(dataset, "train")
    va = _assemble_split(dataset, "validate")
    feats, u, d, w, y = tr
    n_samples = feats.shape[0]

    rng = np.random.default_rng(settings.seed)
    model = KhModel(G_stack=init_stack(rng), dG_stack=init_stack(rng),
                    norm=dataset.norm, eta=dataset.config.sensors.eta)
    state = AdamState.for_model(model)

    history = TrainHistory()
    best_val = np.inf
    best = None
    initial_mse = None
    bad_epochs = 0
    t0 = time.perf_counter()

    for epoch in range(settings.epochs):
        alpha = settings.fixed_lr if settings.fixed_lr is not None \
            else lr_schedule(epoch, settings.schedule)
        perm = rng.permutation(n_samples)
        losses = 0.0
        nb = 0
        for start in range(0, n_samples, settings.batch_size):
            sel = perm[start:start + settings.batch_size]
            loss, gg, gd = loss_and_gradients(model, feats[sel], u[sel],
                                              d[sel], w[sel], y[sel])
            adam_step(model, state, gg, gd, alpha, settings.beta1,
                      settings.beta2, settings.eps)
            losses += loss
            nb += 1
        train_mse = losses / nb
        val_mse = _full_mse(model, va)
        history.train_mse.append(train_mse)
        history.val_mse.append(val_mse)
        history.lr.append(alpha)

        if initial_mse is None:
            initial_mse = train_mse
        if train_mse > DIVERGENCE_FACTOR * initial_mse:
            bad_epochs += 1
            if bad_epochs >= DIVERGENCE_PATIENCE:
                raise TrainingError(
                    f"training diverged: MSE > {DIVERGENCE_FACTOR}x initial for "
                    f"{DIVERGENCE_PATIENCE} consecutive epochs")
        else:
            bad_epochs = 0

        if val_mse < best_val:
            best_val = val_mse
            best = (_clone_params(model.G_stack), _clone_params(model.dG_stack))
            history.best_epoch = epoch

    if best is not None:
        model.G_stack, model.dG_stack = best
    history.wall_time = time.perf_counter() - t0
    return model, history


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def reconstruct_field(model: KhModel, sensors: SensorSet,
                      mesh: RodMesh) -> TemperatureField:
    """Evaluate the forward pipeline at every mesh node and denormalize."""
    u_n = model.norm.norm_T(sensors.T)
    if np.any(np.abs(u_n) > 3.0):
        raise ConfigurationError(
            "sensor temperatures far outside the model's normalization range; "
            "model/sensor mismatch?")
    d_n = model.norm.norm_d(sensors.dhat)
    r, z, _ = mesh.node_table()
    feats = boundary_features(np.column_stack([r, z]),
                              np.column_stack([sensors.r, sensors.z]), model.norm)
    t_hat = model.predict_normalized(feats, u_n, d_n, sensors.w)
    T = model.norm.denorm_T(t_hat)
    nf = mesh.n_fuel_nodes
    return TemperatureField(mesh=mesh,
                            T_fuel=T[:nf].reshape(mesh.nz_fuel, mesh.nr_fuel),
                            T_clad=T[nf:].reshape(mesh.nz, mesh.nr_clad))
