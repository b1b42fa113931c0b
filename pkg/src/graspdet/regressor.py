"""From-scratch dense regression head.

Architecture: input features -> 512 tanh -> 512 tanh -> 6 linear, with
inverted dropout (p = 0.5) between the dense layers in train mode. Loss
is MSE against the normalized 6-D target; optimization is bias-corrected
Adam. Everything runs in double precision so the finite-difference
gradient check is meaningful.

The output layer is linear rather than tanh: targets live in [0, 1] and
a tanh output saturates at the endpoints. `output_tanh=True` restores
the all-tanh variant.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NonFiniteGradient, StaleCache

OUT_DIM = 6

PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")


@dataclass
class DenseHead:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    dropout_p: float = 0.5
    output_tanh: bool = False

    @property
    def in_dim(self) -> int:
        return self.W1.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    def all_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.params().values())

    def copy(self) -> "DenseHead":
        return DenseHead(*(getattr(self, n).copy() for n in PARAM_NAMES),
                         dropout_p=self.dropout_p,
                         output_tanh=self.output_tanh)


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_head(cls, head: DenseHead, lr: float = 1e-3) -> "AdamState":
        return cls(m={n: np.zeros_like(p) for n, p in head.params().items()},
                   v={n: np.zeros_like(p) for n, p in head.params().items()},
                   lr=lr)


@dataclass
class ForwardCache:
    head: DenseHead
    f: np.ndarray        # n x dim input
    a1: np.ndarray       # tanh output, layer 1 (pre-dropout)
    h1: np.ndarray       # layer-1 activations fed downstream
    a2: np.ndarray
    h2: np.ndarray
    out: np.ndarray      # n x 6
    mask1: np.ndarray | None
    mask2: np.ndarray | None


def init_params(dim: int, seed: int, hidden: int = 512,
                dropout_p: float = 0.5, output_tanh: bool = False) -> DenseHead:
    """Scaled-uniform init: W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
    biases zero. Deterministic per seed."""
    if dim <= 0:
        raise ValueError(f"dim must be positive, got {dim}")
    rng = np.random.default_rng(seed)

    def layer(fan_in, fan_out):
        s = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-s, s, size=(fan_in, fan_out)), np.zeros(fan_out)

    W1, b1 = layer(dim, hidden)
    W2, b2 = layer(hidden, hidden)
    W3, b3 = layer(hidden, OUT_DIM)
    return DenseHead(W1, b1, W2, b2, W3, b3,
                     dropout_p=dropout_p, output_tanh=output_tanh)


def forward(head: DenseHead, f: np.ndarray, train: bool = False,
            rng: np.random.Generator | None = None,
            masks: tuple[np.ndarray, np.ndarray] | None = None,
            ) -> tuple[np.ndarray, ForwardCache]:
    """Run the head on a feature batch (n x dim, or a single dim vector).

    Train mode applies inverted dropout: kept units are scaled by
    1/(1-p) so eval needs no rescaling. Masks come from `rng` unless
    frozen masks are supplied explicitly (gradient checking).
    """
    f = np.atleast_2d(np.asarray(f, dtype=np.float64))
    if f.shape[1] != head.in_dim:
        raise DimMismatch(
            f"features have dim {f.shape[1]}, head expects {head.in_dim}")

    a1 = np.tanh(f @ head.W1 + head.b1)
    mask1 = mask2 = None
    p = head.dropout_p
    if train and p > 0.0:
        if masks is not None:
            mask1, mask2 = masks
        else:
            if rng is None:
                raise ValueError("train-mode forward needs rng or frozen masks")
            mask1 = rng.random(a1.shape) >= p
        h1 = a1 * mask1 / (1.0 - p)
    else:
        h1 = a1

    a2 = np.tanh(h1 @ head.W2 + head.b2)
    if train and p > 0.0:
        if mask2 is None:
            mask2 = rng.random(a2.shape) >= p
        h2 = a2 * mask2 / (1.0 - p)
    else:
        h2 = a2

    out = h2 @ head.W3 + head.b3
    if head.output_tanh:
        out = np.tanh(out)
    cache = ForwardCache(head, f, a1, h1, a2, h2, out, mask1, mask2)
    return out, cache


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over the 6 output components (and the batch)."""
    pred = np.atleast_2d(pred)
    target = np.atleast_2d(target)
    return float(np.mean((pred - target) ** 2))


def backward(head: DenseHead, cache: ForwardCache,
             target: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of mse_loss w.r.t. every parameter, honoring the
    dropout masks recorded in the cache."""
    if cache.head is not head:
        raise StaleCache("cache was produced by a different head")
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    n = cache.out.shape[0]
    p = head.dropout_p

    d_out = 2.0 * (cache.out - target) / (n * OUT_DIM)
    if head.output_tanh:
        d_out = d_out * (1.0 - cache.out ** 2)

    grads = {
        "W3": cache.h2.T @ d_out,
        "b3": d_out.sum(axis=0),
    }
    d_h2 = d_out @ head.W3.T
    if cache.mask2 is not None:
        d_h2 = d_h2 * cache.mask2 / (1.0 - p)
    d_z2 = d_h2 * (1.0 - cache.a2 ** 2)
    grads["W2"] = cache.h1.T @ d_z2
    grads["b2"] = d_z2.sum(axis=0)

    d_h1 = d_z2 @ head.W2.T
    if cache.mask1 is not None:
        d_h1 = d_h1 * cache.mask1 / (1.0 - p)
    d_z1 = d_h1 * (1.0 - cache.a1 ** 2)
    grads["W1"] = cache.f.T @ d_z1
    grads["b1"] = d_z1.sum(axis=0)
    return grads


def adam_step(head: DenseHead, grads: dict[str, np.ndarray],
              state: AdamState) -> None:
    """One bias-corrected Adam update, in place."""
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise NonFiniteGradient(f"gradient for {name} is not finite")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for name in PARAM_NAMES:
        g = grads[name]
        state.m[name] = state.beta1 * state.m[name] + (1 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1 - state.beta2) * g ** 2
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        getattr(head, name)[...] -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def grad_check(dim: int = 16, seed: int = 0, hidden: int = 8,
               dropout: bool = False, fd_step: float = 1e-5) -> float:
    """Compare backward() against central finite differences over every
    parameter of a small random head; returns the worst relative error.

    With dropout enabled the masks are frozen so both gradient routes see
    the same network function.
    """
    rng = np.random.default_rng(seed)
    head = init_params(dim, seed, hidden=hidden,
                       dropout_p=0.5 if dropout else 0.0)
    f = rng.standard_normal((3, dim))
    target = rng.random((3, OUT_DIM))

    masks = None
    if dropout:
        masks = (rng.random((3, hidden)) >= 0.5,
                 rng.random((3, hidden)) >= 0.5)

    def loss_fn():
        out, _ = forward(head, f, train=dropout, masks=masks)
        return mse_loss(out, target)

    out, cache = forward(head, f, train=dropout, masks=masks)
    grads = backward(head, cache, target)

    worst = 0.0
    for name in PARAM_NAMES:
        param = getattr(head, name)
        flat = param.ravel()
        g_flat = grads[name].ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + fd_step
            up = loss_fn()
            flat[i] = orig - fd_step
            down = loss_fn()
            flat[i] = orig
            fd = (up - down) / (2.0 * fd_step)
            denom = max(abs(fd), abs(g_flat[i]), 1e-8)
            worst = max(worst, abs(fd - g_flat[i]) / denom)
    return worst


CKPT_MAGIC = b"GCKP"
CKPT_VERSION = 1


def save_checkpoint(path: str, head: DenseHead, state: AdamState) -> None:
    """Versioned binary checkpoint; save -> load round-trips bit-exact."""
    h1 = head.b1.size
    h2 = head.b2.size
    with open(path, "wb") as f:
        f.write(CKPT_MAGIC)
        f.write(struct.pack("<I", CKPT_VERSION))
        f.write(struct.pack("<QQQB", head.in_dim, h1, h2,
                            1 if head.output_tanh else 0))
        f.write(struct.pack("<dQdddd", head.dropout_p, state.t,
                            state.lr, state.beta1, state.beta2, state.eps))
        for name in PARAM_NAMES:
            f.write(np.asarray(getattr(head, name), dtype="<f8").tobytes())
        for acc in (state.m, state.v):
            for name in PARAM_NAMES:
                f.write(np.asarray(acc[name], dtype="<f8").tobytes())


def load_checkpoint(path: str) -> tuple[DenseHead, AdamState]:
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:4] != CKPT_MAGIC:
        raise ValueError(f"{path} is not a checkpoint file")
    off = 4
    (version,) = struct.unpack_from("<I", buf, off); off += 4
    if version != CKPT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    dim, h1, h2, out_tanh = struct.unpack_from("<QQQB", buf, off); off += 25
    dropout_p, t, lr, beta1, beta2, eps = struct.unpack_from("<dQdddd", buf, off)
    off += 48
    shapes = {"W1": (dim, h1), "b1": (h1,), "W2": (h1, h2), "b2": (h2,),
              "W3": (h2, OUT_DIM), "b3": (OUT_DIM,)}

    def read_block():
        nonlocal off
        block = {}
        for name in PARAM_NAMES:
            n = int(np.prod(shapes[name]))
            block[name] = np.frombuffer(
                buf, dtype="<f8", count=n, offset=off).reshape(shapes[name]).copy()
            off += n * 8
        return block

    params = read_block()
    m = read_block()
    v = read_block()
    head = DenseHead(**params, dropout_p=dropout_p,
                     output_tanh=bool(out_tanh))
    state = AdamState(m=m, v=v, t=t, lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    return head, state
