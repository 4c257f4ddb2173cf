"""Neural-network building blocks with analytic gradients.

Every layer follows one protocol: forward(x) caches whatever backward
needs, backward(dy) returns dx and fills .grads aligned with .params.
Arrays keep the caller's dtype throughout, so float64 gradient checking
and float32 training share a single implementation. forward(x,
inference=True) skips caching, which makes read-only prediction safe to
run concurrently.
"""

import numpy as np

from ..errors import ModelError


class Layer:
    """Base class; params/grads are parallel lists (possibly empty)."""

    def __init__(self):
        self.params = []
        self.grads = []

    def forward(self, x, inference=False):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError


def _im2col3(x):
    # (B,C,H,W) -> (B*H*W, C*9) patch matrix, zero padding 1
    b, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (3, 3), axis=(2, 3))
    return win.transpose(0, 2, 3, 1, 4, 5).reshape(b * h * w, c * 9)


class Conv2D(Layer):
    """3x3 convolution, stride 1, same padding, via im2col matmul.

    The weight is stored matmul-ready as (in_channels*9, out_channels);
    fan-in for initialization purposes is in_channels*9.
    """

    def __init__(self, in_channels, out_channels, weight, bias):
        super().__init__()
        if weight.shape != (in_channels * 9, out_channels):
            raise ModelError(
                f"conv weight shape {weight.shape} != {(in_channels * 9, out_channels)}"
            )
        if bias.shape != (out_channels,):
            raise ModelError(f"conv bias shape {bias.shape} != ({out_channels},)")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.params = [weight, bias]
        self.grads = [None, None]
        self._cols = None
        self._in_shape = None

    def forward(self, x, inference=False):
        b, c, h, w = x.shape
        if c != self.in_channels:
            raise ModelError(f"conv expected {self.in_channels} channels, got {c}")
        weight, bias = self.params
        cols = _im2col3(x)
        y = cols @ weight + bias
        if not inference:
            self._cols = cols
            self._in_shape = x.shape
        return y.reshape(b, h, w, self.out_channels).transpose(0, 3, 1, 2)

    def backward(self, dy):
        b, c, h, w = self._in_shape
        weight, _ = self.params
        dyc = dy.transpose(0, 2, 3, 1).reshape(b * h * w, self.out_channels)
        self.grads[0] = self._cols.T @ dyc
        self.grads[1] = dyc.sum(axis=0)
        dcols = (dyc @ weight.T).reshape(b, h, w, c, 3, 3)
        dxp = np.zeros((b, c, h + 2, w + 2), dtype=dy.dtype)
        for di in range(3):
            for dj in range(3):
                dxp[:, :, di:di + h, dj:dj + w] += dcols[:, :, :, :, di, dj].transpose(0, 3, 1, 2)
        return dxp[:, :, 1:-1, 1:-1]


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x, inference=False):
        mask = x > 0
        if not inference:
            self._mask = mask
        return np.where(mask, x, x.dtype.type(0))

    def backward(self, dy):
        return np.where(self._mask, dy, dy.dtype.type(0))


class MaxPool2(Layer):
    """2x2 max pooling, stride 2; odd trailing rows/columns are dropped.

    Ties resolve to the first element in block scan order, so the
    backward scatter is deterministic. Works on strided quadrant views
    rather than gathered blocks; np.maximum keeps its first operand on
    ties, so the chained reduction matches first-index argmax exactly.
    """

    def __init__(self):
        super().__init__()
        self._sel = None
        self._in_shape = None

    @staticmethod
    def _quadrants(x):
        b, c, h, w = x.shape
        core = x[:, :, : h // 2 * 2, : w // 2 * 2]
        return (core[:, :, 0::2, 0::2], core[:, :, 0::2, 1::2],
                core[:, :, 1::2, 0::2], core[:, :, 1::2, 1::2])

    def forward(self, x, inference=False):
        b, c, h, w = x.shape
        if h < 2 or w < 2:
            raise ModelError(f"cannot 2x2-pool a {h}x{w} map")
        q = self._quadrants(x)
        y = np.maximum(np.maximum(q[0], q[1]), np.maximum(q[2], q[3]))
        if not inference:
            taken = q[0] == y
            sel = [taken.copy()]
            for quad in q[1:]:
                hit = (quad == y) & ~taken
                sel.append(hit)
                taken |= hit
            self._sel = sel
            self._in_shape = x.shape
        return y

    def backward(self, dy):
        dx = np.zeros(self._in_shape, dtype=dy.dtype)
        zero = dy.dtype.type(0)
        for quad, sel in zip(self._quadrants(dx), self._sel):
            quad[...] = np.where(sel, dy, zero)
        return dx


class GlobalAvgPool(Layer):
    """(B,C,H,W) -> (B,C) spatial mean; makes the head length-agnostic."""

    def __init__(self):
        super().__init__()
        self._in_shape = None

    def forward(self, x, inference=False):
        if not inference:
            self._in_shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, dy):
        b, c, h, w = self._in_shape
        scale = dy.dtype.type(1.0 / (h * w))
        return np.broadcast_to((dy * scale)[:, :, None, None], self._in_shape).copy()


class Dense(Layer):
    def __init__(self, in_features, out_features, weight, bias):
        super().__init__()
        if weight.shape != (in_features, out_features):
            raise ModelError(
                f"dense weight shape {weight.shape} != {(in_features, out_features)}"
            )
        if bias.shape != (out_features,):
            raise ModelError(f"dense bias shape {bias.shape} != ({out_features},)")
        self.params = [weight, bias]
        self.grads = [None, None]
        self._x = None

    def forward(self, x, inference=False):
        if not inference:
            self._x = x
        weight, bias = self.params
        return x @ weight + bias

    def backward(self, dy):
        weight, _ = self.params
        self.grads[0] = self._x.T @ dy
        self.grads[1] = dy.sum(axis=0)
        return dy @ weight.T


def softmax(logits):
    """Row-wise stable softmax."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class SoftmaxCrossEntropy:
    """Fused softmax + mean cross-entropy over the batch.

    forward returns (loss, probs); backward needs no upstream gradient
    and returns dlogits already divided by the batch size.
    """

    def __init__(self):
        self._probs = None
        self._labels = None

    def forward(self, logits, labels):
        probs = softmax(logits)
        self._probs = probs
        self._labels = labels
        picked = probs[np.arange(len(labels)), labels]
        # clip only guards the log; gradient uses the exact probs
        loss = float(np.mean(-np.log(np.maximum(picked, 1e-300))))
        return loss, probs

    def backward(self):
        dlogits = self._probs.copy()
        dlogits[np.arange(len(self._labels)), self._labels] -= 1.0
        return dlogits / self._probs.dtype.type(len(self._labels))


def forward_network(layers, x, inference=False):
    for layer in layers:
        x = layer.forward(x, inference=inference)
    return x


def backward_network(layers, dy):
    for layer in reversed(layers):
        dy = layer.backward(dy)
    return dy


def collect_params(layers):
    return [p for layer in layers for p in layer.params]


def collect_grads(layers):
    return [g for layer in layers for g in layer.grads]
