import numpy as np
from scipy.special import log_softmax, softmax

from app.engine.types import Activation, LabeledDataset, ParameterVector


def _activate(kind, z):
    if kind == Activation.TANH:
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _activation_grad(kind, z, a):
    if kind == Activation.TANH:
        return 1.0 - a * a
    return (z > 0).astype(z.dtype)


def forward(params: ParameterVector, features):
    """Return ``(logits, cache)``; ``cache`` keeps what backprop needs."""
    layers = list(params.layers())
    activation = params.arch.activation

    a = features
    cache = []
    for depth, (weights, bias) in enumerate(layers):
        z = a @ weights + bias
        if depth == len(layers) - 1:
            cache.append((a, z, None))
            return z, cache
        out = _activate(activation, z)
        cache.append((a, z, out))
        a = out


def predict_proba(params: ParameterVector, features):
    logits, _ = forward(params, features)
    return softmax(logits, axis=1)


def predict(params: ParameterVector, features):
    logits, _ = forward(params, features)
    return np.argmax(logits, axis=1)


def cross_entropy(params: ParameterVector, data: LabeledDataset):
    logits, _ = forward(params, data.features)
    log_probs = log_softmax(logits, axis=1)
    return float(-np.mean(log_probs[np.arange(len(data)), data.labels]))


def loss_and_grad(params: ParameterVector, features, labels):
    """Mean softmax cross-entropy over the batch and its flat gradient."""
    logits, cache = forward(params, features)
    n = features.shape[0]
    log_probs = log_softmax(logits, axis=1)
    loss = -np.mean(log_probs[np.arange(n), labels])

    delta = np.exp(log_probs)
    delta[np.arange(n), labels] -= 1.0
    delta /= n

    layers = list(params.layers())
    activation = params.arch.activation
    grads = [None] * len(layers)
    for depth in range(len(layers) - 1, -1, -1):
        a_in, _, _ = cache[depth]
        weights, _ = layers[depth]
        grads[depth] = (a_in.T @ delta, delta.sum(axis=0))
        if depth:
            _, z_prev, a_prev = cache[depth - 1]
            delta = (delta @ weights.T) * _activation_grad(
                activation, z_prev, a_prev
            )

    flat = np.concatenate(
        [np.concatenate([w.reshape(-1), b]) for w, b in grads]
    )
    return float(loss), flat
