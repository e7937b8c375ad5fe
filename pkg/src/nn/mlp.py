"""
Multilayer perceptron with a flat parameter vector

Layout per layer: weight matrix (fan_in × fan_out, row-major) followed by
the bias vector. Hidden layers use tanh, the output layer is linear.
Inputs may be a single vector or a (batch, fan_in) matrix; gradients are
summed over the batch.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np


class ShapeError(ValueError):
    """Input, upstream or parameter length does not fit the network"""


class Mlp:
    """
    Fully connected tanh network

    Attributes:
        layer_sizes: Widths from input to output
        params: Flat float64 parameter vector (owned, updated in place by trainers)
        seed: Seed the initial parameters were drawn from
    """

    def __init__(self, layer_sizes: Sequence[int], params: Optional[np.ndarray] = None,
                 seed: int = 0, output_scale: float = 1.0):
        """
        Args:
            layer_sizes: At least [fan_in, fan_out]
            params: Explicit parameters, otherwise seeded uniform ±1/√fan_in init
            seed: Initialization seed
            output_scale: Multiplier on the last layer's initial weights and bias
        """
        if len(layer_sizes) < 2 or any(int(w) < 1 for w in layer_sizes):
            raise ShapeError(f"Invalid layer sizes: {list(layer_sizes)}")
        self.layer_sizes = [int(w) for w in layer_sizes]
        self.seed = seed

        if params is None:
            params = self._init_params(seed, output_scale)
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ShapeError(f"Expected {self.n_params} parameters, got shape {params.shape}")
        self.params = params.copy()

    @property
    def n_params(self) -> int:
        """Σ (fan_in + 1)·fan_out"""
        return sum((a + 1) * b for a, b in zip(self.layer_sizes[:-1], self.layer_sizes[1:]))

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def _init_params(self, seed: int, output_scale: float) -> np.ndarray:
        rng = np.random.default_rng(seed)
        chunks = []
        n_layers = len(self.layer_sizes) - 1
        for idx, (fan_in, fan_out) in enumerate(zip(self.layer_sizes[:-1], self.layer_sizes[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            scale = output_scale if idx == n_layers - 1 else 1.0
            chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out) * scale)
            chunks.append(rng.uniform(-bound, bound, size=fan_out) * scale)
        return np.concatenate(chunks)

    def layers(self, params: Optional[np.ndarray] = None) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(W, b) views into the flat vector"""
        flat = self.params if params is None else params
        out = []
        offset = 0
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            w = flat[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out)
            offset += fan_in * fan_out
            b = flat[offset:offset + fan_out]
            offset += fan_out
            out.append((w, b))
        return out

    def _as_batch(self, x: np.ndarray) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.in_dim:
            raise ShapeError(f"Input shape {x.shape} does not match input width {self.in_dim}")
        return batch, single

    def forward_cached(self, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Forward pass keeping every layer's activation (input first)"""
        a, _ = self._as_batch(x)
        acts = [a]
        layers = self.layers()
        for idx, (w, b) in enumerate(layers):
            z = a @ w + b
            a = z if idx == len(layers) - 1 else np.tanh(z)
            acts.append(a)
        return a, acts

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Network output, same leading shape as x"""
        out, _ = self.forward_cached(x)
        return out[0] if np.asarray(x).ndim == 1 else out

    def backward(self, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """
        Gradient of Σ upstream·forward(x) with respect to all parameters

        Args:
            x: Input vector or batch
            upstream: dL/d(output), same leading shape as the output

        Returns:
            Flat gradient with the parameter layout
        """
        _, single = self._as_batch(x)
        g = np.asarray(upstream, dtype=np.float64)
        g = g[None, :] if single and g.ndim == 1 else g
        _, acts = self.forward_cached(x)
        if g.shape != acts[-1].shape:
            raise ShapeError(f"Upstream shape {np.shape(upstream)} does not match output {acts[-1].shape}")

        layers = self.layers()
        grads: List[np.ndarray] = []
        for idx in range(len(layers) - 1, -1, -1):
            w, _ = layers[idx]
            a_prev = acts[idx]
            grads.append(g.sum(axis=0))
            grads.append((a_prev.T @ g).ravel())
            if idx > 0:
                g = (g @ w.T) * (1.0 - a_prev ** 2)
        grads.reverse()
        return np.concatenate(grads)

    def copy(self) -> 'Mlp':
        return Mlp(self.layer_sizes, params=self.params, seed=self.seed)
