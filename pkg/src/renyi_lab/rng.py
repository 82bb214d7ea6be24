"""Seedable counter-based random streams for reproducible sampling.

Every stochastic routine in this package draws from a Philox stream keyed by
an explicit integer seed (plus optional sub-indices), so campaigns replay
bit-identically for a given seed and distinct trials get independent streams.
Gaussian variates are produced by the polar Box-Muller transform on top of the
stream's uniforms.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *indices: int) -> np.random.Generator:
    """Independent Philox stream keyed by ``(seed, *indices)``."""
    key = np.random.SeedSequence((int(seed),) + tuple(int(i) for i in indices))
    return np.random.Generator(np.random.Philox(key))


def complex_gaussians(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normals (E|z|^2 = 1) via polar Box-Muller."""
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    """Complex Ginibre matrix with iid standard complex normal entries."""
    if cols is None:
        cols = rows
    return complex_gaussians(rng, (int(rows), int(cols)))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random Hermitian matrix (Hermitian part of a Ginibre sample)."""
    g = ginibre(rng, dim)
    return (g + g.conj().T) / 2


def random_psd(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """Random positive semidefinite matrix ``scale * W W^dag`` (Wishart-like)."""
    w = ginibre(rng, dim)
    return scale * (w @ w.conj().T)


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random density matrix from the trace-normalized Wishart ensemble."""
    m = random_psd(rng, dim)
    return m / np.trace(m).real
