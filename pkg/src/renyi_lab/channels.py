"""Completely positive trace-preserving maps in Kraus form.

Channels are stored as explicit Kraus lists.  Random channels come from Haar
isometries (truncated Haar unitaries), dilations rebuild a square channel as
``E(g) = tr_env[U (g (x) tau) U^dag]`` with a pure environment state, and the
twirl helper gives the closed form of the Haar average over the environment
factor.  All randomness is seed-keyed through :mod:`renyi_lab.rng`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import HermitianMatrix, PsdOperator, as_psd, clamped_psd, partial_trace
from .rng import ginibre, stream

CPTP_TOL = 1e-10
REORTH_PROJECTION = 0.99


class QuantumChannel:
    """Finite Kraus representation ``g -> sum_i K_i g K_i^dag``.

    The constructor validates shapes and the Kraus-count bound
    ``1 <= len(kraus) <= dim_in * dim_out``; trace preservation is a separate
    check (``validate_cptp``) so that non-unital/non-TP candidates can still
    be represented and then rejected.
    """

    __slots__ = ("kraus", "dim_in", "dim_out")

    def __init__(self, kraus) -> None:
        mats = [np.array(k, dtype=complex) for k in kraus]
        if not mats:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = mats[0].shape
        if len(shape) != 2:
            raise ValueError(f"Kraus operators must be matrices, got shape {shape}")
        for k in mats:
            if k.shape != shape:
                raise ValueError("all Kraus operators must share one shape")
            k.setflags(write=False)
        dim_out, dim_in = shape
        if dim_in < 1 or dim_out < 1:
            raise ValueError("Kraus operators must be non-empty matrices")
        if len(mats) > dim_in * dim_out:
            raise ValueError(
                f"{len(mats)} Kraus operators exceed the bound {dim_in * dim_out} "
                f"for a {dim_in} -> {dim_out} channel"
            )
        self.kraus = tuple(mats)
        self.dim_in = dim_in
        self.dim_out = dim_out

    def __repr__(self) -> str:
        return (
            f"QuantumChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, "
            f"kraus={len(self.kraus)})"
        )


def validate_cptp(channel: QuantumChannel) -> bool:
    """True when ``sum_i K_i^dag K_i = I`` within CPTP_TOL (spectral norm)."""
    acc = np.zeros((channel.dim_in, channel.dim_in), dtype=complex)
    for k in channel.kraus:
        acc += k.conj().T @ k
    defect = acc - np.eye(channel.dim_in)
    defect = (defect + defect.conj().T) / 2
    return float(np.max(np.abs(np.linalg.eigvalsh(defect)))) <= CPTP_TOL


def apply_channel(channel: QuantumChannel, state: PsdOperator) -> PsdOperator:
    """Image ``sum_i K_i g K_i^dag`` of a PSD operator, clamped back to PSD."""
    state = as_psd(state)
    if state.dim != channel.dim_in:
        raise ValueError(
            f"state dim {state.dim} does not match channel input dim {channel.dim_in}"
        )
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=complex)
    for k in channel.kraus:
        out += k @ state.mat @ k.conj().T
    return clamped_psd(out)


def _haar_from_rng(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary by QR of a Ginibre matrix with the phase fix R_ii/|R_ii|."""
    z = ginibre(rng, n)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))


def haar_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed n x n unitary, deterministic per seed."""
    if n < 1:
        raise ValueError(f"dimension must be at least 1, got {n}")
    return _haar_from_rng(stream(seed, n), n)


def _random_channel_from_rng(
    rng: np.random.Generator, dim_in: int, dim_out: int, kraus_count: int
) -> QuantumChannel:
    total = dim_out * kraus_count
    if not 1 <= kraus_count <= dim_in * dim_out:
        raise ValueError(
            f"kraus_count must lie in [1, {dim_in * dim_out}], got {kraus_count}"
        )
    if dim_in > total:
        raise ValueError(
            f"no isometry from dim {dim_in} into dim {dim_out} x {kraus_count}; "
            "increase kraus_count or dim_out"
        )
    u = _haar_from_rng(rng, total)
    isometry = u[:, :dim_in]
    kraus = [isometry[i * dim_out : (i + 1) * dim_out, :] for i in range(kraus_count)]
    return QuantumChannel(kraus)


def random_channel(dim_in: int, dim_out: int, kraus_count: int, seed: int) -> QuantumChannel:
    """CPTP channel from a Haar-random isometry, deterministic per seed.

    The isometry V : C^dim_in -> C^dim_out (x) C^kraus_count is the first
    dim_in columns of a Haar unitary; slicing its rows into dim_out-blocks
    yields Kraus operators satisfying the completeness relation exactly up
    to round-off.
    """
    return _random_channel_from_rng(
        stream(seed, dim_in, dim_out, kraus_count), dim_in, dim_out, kraus_count
    )


@dataclass(frozen=True)
class StinespringDilation:
    """Unitary dilation data: ``E(g) = tr_env[U (g (x) env_state) U^dag]``."""

    unitary: np.ndarray
    env_state: PsdOperator
    dim_sys: int
    dim_env: int


def _complete_to_unitary(columns: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a full orthonormal basis.

    Pivoted modified Gram-Schmidt over standard basis vectors: at each step
    the candidate with the largest residual norm is orthogonalized and
    appended, with a second orthogonalization pass whenever the projection
    onto the current basis exceeds REORTH_PROJECTION.
    """
    dim, have = columns.shape
    basis = np.zeros((dim, dim), dtype=complex)
    basis[:, :have] = columns
    count = have
    while count < dim:
        partial = basis[:, :count]
        weights = np.linalg.norm(partial, axis=1)  # |P e_k| per basis vector k
        residual_sq = np.maximum(1.0 - weights**2, 0.0)
        pivot = int(np.argmax(residual_sq))
        if residual_sq[pivot] <= 1e-24:
            raise RuntimeError(
                f"unitary completion stalled at column {count} of {dim}"
            )
        vec = np.zeros(dim, dtype=complex)
        vec[pivot] = 1.0
        coeff = partial.conj().T @ vec
        vec = vec - partial @ coeff
        if float(np.linalg.norm(coeff)) > REORTH_PROJECTION:
            vec = vec - partial @ (partial.conj().T @ vec)
        vec = vec / np.linalg.norm(vec)
        basis[:, count] = vec
        count += 1
    return basis


def stinespring(channel: QuantumChannel) -> StinespringDilation:
    """Unitary dilation of a square CPTP channel with a pure environment.

    The environment has dimension ``max(len(kraus), 2)`` and starts in the
    first basis state.  Composite index convention: system slot i and
    environment slot j map to row i * dim_env + j, so tracing out the second
    factor recovers the channel.
    """
    if channel.dim_in != channel.dim_out:
        raise ValueError(
            f"dilation needs a square channel, got {channel.dim_in} -> {channel.dim_out}"
        )
    if not validate_cptp(channel):
        raise ValueError("dilation needs a trace-preserving channel")
    n = channel.dim_in
    env = max(len(channel.kraus), 2)
    total = n * env
    # Column j * env + 0 carries (K_i e_j) in environment slot i.
    isometry = np.zeros((total, n), dtype=complex)
    view = isometry.reshape(n, env, n)
    for i, k in enumerate(channel.kraus):
        view[:, i, :] = k
    unitary = np.zeros((total, total), dtype=complex)
    fixed = [j * env for j in range(n)]
    unitary[:, fixed] = isometry
    completion = _complete_to_unitary(isometry)[:, n:]
    free = [c for c in range(total) if c % env != 0]
    unitary[:, free] = completion
    env_state = np.zeros((env, env), dtype=complex)
    env_state[0, 0] = 1.0
    return StinespringDilation(
        unitary=unitary,
        env_state=PsdOperator(env_state),
        dim_sys=n,
        dim_env=env,
    )


def apply_dilation(dilation: StinespringDilation, state: PsdOperator) -> PsdOperator:
    """Evaluate ``tr_env[U (state (x) env_state) U^dag]``."""
    state = as_psd(state)
    if state.dim != dilation.dim_sys:
        raise ValueError(
            f"state dim {state.dim} does not match system dim {dilation.dim_sys}"
        )
    joint = np.kron(state.mat, dilation.env_state.mat)
    rotated = dilation.unitary @ joint @ dilation.unitary.conj().T
    reduced = partial_trace(
        HermitianMatrix((rotated + rotated.conj().T) / 2),
        (dilation.dim_sys, dilation.dim_env),
        keep="first",
    )
    return clamped_psd(reduced.mat)


apply = apply_channel


def twirl_second_factor(matrix, dims: tuple[int, int]) -> HermitianMatrix:
    """Haar average of ``(1 (x) u) Y (1 (x) u)^dag`` over the second factor.

    Equals ``tr_2(Y) (x) I / d2``; exposed in closed form so Monte Carlo
    estimates have an exact target.
    """
    d1, d2 = int(dims[0]), int(dims[1])
    reduced = partial_trace(matrix, (d1, d2), keep="first")
    return HermitianMatrix(np.kron(reduced.mat, np.eye(d2) / d2))
