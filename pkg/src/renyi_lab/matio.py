"""JSON exchange formats for matrices, channels, and dilations.

A Hermitian matrix travels as ``{"dim": n, "re": [[...]], "im": [[...]]}``
with row-major real and imaginary parts; hermiticity is validated on load.
Channels carry their Kraus list as general (possibly rectangular) complex
matrices, so those entries only have "re"/"im" blocks.
"""

from __future__ import annotations

import json

import numpy as np

from .channels import QuantumChannel, StinespringDilation
from .linalg import HermitianMatrix, PsdOperator, as_hermitian


def matrix_to_dict(matrix) -> dict:
    """Exchange dict for a square Hermitian matrix."""
    herm = as_hermitian(matrix)
    return {
        "dim": herm.dim,
        "re": herm.mat.real.tolist(),
        "im": herm.mat.imag.tolist(),
    }


def matrix_from_dict(obj) -> HermitianMatrix:
    """Parse the exchange dict, validating shape and hermiticity."""
    try:
        dim = int(obj["dim"])
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(
            f"matrix blocks must be {dim}x{dim}, got re {re.shape} and im {im.shape}"
        )
    return HermitianMatrix(re + 1j * im)


def save_matrix(path: str, matrix) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_dict(matrix), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_matrix(path: str) -> HermitianMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return matrix_from_dict(json.load(fh))


def load_psd(path: str) -> PsdOperator:
    """Load a matrix and certify it positive semidefinite."""
    return PsdOperator(load_matrix(path))


def _general_to_dict(matrix: np.ndarray) -> dict:
    arr = np.asarray(matrix, dtype=complex)
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def _general_from_dict(obj) -> np.ndarray:
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix block: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2:
        raise ValueError(f"re/im blocks disagree: {re.shape} vs {im.shape}")
    return re + 1j * im


def channel_to_dict(channel: QuantumChannel) -> dict:
    return {
        "dim_in": channel.dim_in,
        "dim_out": channel.dim_out,
        "kraus": [_general_to_dict(k) for k in channel.kraus],
    }


def channel_from_dict(obj) -> QuantumChannel:
    try:
        kraus_objs = obj["kraus"]
        dim_in = int(obj["dim_in"])
        dim_out = int(obj["dim_out"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed channel object: {exc}") from exc
    channel = QuantumChannel([_general_from_dict(k) for k in kraus_objs])
    if channel.dim_in != dim_in or channel.dim_out != dim_out:
        raise ValueError(
            f"declared dims {dim_in}->{dim_out} do not match Kraus shapes "
            f"{channel.dim_in}->{channel.dim_out}"
        )
    return channel


def save_channel(path: str, channel: QuantumChannel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_dict(channel), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_channel(path: str) -> QuantumChannel:
    with open(path, "r", encoding="utf-8") as fh:
        return channel_from_dict(json.load(fh))


def dilation_to_dict(dilation: StinespringDilation) -> dict:
    return {
        "dim_sys": dilation.dim_sys,
        "dim_env": dilation.dim_env,
        "unitary": _general_to_dict(dilation.unitary),
        "env_state": matrix_to_dict(dilation.env_state),
    }


def save_dilation(path: str, dilation: StinespringDilation) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dilation_to_dict(dilation), fh, indent=2, sort_keys=True)
        fh.write("\n")
