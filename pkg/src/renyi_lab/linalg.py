"""Dense Hermitian linear algebra with explicit kernel conventions.

Everything in this package works on small dense complex matrices, so all
spectral computations funnel through one eigendecomposition routine and one
positive-semidefinite wrapper class.  The conventions that matter:

* Hermiticity is validated on construction (relative tolerance) and the
  stored matrix is the symmetrized ``(M + M^dag)/2``.
* Eigenvalues within a relative threshold of zero are treated as an exact
  kernel.  Negative and fractional powers act on the support only, which is
  the Moore-Penrose convention for matrix powers.
* The support threshold is relative to the largest eigenvalue, with a tiny
  absolute floor so the zero operator is handled gracefully.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERM_RTOL = 1e-10
RECON_RTOL = 1e-9
EIG_CLAMP_RTOL = 1e-10
SUPPORT_RTOL = 1e-10
ZERO_SUPPORT_FLOOR = 1e-300


class HermitianMatrix:
    """Immutable dense complex Hermitian matrix.

    The constructor rejects inputs whose anti-Hermitian part exceeds
    ``HERM_RTOL`` relative to the matrix norm, then stores the symmetrized
    matrix with the write flag cleared.
    """

    __slots__ = ("_mat",)

    def __init__(self, entries) -> None:
        mat = np.array(entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        if mat.shape[0] == 0:
            raise ValueError("dimension must be at least 1")
        scale = np.linalg.norm(mat)
        defect = np.linalg.norm(mat - mat.conj().T)
        if defect > HERM_RTOL * max(scale, ZERO_SUPPORT_FLOOR):
            raise ValueError(
                f"matrix is not Hermitian: relative defect {defect / scale:.3e}"
            )
        mat = (mat + mat.conj().T) / 2
        mat.setflags(write=False)
        self._mat = mat

    @property
    def mat(self) -> np.ndarray:
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    def trace(self) -> float:
        return float(np.trace(self._mat).real)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


def as_hermitian(matrix) -> HermitianMatrix:
    """Coerce to HermitianMatrix, validating hermiticity for raw arrays."""
    if isinstance(matrix, HermitianMatrix):
        return matrix
    return HermitianMatrix(matrix)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition: ascending real eigenvalues and unitary eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def eigh(matrix) -> Spectrum:
    """Full eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending; the eigenvector matrix is unitary with
    columns matching the eigenvalue order.  Deterministic for identical input.
    """
    herm = as_hermitian(matrix)
    try:
        values, vectors = np.linalg.eigh(herm.mat)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"eigendecomposition failed for dim={herm.dim}: {exc}") from exc
    return Spectrum(values=values, vectors=vectors)


def support_threshold(lam_max: float) -> float:
    """Eigenvalue cutoff separating support from kernel for a given scale."""
    return max(SUPPORT_RTOL * max(lam_max, 0.0), ZERO_SUPPORT_FLOOR)


def _thresholded(values: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues with negatives and sub-threshold noise zeroed.

    Applied whenever a PsdOperator is built from a raw matrix: directions
    this close to the kernel are numerically indistinguishable from it, and
    letting them survive poisons any later negative power.
    """
    values = np.maximum(values, 0.0)
    values[values <= support_threshold(float(values[-1]))] = 0.0
    return values


class PsdOperator(HermitianMatrix):
    """Hermitian matrix certified positive semidefinite, with cached spectrum.

    Construction performs one eigendecomposition.  Eigenvalues more negative
    than ``-EIG_CLAMP_RTOL * lam_max`` raise; eigenvalues at or below the
    support threshold are clamped to exactly zero and belong to the kernel.
    The support decision made here is final: spectral functions applied later
    (``matrix_power``, logarithms) preserve it rather than re-thresholding.
    """

    __slots__ = ("_values", "_vectors", "_support_rank")

    def __init__(self, entries) -> None:
        super().__init__(entries if not isinstance(entries, HermitianMatrix) else entries.mat)
        spectrum = eigh(self)
        values = spectrum.values.copy()
        lam_max = float(values[-1])
        clamp_tol = EIG_CLAMP_RTOL * max(lam_max, 0.0)
        if values[0] < -max(clamp_tol, ZERO_SUPPORT_FLOOR):
            raise ValueError(
                f"matrix is not positive semidefinite: min eigenvalue {values[0]:.3e}"
            )
        values[values <= support_threshold(lam_max)] = 0.0
        self._finish(values, spectrum.vectors)

    def _finish(self, values: np.ndarray, vectors: np.ndarray) -> None:
        values.setflags(write=False)
        vectors = np.array(vectors, dtype=complex)
        vectors.setflags(write=False)
        self._values = values
        self._vectors = vectors
        self._support_rank = int(np.count_nonzero(values > 0.0))

    @classmethod
    def _from_spectrum(cls, values, vectors) -> "PsdOperator":
        """Build directly from spectral data, skipping the eigensolver.

        Used by spectral functions so the argument's support carries over
        exactly.  Values must already be nonnegative; they are re-sorted
        ascending (negative powers reverse the order) and the base matrix is
        reconstructed and symmetrized.
        """
        values = np.asarray(values, dtype=float)
        vectors = np.asarray(vectors, dtype=complex)
        order = np.argsort(values, kind="stable")
        values = values[order].copy()
        vectors = vectors[:, order].copy()
        mat = (vectors * values) @ vectors.conj().T
        mat = (mat + mat.conj().T) / 2
        obj = cls.__new__(cls)
        mat.setflags(write=False)
        obj._mat = mat
        obj._finish(values, vectors)
        return obj

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._values

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._vectors

    @property
    def support_rank(self) -> int:
        return self._support_rank

    def support_projector(self) -> np.ndarray:
        cols = self._vectors[:, self._values > 0.0]
        return cols @ cols.conj().T

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, support_rank={self.support_rank})"


def as_psd(matrix) -> PsdOperator:
    """Coerce to PsdOperator (validating PSD-ness for anything else)."""
    if isinstance(matrix, PsdOperator):
        return matrix
    return PsdOperator(matrix)


def clamped_psd(matrix) -> PsdOperator:
    """Positive part of a nearly-Hermitian matrix: negative eigenvalues to zero.

    Intended for expressions that are PSD in exact arithmetic but pick up
    floating-point noise (channel images, convex mixtures).  The hermiticity
    guard here is deliberately loose (1e-6 relative, against blunders only);
    use the PsdOperator constructor when strict validation is wanted.
    """
    if isinstance(matrix, HermitianMatrix):
        mat = matrix.mat
    else:
        mat = np.asarray(matrix, dtype=complex)
        scale = np.linalg.norm(mat)
        defect = np.linalg.norm(mat - mat.conj().T)
        if defect > 1e-6 * max(scale, ZERO_SUPPORT_FLOOR):
            raise ValueError(
                f"matrix is far from Hermitian: relative defect {defect / scale:.3e}"
            )
        mat = (mat + mat.conj().T) / 2
    values, vectors = np.linalg.eigh(mat)
    return PsdOperator._from_spectrum(_thresholded(values), vectors)


def gram_psd(factor: np.ndarray, *, keep_small: bool = False) -> PsdOperator:
    """The operator ``G @ G^dag`` for an arbitrary complex factor G.

    Exactly Hermitian PSD by construction, so this is the preferred way to
    form conjugations like S rho S = (S rho^(1/2))(S rho^(1/2))^dag when S
    carries a large dynamic range (negative or fractional powers).

    Squaring the factor also squares the floating-point noise floor, so
    eigenvalues far below the usual support cutoff can still be genuine.
    ``keep_small=True`` retains them; required when a later fractional power
    re-amplifies the small end of the spectrum, forbidden when a negative
    power follows (kernel noise would explode).

    The spectrum comes from the singular values of G, not from eigh of the
    product: that keeps the absolute error of a small eigenvalue at
    ``eps * s_max * s_i`` instead of ``eps * s_max^2``.
    """
    factor = np.asarray(factor, dtype=complex)
    left, singulars, _ = np.linalg.svd(factor)
    values = np.zeros(factor.shape[0])
    values[: singulars.size] = singulars**2
    values = values[::-1]
    vectors = left[:, ::-1]
    if not keep_small:
        values = _thresholded(values)
    return PsdOperator._from_spectrum(values, vectors)


def matrix_power(operator: PsdOperator, p: float) -> PsdOperator:
    """Spectral power ``A^p`` on the support of ``A``.

    Kernel eigenvalues map to zero for every exponent, so ``p = 0`` yields
    the support projector and negative ``p`` the Moore-Penrose inverse power.
    """
    operator = as_psd(operator)
    p = float(p)
    values = operator.eigenvalues
    out = np.zeros_like(values)
    pos = values > 0.0
    if p == 0.0:
        out[pos] = 1.0
    else:
        out[pos] = values[pos] ** p
    return PsdOperator._from_spectrum(out, operator.eigenvectors)


def matrix_log_support(operator: PsdOperator) -> HermitianMatrix:
    """Logarithm on the support; the kernel block stays zero."""
    operator = as_psd(operator)
    if operator.support_rank == 0:
        raise ValueError("empty support: cannot take the logarithm of the zero operator")
    values = operator.eigenvalues
    pos = values > 0.0
    logs = np.zeros_like(values)
    logs[pos] = np.log(values[pos])
    vectors = operator.eigenvectors
    return HermitianMatrix((vectors * logs) @ vectors.conj().T)


def kron(a, b):
    """Kronecker product.  Two PsdOperators combine spectrally (no new eigh)."""
    if isinstance(a, PsdOperator) and isinstance(b, PsdOperator):
        values = np.multiply.outer(a.eigenvalues, b.eigenvalues).ravel()
        vectors = np.kron(a.eigenvectors, b.eigenvectors)
        return PsdOperator._from_spectrum(values, vectors)
    return HermitianMatrix(np.kron(as_hermitian(a).mat, as_hermitian(b).mat))


def partial_trace(matrix, dims: tuple[int, int], keep: str) -> HermitianMatrix:
    """Trace out one tensor factor of an operator on C^dA (x) C^dB.

    ``keep`` selects the surviving factor, "first" or "second".  Row index
    convention: composite index (i, j) maps to i * dB + j.
    """
    herm = as_hermitian(matrix)
    d_first, d_second = int(dims[0]), int(dims[1])
    if d_first * d_second != herm.dim:
        raise ValueError(
            f"factor dims {d_first}x{d_second} do not match operator dim {herm.dim}"
        )
    tensor = herm.mat.reshape(d_first, d_second, d_first, d_second)
    if keep == "first":
        reduced = np.einsum("abcb->ac", tensor)
    elif keep == "second":
        reduced = np.einsum("abad->bd", tensor)
    else:
        raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")
    return HermitianMatrix(reduced)


def operator_norm(matrix) -> float:
    """Largest singular value; for Hermitian input, max |eigenvalue|."""
    if isinstance(matrix, PsdOperator):
        return float(matrix.eigenvalues[-1])
    if isinstance(matrix, HermitianMatrix):
        matrix = matrix.mat
    matrix = np.asarray(matrix, dtype=complex)
    if np.allclose(matrix, matrix.conj().T):
        return float(np.max(np.abs(np.linalg.eigvalsh(matrix))))
    return float(np.linalg.norm(matrix, 2))


def support_contained(inner: PsdOperator, outer: PsdOperator) -> bool:
    """Whether supp(inner) lies within supp(outer), up to relative tolerance.

    Decided by compressing ``inner`` onto the kernel of ``outer`` and
    comparing the leakage norm against ``SUPPORT_RTOL * ||inner||``.
    """
    inner = as_psd(inner)
    outer = as_psd(outer)
    if inner.dim != outer.dim:
        raise ValueError(f"dimension mismatch: {inner.dim} vs {outer.dim}")
    if outer.support_rank == outer.dim:
        return True
    kernel_cols = outer.eigenvectors[:, outer.eigenvalues <= 0.0]
    block = kernel_cols.conj().T @ inner.mat @ kernel_cols
    leakage = float(np.max(np.abs(np.linalg.eigvalsh((block + block.conj().T) / 2))))
    return leakage <= SUPPORT_RTOL * max(float(inner.eigenvalues[-1]), ZERO_SUPPORT_FLOOR)


def mix(a: PsdOperator, b: PsdOperator, weight: float) -> PsdOperator:
    """Convex combination ``weight * a + (1 - weight) * b`` as a PsdOperator."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    a = as_psd(a)
    b = as_psd(b)
    return clamped_psd(weight * a.mat + (1.0 - weight) * b.mat)
