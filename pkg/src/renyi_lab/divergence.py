"""Order-alpha Renyi divergences for non-negative operators.

Two quantum quantities live here, both defined for a pair (rho, sigma) of
positive semidefinite operators with tr(rho) > 0 (normalization is not
assumed; the definitions divide by tr(rho)):

* the sandwiched divergence built from the trace functional
  ``Q_a = tr[(sigma^((1-a)/(2a)) rho sigma^((1-a)/(2a)))^a]``, and
* the traditional divergence built from ``tr[sigma^(1-a) rho^a]``.

Orders split into three branches: finite a in (0,1) or (1,inf), the limit
a = 1 (relative entropy), and a = inf (max-divergence).  Kernel convention
for a >= 1: the value is +inf whenever supp(rho) is not contained in
supp(sigma).  For a < 1 all powers act on supports, so values stay finite
unless the supports are essentially orthogonal.

Returned values are floats where +inf is a legitimate outcome; -inf never
occurs for valid inputs.  All logarithms are natural; rescale by 1/log(2)
for bits at display time.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import (
    PsdOperator,
    as_psd,
    gram_psd,
    matrix_log_support,
    matrix_power,
    support_contained,
)

ORDER_ONE_GUARD = 1e-6
Q_ZERO_FLOOR = 1e-300
_LOG_FLOOR = math.log(Q_ZERO_FLOOR)


def _logsumexp(values: np.ndarray) -> float:
    """log(sum(exp(values))) without overflow; -inf for an empty array."""
    if values.size == 0:
        return -math.inf
    top = float(np.max(values))
    return top + math.log(float(np.sum(np.exp(values - top))))


def _check_finite_order(alpha: float) -> float:
    a = float(alpha)
    if math.isnan(a) or a <= 0.0 or math.isinf(a):
        raise ValueError(f"order must be a finite positive number, got {alpha!r}")
    if a == 1.0:
        raise ValueError("order 1 has its own branch; this functional needs a != 1")
    return a


def _guard_near_one(a: float) -> None:
    if abs(a - 1.0) < ORDER_ONE_GUARD:
        raise ValueError(
            f"order {a!r} is within {ORDER_ONE_GUARD:g} of 1; "
            "use order 1 (the relative-entropy branch) instead"
        )


class DivergencePair:
    """A pair (rho, sigma) of same-dimension PSD operators with tr(rho) > 0."""

    __slots__ = ("rho", "sigma", "trace_rho")

    def __init__(self, rho, sigma) -> None:
        rho = as_psd(rho)
        sigma = as_psd(sigma)
        if rho.dim != sigma.dim:
            raise ValueError(f"dimension mismatch: rho {rho.dim}, sigma {sigma.dim}")
        trace_rho = rho.trace()
        if trace_rho <= 0.0:
            raise ValueError("tr(rho) must be strictly positive")
        self.rho = rho
        self.sigma = sigma
        self.trace_rho = trace_rho

    @property
    def dim(self) -> int:
        return self.rho.dim

    def __repr__(self) -> str:
        return f"DivergencePair(dim={self.dim})"


def _log_q_alpha(pair: DivergencePair, a: float) -> float:
    """log of the sandwiched trace functional; +inf on support escape for a > 1,
    -inf when the functional vanishes."""
    if a > 1.0 and not support_contained(pair.rho, pair.sigma):
        return math.inf
    values = sandwich_core(pair, a).eigenvalues
    support = values[values > 0.0]
    return _logsumexp(a * np.log(support))


def q_alpha(pair: DivergencePair, alpha: float) -> float:
    """Trace functional ``tr[(sigma^((1-a)/(2a)) rho sigma^((1-a)/(2a)))^a]``.

    For a > 1 the sigma power is negative, so the value is +inf unless
    supp(rho) <= supp(sigma); on the support the Moore-Penrose convention
    applies.  The sandwiched product is assembled as an exactly-PSD Gram
    square and the power of its spectrum is taken in the log domain, so
    extreme orders neither overflow nor underflow prematurely.
    """
    a = _check_finite_order(alpha)
    log_q = _log_q_alpha(pair, a)
    if math.isinf(log_q):
        return math.inf if log_q > 0 else 0.0
    if log_q < _LOG_FLOOR:
        return 0.0
    if log_q > -_LOG_FLOOR:
        return math.inf
    return math.exp(log_q)


def _relative_entropy(pair: DivergencePair) -> float:
    if not support_contained(pair.rho, pair.sigma):
        return math.inf
    rho_values = pair.rho.eigenvalues
    pos = rho_values > 0.0
    tr_rho_log_rho = float(np.sum(rho_values[pos] * np.log(rho_values[pos])))
    log_sigma = matrix_log_support(pair.sigma).mat
    tr_rho_log_sigma = float(np.trace(pair.rho.mat @ log_sigma).real)
    return (tr_rho_log_rho - tr_rho_log_sigma) / pair.trace_rho


def _max_divergence(pair: DivergencePair) -> float:
    if not support_contained(pair.rho, pair.sigma):
        return math.inf
    inv_half = matrix_power(pair.sigma, -0.5)
    rho_half = matrix_power(pair.rho, 0.5)
    core = gram_psd(inv_half.mat @ rho_half.mat)
    top = float(core.eigenvalues[-1])
    if top < Q_ZERO_FLOOR:
        return math.inf  # unreachable for tr(rho) > 0, kept for totality
    return math.log(top)


def d_alpha(pair: DivergencePair, order: float) -> float:
    """Sandwiched Renyi divergence of order ``order``.

    Finite orders a != 1 give ``log(Q_a / tr(rho)) / (a - 1)``; ``order=1``
    gives the relative entropy ``tr[rho (log rho - log sigma)] / tr(rho)``;
    ``order=math.inf`` gives ``log || sigma^(-1/2) rho sigma^(-1/2) ||``.
    Finite orders within 1e-6 of 1 are refused (the prefactor amplifies
    round-off there); call with order exactly 1 instead.
    """
    a = float(order)
    if math.isnan(a) or a <= 0.0:
        raise ValueError(f"order must be positive, got {order!r}")
    if math.isinf(a):
        return _max_divergence(pair)
    if a == 1.0:
        return _relative_entropy(pair)
    _guard_near_one(a)
    log_q = _log_q_alpha(pair, a)
    if math.isinf(log_q) and log_q > 0:
        return math.inf
    log_ratio = log_q - math.log(pair.trace_rho)
    if math.isinf(log_ratio):
        # log Q = -inf: the functional vanished, which needs a < 1 and
        # orthogonal supports.  A merely huge negative log stays finite and
        # divides through (large orders reach it whenever sigma dominates).
        return math.inf
    return log_ratio / (a - 1.0)


def d_prime_alpha(pair: DivergencePair, alpha: float) -> float:
    """Traditional Renyi divergence ``log(tr[sigma^(1-a) rho^a] / tr rho)/(a-1)``.

    Same kernel conventions as the sandwiched version: +inf for a > 1 when
    supp(rho) escapes supp(sigma), powers on supports otherwise.
    """
    a = _check_finite_order(alpha)
    _guard_near_one(a)
    if a > 1.0 and not support_contained(pair.rho, pair.sigma):
        return math.inf
    # tr[sigma^(1-a) rho^a] = sum_ij |<u_i, v_j>|^2 s_i^(1-a) r_j^a over both
    # supports, evaluated in the log domain so extreme orders stay finite.
    s_vals = pair.sigma.eigenvalues
    r_vals = pair.rho.eigenvalues
    overlap = np.abs(pair.sigma.eigenvectors.conj().T @ pair.rho.eigenvectors) ** 2
    s_on = s_vals > 0.0
    r_on = r_vals > 0.0
    weights = overlap[np.ix_(s_on, r_on)]
    log_terms = (
        (1.0 - a) * np.log(s_vals[s_on])[:, None]
        + a * np.log(r_vals[r_on])[None, :]
    )
    active = weights > 0.0
    log_value = _logsumexp(np.log(weights[active]) + log_terms[active])
    log_ratio = log_value - math.log(pair.trace_rho)
    if math.isinf(log_ratio):
        # Every overlap term vanished: a < 1 with orthogonal supports.
        return math.inf
    return log_ratio / (a - 1.0)


def fidelity(pair: DivergencePair) -> float:
    """Uhlmann fidelity ``tr[(sigma^(1/2) rho sigma^(1/2))^(1/2)]``.

    Related to the order-1/2 divergence by ``D_{1/2} = -2 log(F / tr rho)``
    when rho is normalized; exposed mainly as an independent cross-check.
    """
    half = matrix_power(pair.sigma, 0.5)
    rho_half = matrix_power(pair.rho, 0.5)
    core = gram_psd(half.mat @ rho_half.mat, keep_small=True)
    values = core.eigenvalues
    return float(np.sum(np.sqrt(values[values > 0.0])))


def classical_renyi(p, q, order: float) -> float:
    """Renyi divergence of two non-negative vectors (diagonal-case oracle).

    Matches the quantum definitions when rho = diag(p), sigma = diag(q):
    ``log(sum p_i^a q_i^(1-a) / sum p) / (a - 1)`` with 0/0 terms dropped,
    relative entropy at order 1, and ``log max(p_i / q_i)`` at order inf.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"need two equal-length vectors, got {p.shape} and {q.shape}")
    if np.any(p < 0.0) or np.any(q < 0.0):
        raise ValueError("entries must be non-negative")
    total_p = float(np.sum(p))
    if total_p <= 0.0:
        raise ValueError("sum(p) must be strictly positive")
    a = float(order)
    if math.isnan(a) or a <= 0.0:
        raise ValueError(f"order must be positive, got {order!r}")

    escapes = bool(np.any((p > 0.0) & (q == 0.0)))
    if math.isinf(a):
        if escapes:
            return math.inf
        active = p > 0.0
        return math.log(float(np.max(p[active] / q[active])))
    if a == 1.0:
        if escapes:
            return math.inf
        active = p > 0.0
        return float(np.sum(p[active] * (np.log(p[active]) - np.log(q[active])))) / total_p
    _guard_near_one(a)
    if a > 1.0 and escapes:
        return math.inf
    active = (p > 0.0) & (q > 0.0)
    if not np.any(active):
        # Only reachable for a < 1: the supports are disjoint.
        return math.inf
    log_s = _logsumexp(a * np.log(p[active]) + (1.0 - a) * np.log(q[active]))
    log_ratio = log_s - math.log(total_p)
    if math.isinf(log_ratio):
        return math.inf
    return log_ratio / (a - 1.0)


def sandwich_core(pair: DivergencePair, alpha: float) -> PsdOperator:
    """The operator ``sigma^((1-a)/(2a)) rho sigma^((1-a)/(2a))`` itself.

    Assembled as a Gram product (S rho^(1/2))(S rho^(1/2))^dag so it is
    positive semidefinite by construction even when the sigma power has a
    large dynamic range.  Small eigenvalues are kept: for a < 1 the later
    power ``a`` re-amplifies them, so truncating at the usual support cutoff
    would visibly bias the trace functional on ill-conditioned pairs.
    """
    a = _check_finite_order(alpha)
    exponent = (1.0 - a) / (2.0 * a)
    half = matrix_power(pair.sigma, exponent)
    rho_half = matrix_power(pair.rho, 0.5)
    return gram_psd(half.mat @ rho_half.mat, keep_small=True)
