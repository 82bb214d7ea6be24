"""Variational representations and trace-power functionals.

The trace functional Q_a of :mod:`renyi_lab.divergence` has a Legendre-type
representation over PSD test operators H:

    a > 1:      Q_a = sup_H [ a tr(H rho) - (a-1) tr (H^(1/2) sigma^((a-1)/a) H^(1/2))^(a/(a-1)) ]
    0 < a < 1:  Q_a = inf_H [ same expression ]

with explicit optimizer ``H = sigma^(-b) (sigma^(-b) rho sigma^(-b))^(a-1) sigma^(-b)``
where ``b = (a-1)/(2a)``.  This module evaluates the objective, builds the
optimizer, and runs randomized sup/inf probes.

It also hosts the scalar trace-power machinery those proofs lean on:
``A -> tr (B^dag A^p B)^(q/p)`` for 0 < |p| <= q <= 1, its inf-representation
for negative p, the two-variable form whose joint convexity drives
everything, and the trace version of Young's inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergence import DivergencePair, q_alpha, _check_finite_order
from .linalg import (
    PsdOperator,
    as_psd,
    clamped_psd,
    gram_psd,
    matrix_power,
)
from .rng import ginibre, stream

EQUALITY_RTOL = 1e-8
INEQUALITY_SLACK = 1e-9
YOUNG_SLACK = 1e-10


@dataclass(frozen=True)
class VariationalInstance:
    """A (rho, sigma, alpha) triple for the Legendre-type representation."""

    rho: PsdOperator
    sigma: PsdOperator
    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", as_psd(self.rho))
        object.__setattr__(self, "sigma", as_psd(self.sigma))
        object.__setattr__(self, "alpha", _check_finite_order(self.alpha))
        if self.rho.dim != self.sigma.dim:
            raise ValueError(
                f"dimension mismatch: rho {self.rho.dim}, sigma {self.sigma.dim}"
            )

    @property
    def beta(self) -> float:
        return (self.alpha - 1.0) / (2.0 * self.alpha)

    @property
    def dim(self) -> int:
        return self.rho.dim


def variational_objective(instance: VariationalInstance, test_op: PsdOperator) -> float:
    """Evaluate ``a tr(H rho) - (a-1) tr (H^(1/2) sigma^((a-1)/a) H^(1/2))^(a/(a-1))``.

    For a < 1 both exponents flip sign and the pseudoinverse convention
    applies wherever sigma or the inner product is singular.
    """
    test_op = as_psd(test_op)
    if test_op.dim != instance.dim:
        raise ValueError(f"H has dim {test_op.dim}, expected {instance.dim}")
    a = instance.alpha
    first = a * float(np.trace(test_op.mat @ instance.rho.mat).real)
    # H^(1/2) sigma^((a-1)/a) H^(1/2) as the Gram square of H^(1/2) sigma^b.
    sigma_half_pow = matrix_power(instance.sigma, instance.beta)
    root = matrix_power(test_op, 0.5)
    inner = gram_psd(root.mat @ sigma_half_pow.mat)
    values = inner.eigenvalues
    pos = values > 0.0
    second = float(np.sum(values[pos] ** (a / (a - 1.0))))
    return first - (a - 1.0) * second


def optimal_H(instance: VariationalInstance) -> PsdOperator:
    """The closed-form optimizer ``sigma^(-b) (sigma^(-b) rho sigma^(-b))^(a-1) sigma^(-b)``."""
    half = matrix_power(instance.sigma, -instance.beta)
    rho_half = matrix_power(instance.rho, 0.5)
    core = gram_psd(half.mat @ rho_half.mat)
    mid_half = matrix_power(core, (instance.alpha - 1.0) / 2.0)
    return gram_psd(half.mat @ mid_half.mat)


@dataclass(frozen=True)
class VariationalReport:
    """Outcome of randomized sup/inf probing of the representation."""

    alpha: float
    q_value: float
    optimizer_value: float
    optimizer_gap: float
    trials: int
    max_violation: float
    passed: bool


def verify_variational(instance: VariationalInstance, trials: int, seed: int) -> VariationalReport:
    """Probe the representation with random test operators.

    Checks that the objective at the closed-form optimizer reproduces Q_a
    within EQUALITY_RTOL (relative) and that no random H beats it in the
    sup/inf direction by more than INEQUALITY_SLACK.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    pair = DivergencePair(instance.rho, instance.sigma)
    a = instance.alpha
    q_value = q_alpha(pair, a)
    opt_value = variational_objective(instance, optimal_H(instance))
    gap = abs(opt_value - q_value) / max(1.0, abs(q_value))
    dim = instance.dim
    max_violation = 0.0
    for t in range(trials):
        rng = stream(seed, t)
        w = ginibre(rng, dim)
        scale = 10.0 ** rng.uniform(-1.0, 1.0)
        test_op = clamped_psd(scale * (w @ w.conj().T))
        value = variational_objective(instance, test_op)
        violation = value - q_value if a > 1.0 else q_value - value
        max_violation = max(max_violation, violation)
    passed = gap <= EQUALITY_RTOL and max_violation <= INEQUALITY_SLACK
    return VariationalReport(
        alpha=a,
        q_value=q_value,
        optimizer_value=opt_value,
        optimizer_gap=gap,
        trials=trials,
        max_violation=max_violation,
        passed=passed,
    )


@dataclass(frozen=True)
class TracePowerInstance:
    """Data for the functional ``A -> tr (B^dag A^p B)^(q/p)``.

    Valid exponents: 0 < |p| <= q <= 1 (q = 1 is the plain concavity /
    convexity statement, q < 1 the fractional generalization).  Negative p
    additionally needs A strictly positive.
    """

    A: PsdOperator
    B: np.ndarray
    p: float
    q: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", as_psd(self.A))
        b = np.array(self.B, dtype=complex)
        if b.ndim != 2 or b.shape[0] != self.A.dim:
            raise ValueError(
                f"B must be a matrix with {self.A.dim} rows, got shape {b.shape}"
            )
        b.setflags(write=False)
        object.__setattr__(self, "B", b)
        p = float(self.p)
        q = float(self.q)
        if p == 0.0 or not -1.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [-1, 1] and be nonzero, got {p}")
        if not 0.0 < q <= 1.0 or abs(p) > q:
            raise ValueError(f"need 0 < |p| <= q <= 1, got p={p}, q={q}")
        if p < 0.0 and self.A.support_rank < self.A.dim:
            raise ValueError("negative p requires positive definite A")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


def trace_power_functional(instance: TracePowerInstance) -> float:
    """Evaluate ``tr (B^dag A^p B)^(q/p)``.

    Concave in A for p in (0, 1], and for p in [-1, 0) on positive definite
    A; the q/p power acts on the support of B^dag A^p B.
    """
    p, q = instance.p, instance.q
    a_op = instance.A
    if p < 0.0 and a_op.support_rank < a_op.dim:
        raise ValueError("negative p requires a strictly positive A")
    core = _compressed_power(a_op, instance.B, p)
    values = core.eigenvalues
    pos = values > 0.0
    return float(np.sum(values[pos] ** (q / p)))


def two_variable_form(A: PsdOperator, X: PsdOperator, B: np.ndarray, p: float) -> float:
    """The jointly convex form ``tr [A^(p/2) B X^(1-p) B^dag A^(p/2)]`` for p in [-1, 0).

    Nonnegative by construction; requires positive definite A (it appears
    with a negative exponent).
    """
    p = float(p)
    if not -1.0 <= p < 0.0:
        raise ValueError(f"p must lie in [-1, 0), got {p}")
    return _cross_form(as_psd(A), as_psd(X), np.asarray(B, dtype=complex), p, 1.0 - p)


def _compressed_power(A: PsdOperator, B: np.ndarray, p: float) -> PsdOperator:
    """``B^dag A^p B`` as a Gram product, hence PSD by construction."""
    factor = matrix_power(A, p / 2.0).mat @ np.asarray(B, dtype=complex)
    return gram_psd(factor.conj().T)


def _cross_form(A: PsdOperator, X: PsdOperator, B: np.ndarray, p: float, x_exp: float) -> float:
    # tr[A^(p/2) B X^e B^dag A^(p/2)] = ||A^(p/2) B X^(e/2)||_F^2, always >= 0.
    if A.support_rank < A.dim:
        raise ValueError("negative p requires a strictly positive A")
    factor = matrix_power(A, p / 2.0).mat @ B @ matrix_power(X, x_exp / 2.0).mat
    return float(np.linalg.norm(factor)) ** 2


@dataclass(frozen=True)
class InfRepReport:
    """Outcome of probing the inf-representation of the trace-power functional."""

    p: float
    q: float
    lhs: float
    optimizer_gap: float
    trials: int
    max_violation: float
    passed: bool


def inf_representation_check(
    A: PsdOperator, B: np.ndarray, p: float, trials: int, seed: int, q: float = 1.0
) -> InfRepReport:
    """Probe ``r tr (B^dag A^p B)^(q/p) = inf_X [ tr A^(p/2) B X^(1-r) B^dag A^(p/2) - (1-r) tr X ]``.

    Here r = p/q < 0.  The infimum is attained at ``X = (B^dag A^p B)^(1/r)``,
    which needs B^dag A^p B nonsingular to stay bounded, so callers should
    pass full-rank B.  With q = 1 this is the plain negative-p statement.
    """
    p = float(p)
    q = float(q)
    if not -1.0 <= p < 0.0:
        raise ValueError(f"p must lie in [-1, 0), got {p}")
    if not 0.0 < q <= 1.0 or abs(p) > q:
        raise ValueError(f"need |p| <= q <= 1, got p={p}, q={q}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    A = as_psd(A)
    B = np.asarray(B, dtype=complex)
    r = p / q
    instance = TracePowerInstance(A=A, B=B, p=p, q=q)
    lhs = r * trace_power_functional(instance)

    core = _compressed_power(A, B, p)

    def objective(x_op: PsdOperator) -> float:
        return _cross_form(A, x_op, B, p, 1.0 - r) - (1.0 - r) * x_op.trace()

    x_hat = matrix_power(core, 1.0 / r)
    opt_value = objective(x_hat)
    gap = abs(opt_value - lhs) / max(1.0, abs(lhs))

    dim = B.shape[1]
    max_violation = 0.0
    for t in range(trials):
        rng = stream(seed, t)
        w = ginibre(rng, dim)
        scale = 10.0 ** rng.uniform(-1.0, 1.0)
        x_op = clamped_psd(scale * (w @ w.conj().T))
        violation = lhs - objective(x_op)
        max_violation = max(max_violation, violation)
    passed = gap <= EQUALITY_RTOL and max_violation <= INEQUALITY_SLACK
    return InfRepReport(
        p=p,
        q=q,
        lhs=lhs,
        optimizer_gap=gap,
        trials=trials,
        max_violation=max_violation,
        passed=passed,
    )


@dataclass(frozen=True)
class YoungReport:
    """Trace Young inequality data for one (X, Y, p) triple."""

    p: float
    conjugate: float
    lhs: float
    rhs: float
    slack: float
    equality_expected: bool
    passed: bool


def young_trace_check(X: PsdOperator, Y: PsdOperator, p: float) -> YoungReport:
    """Check ``tr(X Y) <= tr(X^p)/p + tr(Y^q)/q`` with 1/p + 1/q = 1, p > 1.

    Equality holds exactly when X^p = Y^q; when that is detected the slack
    must vanish within EQUALITY_RTOL of the scale, otherwise the inequality
    only needs to hold up to YOUNG_SLACK.
    """
    p = float(p)
    if not p > 1.0 or math.isinf(p):
        raise ValueError(f"p must be a finite number above 1, got {p}")
    X = as_psd(X)
    Y = as_psd(Y)
    if X.dim != Y.dim:
        raise ValueError(f"dimension mismatch: {X.dim} vs {Y.dim}")
    q = p / (p - 1.0)
    lhs = float(np.trace(X.mat @ Y.mat).real)
    x_pow = matrix_power(X, p)
    y_pow = matrix_power(Y, q)
    rhs = x_pow.trace() / p + y_pow.trace() / q
    slack = rhs - lhs
    scale = max(1.0, abs(rhs))
    equality_expected = bool(
        np.linalg.norm(x_pow.mat - y_pow.mat) <= 1e-8 * max(1.0, np.linalg.norm(x_pow.mat))
    )
    if equality_expected:
        passed = abs(slack) <= EQUALITY_RTOL * scale
    else:
        passed = slack >= -YOUNG_SLACK * scale
    return YoungReport(
        p=p,
        conjugate=q,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        equality_expected=equality_expected,
        passed=passed,
    )


def random_psd_operator(rng: np.random.Generator, dim: int, spread: float = 1.0) -> PsdOperator:
    """Random PSD test operator ``s * W W^dag`` with log-uniform scale s."""
    w = ginibre(rng, dim)
    scale = 10.0 ** rng.uniform(-spread, spread)
    return clamped_psd(scale * (w @ w.conj().T))


def positive_definite(rng: np.random.Generator, dim: int, floor: float = 1e-6) -> PsdOperator:
    """Random strictly positive operator: Wishart plus a relative identity floor.

    The floor keeps condition numbers sane, which matters for the negative
    exponents appearing throughout this module.
    """
    w = ginibre(rng, dim)
    m = w @ w.conj().T
    lam_max = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[-1])
    return clamped_psd(m + floor * max(lam_max, 1.0) * np.eye(dim))
