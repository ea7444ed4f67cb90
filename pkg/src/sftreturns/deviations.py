"""Large-deviation rate function and the CLT variance report.

The rate function is the Legendre conjugate I(u) = sup_{alpha < alpha0}
{u alpha - Psi(alpha)}.  Since every return takes at least one step, Psi'
ranges over (c, infinity) where c >= 1 is the minimum mean cycle of
first-return durations; at u = c the supremum is a limit as alpha -> -inf,
and below c it is infinite (the deviation event is impossible at scale n).
The variance sigma^2 = Psi''(0) is cross-computed from the covariance
series of Poincare cycles, and the counting variance follows from
sigma_bar^2 = sigma^2 mu(A)^3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError
from .oracle import cycle_covariance_tail_sum, first_return_law, stationary_cycle_moment
from .return_op import ReturnOperator
from .system import RecodedSystem
from .thermo import gibbs_chain

ROOT_TOL = 1e-12
BISECTION_WIDTH = 1e-8
BOUNDARY_BAND = 1e-9
SIGMA2_FLOOR = 1e-10
TWO_ROUTE_TOL = 1e-6


@dataclass(frozen=True)
class RateFunction:
    """Rate values on a grid of deviation abscissae (time-per-return units)."""

    u_grid: np.ndarray
    rate: np.ndarray
    alpha_star: np.ndarray

    def __post_init__(self) -> None:
        for name in ("u_grid", "rate", "alpha_star"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if (self.rate < -1e-12).any():
            raise NumericError("rate function came out negative")


@dataclass(frozen=True)
class VarianceReport:
    """CLT variance through both routes, plus the counting-variance relation."""

    sigma2: float
    sigma2_bar: float
    mu_target: float
    series_sigma2: float
    covariance_terms: int


def _attainable_range(op: ReturnOperator) -> tuple[float, float]:
    """Open range of Psi': bounded below by the minimum mean return cycle and
    above by the maximum one (infinite when return times are unbounded)."""
    ceiling = float(op.max_cycle_mean) if op.max_cycle_mean is not None else float("inf")
    return float(op.min_cycle_mean), ceiling


def _asymptotic_conjugate(op: ReturnOperator, u: float, direction: float) -> float:
    """Limit of u*alpha - Psi(alpha) as alpha -> direction * inf, at a boundary u."""
    alpha = direction
    prev = None
    while abs(alpha) < 2.0**20:
        try:
            value = u * alpha - op.scgf(alpha)
        except (NumericError, DomainError):
            break
        if not np.isfinite(value):
            break
        if prev is not None and abs(value - prev) < 1e-13:
            return value
        prev = value
        alpha *= 2.0
    if prev is None:
        raise NumericError(f"could not evaluate the conjugate limit at u={u}")
    return prev


def rate_function(op: ReturnOperator, u: float) -> tuple[float, float]:
    """(I(u), alpha_star) by bracketed bisection plus Newton polish.

    ``alpha_star`` solves Psi'(alpha) = u; at the edges of the attainable
    range the supremum is a limit and ``alpha_star`` is -inf or +inf.
    """
    if not u > 0.0:
        raise DomainError(f"deviation abscissa must be positive, got {u}")
    floor, ceiling = _attainable_range(op)
    if u < floor - BOUNDARY_BAND or u > ceiling + BOUNDARY_BAND:
        raise NumericError(
            f"u={u} is outside the attainable range of Psi', which is ({floor}, {ceiling}); "
            "no finite conjugate point exists"
        )
    if u <= floor + BOUNDARY_BAND:
        return _asymptotic_conjugate(op, u, -1.0), float("-inf")
    if u >= ceiling - BOUNDARY_BAND:
        return _asymptotic_conjugate(op, u, 1.0), float("inf")

    lo = -1.0
    if np.isfinite(op.alpha0):
        hi = op.alpha0 - 1e-4
        gap = 1e-4
        while op.scgf_slope(hi) < u:
            gap /= 4.0
            if gap < 2e-8:
                raise NumericError(
                    f"Psi'={u} not bracketed near alpha0; achieved range up to {op.scgf_slope(hi)}"
                )
            hi = op.alpha0 - gap
    else:
        hi = 1.0
        while op.scgf_slope(hi) < u:
            hi *= 2.0
            if hi > 2.0**16:
                raise NumericError(f"Psi'={u} not bracketed; expansion cap reached")
    while op.scgf_slope(lo) > u:
        lo *= 2.0
        if lo < -2.0**20:
            raise NumericError(
                f"Psi'={u} not bracketed; achieved Psi' range is ({floor}, {ceiling}) "
                f"but the expansion cap was reached"
            )
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if op.scgf_slope(mid) < u:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    for _ in range(2):
        try:
            psi1, psi2 = op.scgf_derivatives(alpha)
        except DomainError as exc:
            raise NumericError(
                f"conjugate point for u={u} is too close to alpha0 to polish"
            ) from exc
        step = (psi1 - u) / psi2
        alpha = min(max(alpha - step, lo - BISECTION_WIDTH), hi + BISECTION_WIDTH)
    residual = op.scgf_slope(alpha) - u
    if abs(residual) > ROOT_TOL * max(1.0, abs(u)):
        raise NumericError(f"Newton polish left residual {residual:.3e} at u={u}")
    return u * alpha - op.scgf(alpha), alpha


def rate_curve(op: ReturnOperator, u_grid: np.ndarray) -> RateFunction:
    """Rate function on a grid of abscissae."""
    grid = np.asarray(u_grid, dtype=float)
    values = np.empty_like(grid)
    stars = np.empty_like(grid)
    for i, u in enumerate(grid):
        values[i], stars[i] = rate_function(op, float(u))
    return RateFunction(u_grid=grid, rate=values, alpha_star=stars)


def deviation_limit(op: ReturnOperator, u: float, side: str) -> float:
    """Limit value of the large-deviation theorem at deviation size u.

    ``upper`` is the event {r^n/n >= 1/mu + u} for u > 0; ``lower`` is
    {r^n/n <= 1/mu - u} for 0 < u < 1/mu.  The value is -I(abscissa), equal
    to -inf when the abscissa falls below every attainable return average.
    """
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    if not u > 0.0:
        raise DomainError(f"deviation size must be positive, got {u}")
    mean = 1.0 / op.mu_target
    if side == "lower" and u >= mean:
        raise DomainError(
            f"lower deviation {u} >= 1/mu = {mean}; returns below zero are impossible"
        )
    abscissa = mean + u if side == "upper" else mean - u
    floor, ceiling = _attainable_range(op)
    if abscissa < floor - BOUNDARY_BAND or abscissa > ceiling + BOUNDARY_BAND:
        return float("-inf")
    return -rate_function(op, abscissa)[0]


def variance_report(recoded: RecodedSystem, law_tol: float = 1e-12) -> VarianceReport:
    """sigma^2 = Psi''(0) cross-checked against the cycle-covariance series.

    series route: E[tau^2] - 1/mu^2 + 2 sum_{j>=2} Cov(tau^1, tau^j), with the
    covariance series truncated under a fitted geometric decay bound.  The
    two routes must agree within 1e-6 and the variance must be strictly
    positive.
    """
    op = ReturnOperator(recoded)
    _, sigma2 = op.scgf_derivatives(0.0)
    if not sigma2 > SIGMA2_FLOOR:
        raise NumericError(
            f"predicted variance {sigma2!r} is not strictly positive; "
            "the return times appear deterministic"
        )
    mu = op.mu_target
    chain = gibbs_chain(recoded)
    law = first_return_law(chain, recoded.target_blocks, tol=law_tol)
    second = stationary_cycle_moment(law, 2)
    tail_sum, n_terms = cycle_covariance_tail_sum(law)
    series = second - 1.0 / mu**2 + 2.0 * tail_sum
    if abs(series - sigma2) > TWO_ROUTE_TOL:
        raise NumericError(
            f"variance routes disagree: Psi''(0)={sigma2!r} vs series={series!r}"
        )
    return VarianceReport(
        sigma2=float(sigma2),
        sigma2_bar=float(sigma2 * mu**3),
        mu_target=mu,
        series_sigma2=float(series),
        covariance_terms=n_terms,
    )
