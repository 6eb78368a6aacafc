"""Shared parameter types and series utilities for ring-resonator models.

All quantities are evaluated at a single optical frequency; frequency-domain
delta functions are normalized to 1, so every transfer amplitude and
commutator coefficient in this package is a plain dimensionless complex
number.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass

__all__ = [
    "CouplerParams",
    "RingParams",
    "ResonantDivergenceError",
    "TruncationError",
    "UnitarityError",
    "alpha_from_loss",
    "geometric_sum",
    "geometric_sum_truncated",
    "truncation_order",
]

#: Absolute tolerance for exact analytic identities.
IDENTITY_TOL = 1e-10
#: Absolute tolerance for truncated-series oracles.
SERIES_TOL = 1e-8


class UnitarityError(ValueError):
    """A quantity that must conserve power/probability failed to."""


class ResonantDivergenceError(ZeroDivisionError):
    """A circulation sum was evaluated at its divergent (unit loop gain) point.

    Reachable only for a lossless ring driven exactly on resonance through a
    fully reflective coupler; any finite loss keeps the loop gain inside the
    unit disk.
    """


class TruncationError(RuntimeError):
    """A series truncation order exceeded the hard cap before converging."""


#: Hard cap on automatically chosen truncation orders.
TRUNCATION_CAP = 100_000


def alpha_from_loss(gamma: float, length: float) -> float:
    """Round-trip amplitude survival factor alpha = exp(-Gamma*L/2).

    Parameters
    ----------
    gamma : float
        Distributed power loss rate, 1/m.  Must be >= 0.
    length : float
        Propagation length (one circulation), m.  Must be > 0.
    """
    if gamma < 0:
        raise ValueError(f"loss rate must be >= 0, got {gamma}")
    if length <= 0:
        raise ValueError(f"length must be > 0, got {length}")
    return math.exp(-0.5 * gamma * length)


def geometric_sum(x: complex) -> complex:
    """Closed form of sum_{n>=0} x**n = 1/(1-x) for |x| < 1."""
    if abs(x) >= 1.0:
        raise ResonantDivergenceError(
            f"circulation sum diverges for loop gain |x| >= 1 (|x| = {abs(x)})"
        )
    return 1.0 / (1.0 - x)


def geometric_sum_truncated(x: complex, n_max: int) -> complex:
    """Partial sum sum_{n=0}^{n_max} x**n.

    Uses the closed partial-sum form (1 - x^{n+1})/(1 - x) away from x = 1
    and falls back to direct accumulation when x is too close to 1 for the
    quotient to be accurate.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if abs(1.0 - x) > 1e-6:
        return (1.0 - x ** (n_max + 1)) / (1.0 - x)
    total = 0j
    term = 1.0 + 0j
    for _ in range(n_max + 1):
        total += term
        term *= x
    return total


def truncation_order(x: complex, tol: float = IDENTITY_TOL) -> int:
    """Smallest n with geometric tail bound |x|^{n+1}/(1-|x|) < tol.

    Raises
    ------
    TruncationError
        If more than ``TRUNCATION_CAP`` terms would be needed.
    ResonantDivergenceError
        If |x| >= 1 (no truncation converges).
    """
    mag = abs(x)
    if mag >= 1.0:
        raise ResonantDivergenceError(f"series does not converge for |x| = {mag}")
    if mag == 0.0:
        return 0
    # |x|^(n+1) < tol*(1-|x|)  =>  n > log(tol*(1-|x|))/log|x| - 1
    n = math.ceil(math.log(tol * (1.0 - mag)) / math.log(mag) - 1.0)
    n = max(n, 0)
    if n > TRUNCATION_CAP:
        raise TruncationError(
            f"{n} terms needed for tail bound {tol:g} at |x| = {mag}; "
            f"cap is {TRUNCATION_CAP}"
        )
    return n


@dataclass(frozen=True)
class CouplerParams:
    """One bus-ring junction: through amplitude tau, cross amplitude kappa.

    Power conservation |tau|^2 + |kappa|^2 = 1 is enforced at construction.
    Both amplitudes may be complex; figure-style parameters use real
    tau in [0, 1] with kappa = sqrt(1 - tau^2).
    """

    tau: complex
    kappa: complex

    def __post_init__(self) -> None:
        defect = abs(abs(self.tau) ** 2 + abs(self.kappa) ** 2 - 1.0)
        if not defect < 1e-12:
            raise UnitarityError(
                f"|tau|^2 + |kappa|^2 must equal 1 (defect {defect:.3e})"
            )

    @classmethod
    def from_through(cls, tau: complex) -> "CouplerParams":
        """Build from the through amplitude alone; kappa real >= 0."""
        mag2 = abs(tau) ** 2
        if mag2 > 1.0 + 1e-15:
            raise UnitarityError(f"|tau| must be <= 1, got {abs(tau)}")
        return cls(tau=complex(tau), kappa=math.sqrt(max(1.0 - mag2, 0.0)))

    @classmethod
    def from_magnitude(
        cls, magnitude: float, tau_phase: float = 0.0, kappa_phase: float = 0.0
    ) -> "CouplerParams":
        """Build from real through magnitude in [0, 1] plus optional phases."""
        if not 0.0 <= magnitude <= 1.0:
            raise UnitarityError(f"through magnitude must be in [0, 1], got {magnitude}")
        cross = math.sqrt(1.0 - magnitude * magnitude)
        return cls(
            tau=magnitude * cmath.exp(1j * tau_phase),
            kappa=cross * cmath.exp(1j * kappa_phase),
        )


@dataclass(frozen=True)
class RingParams:
    """Ring geometry and propagation: circumference, loss rate, phase.

    Exactly one of ``theta`` (total round-trip phase, rad) or ``beta``
    (propagation constant, rad/m, giving theta = beta*L) must be provided.

    Attributes
    ----------
    circumference : float
        Ring circumference L, m.
    loss_rate : float
        Distributed power loss Gamma, 1/m; alpha = exp(-Gamma*L/2).
    theta, beta : float or None
        Round-trip phase, directly or via the propagation constant.
    """

    circumference: float
    loss_rate: float
    theta: float | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        if self.circumference <= 0:
            raise ValueError(f"circumference must be > 0, got {self.circumference}")
        if self.loss_rate < 0:
            raise ValueError(f"loss rate must be >= 0, got {self.loss_rate}")
        if (self.theta is None) == (self.beta is None):
            raise ValueError("provide exactly one of theta or beta")
        if not math.isfinite(self.round_trip_phase):
            raise ValueError("round-trip phase must be finite")

    @classmethod
    def from_alpha(
        cls, alpha: float, theta: float, circumference: float = 1.0
    ) -> "RingParams":
        """Build from the survival factor alpha in (0, 1] directly."""
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        gamma = -2.0 * math.log(alpha) / circumference
        return cls(circumference=circumference, loss_rate=gamma, theta=theta)

    @property
    def alpha(self) -> float:
        """Round-trip amplitude survival factor in (0, 1]."""
        return alpha_from_loss(self.loss_rate, self.circumference) if self.loss_rate else 1.0

    @property
    def round_trip_phase(self) -> float:
        return self.theta if self.theta is not None else self.beta * self.circumference

    @property
    def loop_factor(self) -> complex:
        """One full circulation: alpha * exp(i*theta)."""
        return self.alpha * cmath.exp(1j * self.round_trip_phase)
