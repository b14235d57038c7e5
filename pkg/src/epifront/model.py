"""Reaction model: infection response, reproduction number, equilibrium, bounds.

Implements:
  - The saturating infection response G(z) = alpha*z / (1 + z^lam) with
    alpha > 0 and lam in (0, 1]; G(0) = 0, G'(0) = alpha, G increasing and
    G(z)/z strictly decreasing.
  - The full parameter record for the two-species system (diffusion rates,
    decay rates, pathogen multiplication, front response mu, infected-human
    front weight rho, initial half-length, kernels, boundary weight).
  - Reproduction number r0 = e*G'(0)/(a*b) and the positive equilibrium
    (u_star, v_star) solving G(u)/u = a*b/e, v = (a/e)*u when r0 > 1.
  - The closed-form sufficient spreading test r0 >= (1 + d1/a)(1 + d2/b).
  - Sup-norm a-priori bounds (A, B) that no trajectory may exceed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, WeightSpec


@dataclass(frozen=True)
class InfectionFn:
    """Saturating infection response G(z) = alpha*z / (1 + z^lam)."""

    alpha: float
    lam: float = 1.0
    family: str = "saturating"

    def __post_init__(self) -> None:
        if self.family != "saturating":
            raise ValueError(f"unknown infection family {self.family!r}")
        if not self.alpha > 0.0:
            raise ValueError("alpha must be > 0")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lam must lie in (0, 1]")


def infection_value(fn: InfectionFn, z):
    """G(z) for z >= 0. The denominator uses |z|^lam so that stray negative
    round-off from explicit stages stays finite instead of producing NaN."""
    za = np.asarray(z, dtype=float)
    out = fn.alpha * za / (1.0 + np.abs(za) ** fn.lam)
    return float(out) if out.ndim == 0 else out


def infection_slope0(fn: InfectionFn) -> float:
    """G'(0); equals alpha for the saturating family."""
    return fn.alpha


def validate_infection(fn: InfectionFn) -> list:
    """Numeric shape checks on a log-spaced grid: G' > 0 and G(z)/z decreasing."""
    issues = []
    z = np.logspace(-6.0, 6.0, 121)
    lam = fn.lam
    deriv = fn.alpha * (1.0 + (1.0 - lam) * z**lam) / (1.0 + z**lam) ** 2
    if not np.all(deriv > 0.0):
        issues.append("G' must be positive")
    ratio = infection_value(fn, z) / z
    if not np.all(np.diff(ratio) < 0.0):
        issues.append("G(z)/z must be strictly decreasing")
    return issues


@dataclass(frozen=True)
class ModelParams:
    """All constants and function choices the moving-front system needs.

    d1, d2: dispersal rates of pathogen and infected humans (> 0)
    a, b:   decay rates, 1/time (> 0)
    e:      pathogen multiplication coefficient (> 0)
    mu:     front response coefficient (> 0)
    rho:    infected-human front weight (>= 0)
    h0:     initial half-length (> 0)
    """

    d1: float
    d2: float
    a: float
    b: float
    e: float
    mu: float
    rho: float
    h0: float
    kernel1: KernelSpec
    kernel2: KernelSpec
    weight: WeightSpec
    infection: InfectionFn


def validate_params(p: ModelParams) -> list:
    """Collect every constraint violation (empty list means valid)."""
    issues = []
    for name in ("d1", "d2", "a", "b", "e", "mu", "h0"):
        if not getattr(p, name) > 0.0:
            issues.append(f"{name} must be > 0")
    if not p.rho >= 0.0:
        issues.append("rho must be >= 0")
    issues.extend(validate_infection(p.infection))
    # Saturation condition: G(z)/z must fall below a*b/e for large z.
    if p.a > 0 and p.b > 0 and p.e > 0:
        z_large = 1e6
        if not infection_value(p.infection, z_large) / z_large < p.a * p.b / p.e:
            issues.append("G(z)/z must drop below a*b/e for large z")
    return issues


def gprime0(p: ModelParams) -> float:
    return infection_slope0(p.infection)


def r0(p: ModelParams) -> float:
    """Basic reproduction number e*G'(0)/(a*b)."""
    return p.e * gprime0(p) / (p.a * p.b)


@dataclass(frozen=True)
class EquilibriumState:
    u_star: float
    v_star: float


def equilibrium(p: ModelParams) -> EquilibriumState:
    """Spatially homogeneous equilibrium.

    For r0 > 1 the unique positive root of G(u)/u = a*b/e is found by
    bracketed bisection (G(z)/z is strictly decreasing, so the sign change
    is unique); v_star = (a/e)*u_star. For r0 <= 1 the equilibrium is (0, 0).
    """
    if r0(p) <= 1.0:
        return EquilibriumState(0.0, 0.0)
    target = p.a * p.b / p.e

    def excess(u: float) -> float:
        return infection_value(p.infection, u) / u - target

    lo = 1e-12
    if excess(lo) <= 0.0:
        raise ValueError("no positive equilibrium bracket; saturation shape violated")
    hi = 1.0
    for _ in range(200):
        if excess(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise ValueError("no positive equilibrium bracket; saturation shape violated")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    u_star = 0.5 * (lo + hi)
    return EquilibriumState(u_star, p.a / p.e * u_star)


def spreading_sufficient(p: ModelParams) -> bool:
    """True iff r0 >= (1 + d1/a)(1 + d2/b); then spreading always happens."""
    return r0(p) >= (1.0 + p.d1 / p.a) * (1.0 + p.d2 / p.b)


def a_priori_bounds(p: ModelParams, u0_sup: float, v0_sup: float):
    """Sup-norm box (A, B) that the densities never leave.

    A = max(u_star, sup u0, (e/a) sup v0), B = max(sup v0, G(A)/b).
    """
    if u0_sup < 0.0 or v0_sup < 0.0:
        raise ValueError("initial sup norms must be nonnegative")
    eq = equilibrium(p)
    cap_u = max(eq.u_star, u0_sup, p.e / p.a * v0_sup)
    cap_v = max(v0_sup, infection_value(p.infection, cap_u) / p.b)
    return cap_u, cap_v
