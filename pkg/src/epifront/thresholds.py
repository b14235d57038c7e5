"""Sharp constants of the spreading-vanishing dichotomy by monotone bisection.

Implements:
  - L_star: the half-length at which the interval eigenvalue crosses zero
    (eigenvalue strictly decreasing in the length), defined only in the
    intermediate regime 1 < r0 < (1 + d1/a)(1 + d2/b).
  - d_star: the diffusion scale s at which the eigenvalue of the problem
    with (d1, d2) = s*(d1_0, d2_0) on [-h0, h0] crosses zero (eigenvalue
    strictly increasing in s), defined for r0 > 1, together with its
    closed-form lower bound (sqrt((a-b)^2 + 4 e G'(0)) - (a+b)) / 2.
  - mu_star and sigma_star: simulation-backed bisections on the front
    response mu and on the initial-data scale sigma. Monotonicity of the
    dichotomy in both parameters makes plain bisection valid; probes that
    come back undecided trigger horizon doubling up to a cap, and brackets
    whose ends agree are expanded up to a cap.
  - The explicit sufficient vanishing level for mu built from the eigenpair
    of a slightly enlarged interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .kernels import kernel_positive_everywhere, weight_positive_on, weight_sup
from .model import ModelParams, gprime0, r0, spreading_sufficient
from .simulator import SimConfig, classify, run
from .spectral import EigenProblem, principal_eigenvalue


class ThresholdRegimeError(ValueError):
    """The requested constant does not exist in this parameter regime."""


class ThresholdSearchError(RuntimeError):
    """Bracketing or classification failed within the configured caps."""


@dataclass(frozen=True)
class BisectionResult:
    value: float
    lo: float
    hi: float
    iterations: int
    lo_outcome: str
    hi_outcome: str
    probes: tuple


def _lambda_on_interval(p: ModelParams, half_length: float, n: int, d1=None, d2=None) -> float:
    prob = EigenProblem.from_params(p, -half_length, half_length, n=n, d1=d1, d2=d2)
    return principal_eigenvalue(prob).lambda_p


def find_L_star(p: ModelParams, n: int = 241, tol: float = 1e-6, trace: list | None = None) -> float:
    """Half-length where the interval eigenvalue vanishes, by bisection.

    Only defined in the intermediate regime; outside it the eigenvalue has
    one sign for every length and the applicable regime is reported instead.
    """
    reproduction = r0(p)
    if reproduction <= 1.0:
        raise ThresholdRegimeError(
            "r0 <= 1: the interval eigenvalue is positive for every length, no zero crossing"
        )
    if spreading_sufficient(p):
        raise ThresholdRegimeError(
            "spreading-sufficient regime (r0 >= (1 + d1/a)(1 + d2/b)): eigenvalue negative for every length"
        )

    def lam(half: float) -> float:
        val = _lambda_on_interval(p, half, n)
        if trace is not None:
            trace.append((half, val))
        return val

    lo = p.h0 / 10.0
    for _ in range(40):
        if lam(lo) > 0.0:
            break
        lo /= 2.0
    else:
        raise ThresholdSearchError("could not find a positive-eigenvalue length")
    hi = max(2.0 * p.h0, 2.0 * lo)
    for _ in range(40):
        if lam(hi) < 0.0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise ThresholdSearchError("could not find a negative-eigenvalue length")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = lam(mid)
        if abs(val) < tol:
            return mid
        if val > 0.0:
            lo = mid
        else:
            hi = mid
    raise ThresholdSearchError("length bisection did not reach the eigenvalue tolerance")


def find_d_star(
    p: ModelParams,
    d1_0: float | None = None,
    d2_0: float | None = None,
    h0: float | None = None,
    n: int = 241,
    tol: float = 1e-6,
    trace: list | None = None,
) -> float:
    """Diffusion scale where the eigenvalue on [-h0, h0] crosses zero.

    The eigenvalue is strictly increasing in the scale, negative in the
    zero-diffusion limit whenever r0 > 1, and grows without bound.
    """
    if r0(p) <= 1.0:
        raise ThresholdRegimeError("r0 must exceed 1 for a diffusion threshold")
    d1_0 = p.d1 if d1_0 is None else d1_0
    d2_0 = p.d2 if d2_0 is None else d2_0
    if not (d1_0 > 0.0 and d2_0 > 0.0):
        raise ValueError("reference diffusion rates must be positive")
    half = p.h0 if h0 is None else h0

    def lam(s: float) -> float:
        val = _lambda_on_interval(p, half, n, d1=s * d1_0, d2=s * d2_0)
        if trace is not None:
            trace.append((s, val))
        return val

    lo = 1e-8
    for _ in range(40):
        if lam(lo) < 0.0:
            break
        lo /= 4.0
    else:
        raise ThresholdSearchError("no negative-eigenvalue diffusion scale found")
    hi = 1.0
    for _ in range(60):
        if lam(hi) > 0.0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise ThresholdSearchError("no positive-eigenvalue diffusion scale found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = lam(mid)
        if abs(val) < tol:
            return mid
        if val < 0.0:
            lo = mid
        else:
            hi = mid
    raise ThresholdSearchError("diffusion bisection did not reach the eigenvalue tolerance")


def effective_L_star(p: ModelParams, n: int = 241) -> float:
    """Critical half-length extended to every regime.

    inf when r0 <= 1 (no width ever flips the eigenvalue negative), 0 in the
    spreading-sufficient regime (every width already has it negative), and
    the bisected zero crossing in between. This is what finite-horizon
    classification should compare widths against.
    """
    if r0(p) <= 1.0:
        return math.inf
    if spreading_sufficient(p):
        return 0.0
    return find_L_star(p, n=n)


def d_star_lower_bound(p: ModelParams) -> float:
    """Closed-form floor for the diffusion threshold; 0 exactly at r0 = 1."""
    if r0(p) < 1.0:
        raise ThresholdRegimeError("the diffusion threshold needs r0 >= 1")
    g0 = gprime0(p)
    return 0.5 * (math.sqrt((p.a - p.b) ** 2 + 4.0 * p.e * g0) - (p.a + p.b))


def _profile_sup(profile, h0: float, samples: int = 1025) -> float:
    xs = np.linspace(-h0, h0, samples)
    return float(np.max(np.abs(np.asarray(profile(xs), dtype=float))))


def vanishing_mu_bound(
    p: ModelParams,
    u0_profile,
    v0_profile,
    n: int = 241,
    L_star: float | None = None,
) -> float:
    """Explicit mu level below which the fronts provably stall.

    Built from the eigenpair on [-h1, h1] with h1 slightly above h0 (placed
    at 10% of the gap to L_star, halved up to 8 times until the eigenvalue
    there is still positive). Scale-invariant in the eigenfunction
    normalization and inverse-linear in the initial sup norms.
    """
    Ls = find_L_star(p, n=n) if L_star is None else L_star
    if not p.h0 < Ls:
        raise ThresholdRegimeError("the vanishing bound needs h0 < L_star")
    frac = 0.1
    res = None
    h1 = p.h0
    for _ in range(8):
        h1 = p.h0 + frac * (Ls - p.h0)
        res = principal_eigenvalue(EigenProblem.from_params(p, -h1, h1, n=n))
        if res.lambda_p > 0.0:
            break
        frac /= 2.0
    else:
        raise ThresholdSearchError("no enlarged interval with positive eigenvalue found")
    decay = 0.5 * res.lambda_p * min(p.e, gprime0(p))
    margin = h1 - p.h0
    dx = res.x[1] - res.x[0]
    w = np.full(res.x.size, dx)
    w[0] = w[-1] = 0.5 * dx
    mass1 = float(np.sum(w * res.phi1))
    mass2 = float(np.sum(w * res.phi2))
    level = margin * decay / (mass1 + p.rho * weight_sup(p.weight, 2.0 * h1) * mass2)
    core = np.abs(res.x) <= p.h0
    phi_floor = min(float(res.phi1[core].min()), float(res.phi2[core].min()))
    data_norm = _profile_sup(u0_profile, p.h0) + _profile_sup(v0_profile, p.h0)
    return level * phi_floor / data_norm


def _classify_with_horizon(
    p: ModelParams,
    cfg: SimConfig,
    u0_profile,
    v0_profile,
    L_star: float,
    max_doublings: int = 3,
) -> str:
    stop = 2.0 * L_star + 2.0 * cfg.tol_spread
    horizon = cfg.t_end
    for _ in range(max_doublings + 1):
        local = replace(cfg, t_end=horizon)
        traj = run(p, local, u0_profile, v0_profile, stop_width=stop)
        outcome = classify(traj, L_star, local)
        if outcome != "undecided":
            return outcome
        horizon *= 2.0
    return "undecided"


def _dichotomy_bisect(
    classify_at,
    lo: float,
    hi: float,
    rel_tol: float,
    expansions: int = 5,
) -> BisectionResult:
    """Bisection on a monotone vanishing->spreading dichotomy.

    The low end must classify vanishing and the high end spreading; ends
    with the wrong label are pushed outward up to `expansions` times.
    """
    probes = []

    def probe(x: float) -> str:
        outcome = classify_at(x)
        probes.append((x, outcome))
        return outcome

    lo_out = probe(lo)
    for _ in range(expansions):
        if lo_out != "spreading":
            break
        lo /= 4.0
        lo_out = probe(lo)
    if lo_out != "vanishing":
        raise ThresholdSearchError(f"low bracket end classifies as {lo_out}, not vanishing")
    hi_out = probe(hi)
    for _ in range(expansions):
        if hi_out != "vanishing":
            break
        hi *= 4.0
        hi_out = probe(hi)
    if hi_out != "spreading":
        raise ThresholdSearchError(f"high bracket end classifies as {hi_out}, not spreading")
    iterations = 0
    while hi - lo > rel_tol * hi:
        mid = math.sqrt(lo * hi)  # geometric midpoint: brackets span decades
        out = probe(mid)
        if out == "vanishing":
            lo = mid
        elif out == "spreading":
            hi = mid
        else:
            raise ThresholdSearchError("probe stayed undecided after horizon doubling")
        iterations += 1
        if iterations > 200:
            raise ThresholdSearchError("bisection failed to close the bracket")
    return BisectionResult(
        value=0.5 * (lo + hi),
        lo=lo,
        hi=hi,
        iterations=iterations,
        lo_outcome="vanishing",
        hi_outcome="spreading",
        probes=tuple(probes),
    )


def find_mu_star(
    p: ModelParams,
    cfg: SimConfig,
    u0_profile,
    v0_profile,
    bracket: tuple | None = None,
    rel_tol: float = 1e-2,
    n: int = 241,
) -> BisectionResult:
    """Front-response threshold separating vanishing from spreading.

    Requires the intermediate regime and h0 < L_star; the run dichotomy is
    monotone in mu, so bisection applies. The default bracket starts at the
    explicit vanishing bound and one thousand times it.
    """
    Ls = find_L_star(p, n=n)
    if not p.h0 < Ls:
        raise ThresholdRegimeError("mu threshold search needs h0 < L_star")
    if bracket is None:
        base = vanishing_mu_bound(p, u0_profile, v0_profile, n=n, L_star=Ls)
        bracket = (base, 1e3 * base)

    def classify_at(mu: float) -> str:
        return _classify_with_horizon(replace(p, mu=mu), cfg, u0_profile, v0_profile, Ls)

    return _dichotomy_bisect(classify_at, bracket[0], bracket[1], rel_tol)


def find_sigma_star(
    p: ModelParams,
    cfg: SimConfig,
    psi1,
    psi2,
    bracket: tuple = (1e-3, 1e3),
    rel_tol: float = 1e-2,
    n: int = 241,
) -> BisectionResult:
    """Initial-data scale threshold for (u0, v0) = sigma * (psi1, psi2).

    Beyond the intermediate-regime requirements this needs either a pathogen
    kernel positive on the whole line or a front weight positive on
    [0, 2*L_star]; otherwise arbitrarily large data may still fail to push
    the fronts and no sharp scale exists.
    """
    Ls = find_L_star(p, n=n)
    if not p.h0 < Ls:
        raise ThresholdRegimeError("sigma threshold search needs h0 < L_star")
    if not (kernel_positive_everywhere(p.kernel1) or weight_positive_on(p.weight, 2.0 * Ls)):
        raise ThresholdRegimeError(
            "sigma threshold needs a strictly positive pathogen kernel or a front "
            "weight positive on [0, 2*L_star]"
        )

    def classify_at(sigma: float) -> str:
        u0 = lambda x: sigma * psi1(x)
        v0 = lambda x: sigma * psi2(x)
        return _classify_with_horizon(p, cfg, u0, v0, Ls)

    return _dichotomy_bisect(classify_at, bracket[0], bracket[1], rel_tol)
