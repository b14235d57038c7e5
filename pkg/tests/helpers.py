"""Shared parameter factories for the test suite."""

from __future__ import annotations

import numpy as np

from epifront import InfectionFn, KernelSpec, ModelParams, WeightSpec


def make_kernel(family: str = "uniform", scale: float = 1.0) -> KernelSpec:
    if family == "uniform":
        return KernelSpec.uniform(scale)
    if family == "gaussian":
        return KernelSpec.gaussian(scale)
    if family == "laplace":
        return KernelSpec.laplace(scale)
    return KernelSpec.power_tail(scale)


def make_params(
    alpha: float = 2.0,
    lam: float = 1.0,
    d1: float = 1.0,
    d2: float = 1.0,
    a: float = 1.0,
    b: float = 1.0,
    e: float = 1.0,
    mu: float = 0.5,
    rho: float = 0.5,
    h0: float = 1.0,
    kernel: KernelSpec | None = None,
    kernel2: KernelSpec | None = None,
    weight: WeightSpec | None = None,
) -> ModelParams:
    k1 = kernel if kernel is not None else KernelSpec.uniform(1.0)
    k2 = kernel2 if kernel2 is not None else k1
    w = weight if weight is not None else WeightSpec.kernel_tail_of(k1)
    return ModelParams(
        d1=d1, d2=d2, a=a, b=b, e=e, mu=mu, rho=rho, h0=h0,
        kernel1=k1, kernel2=k2, weight=w,
        infection=InfectionFn(alpha=alpha, lam=lam),
    )


def bump_profile(h0: float, amplitude: float = 1.0):
    return lambda x: amplitude * np.clip(1.0 - (np.asarray(x, float) / h0) ** 2, 0.0, None)


def random_intermediate_params(rng: np.random.Generator) -> ModelParams:
    """Draw parameters inside 1 < r0 < (1 + d1/a)(1 + d2/b)."""
    for _ in range(100):
        a = rng.uniform(0.5, 2.0)
        b = rng.uniform(0.5, 2.0)
        e = rng.uniform(0.5, 2.0)
        r0_target = rng.uniform(1.2, 3.0)
        alpha = r0_target * a * b / e
        d1 = rng.uniform(0.3, 1.5)
        d2 = rng.uniform(0.3, 1.5)
        if r0_target < (1.0 + d1 / a) * (1.0 + d2 / b):
            fam = rng.choice(["uniform", "gaussian", "laplace"])
            scale = rng.uniform(0.5, 1.2)
            return make_params(alpha=alpha, a=a, b=b, e=e, d1=d1, d2=d2,
                               kernel=make_kernel(str(fam), scale))
    raise AssertionError("could not draw intermediate-regime parameters")
