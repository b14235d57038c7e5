"""Strict run-configuration parsing (JSON) and initial-profile builders.

A configuration file has blocks
    model     constants d1, d2, a, b, e, mu, rho, h0 plus nested kernel1,
              kernel2, weight, infection blocks
    numerics  dx, dt, t_end, domain_cap, record_every, tol_vanish,
              tol_spread (all optional, documented defaults)
    initial   u0 and v0 profile blocks
    output    directory, snapshots toggle
    eigen     optional: L1, L2, n for the eigenvalue subcommand
    ode       optional: u0, v0, t_end, dt for the homogeneous subcommand
    thresholds optional: n, tol, rel_tol, bracket for threshold searches

Parsing is strict: unknown keys anywhere are violations, and every violation
in the file is reported in one pass rather than failing on the first.

Numerics defaults: dx = h0/20, dt = the explicit stability limit
0.9/(d1+d2+a+b+e+G'(0)), t_end = 100, domain_cap = 8*h0, record_every = 10,
tol_vanish = 1e-3, tol_spread = 0.5.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, WeightSpec
from .model import InfectionFn, ModelParams, validate_params
from .simulator import SimConfig, stability_limit, validate_sim_config


@dataclass(frozen=True)
class ProfileSpec:
    family: str  # "bump" | "cosine" | "scaled"
    amplitude: float = 1.0
    sigma: float = 1.0
    base: "ProfileSpec | None" = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "."
    snapshots: bool = False


@dataclass(frozen=True)
class EigenConfig:
    L1: float
    L2: float
    n: int = 400


@dataclass(frozen=True)
class OdeConfig:
    u0: float = 1.0
    v0: float = 1.0
    t_end: float = 100.0
    dt: float = 0.01


@dataclass(frozen=True)
class ThresholdConfig:
    n: int = 241
    tol: float = 1e-6
    rel_tol: float = 1e-2
    bracket_lo: float | None = None
    bracket_hi: float | None = None


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    numerics: SimConfig
    u0: ProfileSpec
    v0: ProfileSpec
    output: OutputConfig
    eigen: EigenConfig | None
    ode: OdeConfig | None
    thresholds: ThresholdConfig
    raw: dict


def build_profile(spec: ProfileSpec, h0: float):
    """Density profile callable vanishing at +-h0 and positive inside."""
    if spec.family == "bump":
        amp = spec.amplitude
        return lambda x: amp * np.clip(1.0 - (np.asarray(x, float) / h0) ** 2, 0.0, None)
    if spec.family == "cosine":
        amp = spec.amplitude
        return lambda x: amp * np.clip(np.cos(np.pi * np.asarray(x, float) / (2.0 * h0)), 0.0, None)
    base = build_profile(spec.base, h0)
    sig = spec.sigma
    return lambda x: sig * base(x)


class _Section:
    """One config block with strict key accounting."""

    def __init__(self, data: dict, path: str, issues: list):
        self.data = data
        self.path = path
        self.issues = issues
        self.seen = set()

    def flag_unknown(self) -> None:
        for key in self.data:
            if key not in self.seen:
                self.issues.append(f"{self.path}: unknown key {key!r}")

    def get(self, key: str, default=None, required: bool = False):
        self.seen.add(key)
        if key not in self.data:
            if required:
                self.issues.append(f"{self.path}.{key}: missing")
            return default
        return self.data[key]

    def number(self, key: str, default=None, required: bool = False):
        val = self.get(key, default, required)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.issues.append(f"{self.path}.{key}: must be a number")
            return None
        return float(val)

    def integer(self, key: str, default=None, required: bool = False):
        val = self.get(key, default, required)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, int):
            self.issues.append(f"{self.path}.{key}: must be an integer")
            return None
        return val

    def subsection(self, key: str, required: bool = False) -> "_Section | None":
        val = self.get(key, required=required)
        if val is None:
            return None
        if not isinstance(val, dict):
            self.issues.append(f"{self.path}.{key}: must be a block")
            return None
        return _Section(val, f"{self.path}.{key}", self.issues)


def _nan_if_missing(value):
    return math.nan if value is None else value


def _parse_kernel(sec: _Section | None, issues: list):
    if sec is None:
        return None
    family = sec.get("family", required=True)
    spec = None
    try:
        if family == "uniform":
            spec = KernelSpec.uniform(_nan_if_missing(sec.number("radius", required=True)))
        elif family == "gaussian":
            spec = KernelSpec.gaussian(_nan_if_missing(sec.number("std", required=True)))
        elif family == "laplace":
            spec = KernelSpec.laplace(_nan_if_missing(sec.number("scale", required=True)))
        elif family == "power_tail":
            spec = KernelSpec.power_tail(
                _nan_if_missing(sec.number("exponent", required=True)),
                sec.number("cutoff", 1.0),
            )
        elif family is not None:
            issues.append(f"{sec.path}.family: unknown kernel family {family!r}")
    except ValueError as err:
        issues.append(f"{sec.path}: {err}")
    sec.flag_unknown()
    return spec


def _parse_weight(sec: _Section | None, issues: list):
    if sec is None:
        return None
    family = sec.get("family", required=True)
    spec = None
    try:
        if family == "kernel_tail":
            kernel = _parse_kernel(sec.subsection("kernel", required=True), issues)
            if kernel is not None:
                spec = WeightSpec.kernel_tail_of(kernel)
        elif family == "constant_on":
            spec = WeightSpec.constant_on(
                _nan_if_missing(sec.number("radius", required=True)),
                _nan_if_missing(sec.number("height", required=True)),
            )
        elif family == "table":
            points = sec.get("points", required=True)
            if points is not None:
                spec = WeightSpec.table(points)
        elif family is not None:
            issues.append(f"{sec.path}.family: unknown weight family {family!r}")
    except (ValueError, TypeError) as err:
        issues.append(f"{sec.path}: {err}")
    sec.flag_unknown()
    return spec


def _parse_infection(sec: _Section | None, issues: list):
    if sec is None:
        return None
    family = sec.get("family", "saturating")
    if family != "saturating":
        issues.append(f"{sec.path}.family: unknown infection family {family!r}")
        sec.flag_unknown()
        return None
    alpha = sec.number("alpha", required=True)
    lam = sec.number("lambda", 1.0)
    sec.flag_unknown()
    if alpha is None or lam is None:
        return None
    if not alpha > 0.0:
        issues.append(f"{sec.path}.alpha: must be > 0")
        return None
    if not 0.0 < lam <= 1.0:
        issues.append(f"{sec.path}.lambda: must lie in (0, 1]")
        return None
    return InfectionFn(alpha=alpha, lam=lam)


def _parse_profile(sec: _Section | None, issues: list, depth: int = 0):
    if sec is None:
        return None
    family = sec.get("family", required=True)
    spec = None
    if family in ("bump", "cosine"):
        amp = sec.number("amplitude", 1.0)
        if amp is not None and amp > 0.0:
            spec = ProfileSpec(family, amplitude=amp)
        elif amp is not None:
            issues.append(f"{sec.path}.amplitude: must be > 0")
    elif family == "scaled":
        if depth >= 4:
            issues.append(f"{sec.path}: scaled profiles nested too deep")
        else:
            sig = sec.number("sigma", required=True)
            base = _parse_profile(sec.subsection("base", required=True), issues, depth + 1)
            if sig is not None and base is not None:
                if sig > 0.0:
                    spec = ProfileSpec("scaled", sigma=sig, base=base)
                else:
                    issues.append(f"{sec.path}.sigma: must be > 0")
    elif family is not None:
        issues.append(f"{sec.path}.family: unknown profile family {family!r}")
    sec.flag_unknown()
    return spec


def parse_config_dict(data: dict):
    """Validate a parsed JSON document; returns (RunConfig | None, violations)."""
    issues: list = []
    if not isinstance(data, dict):
        return None, ["top level: must be an object"]
    root = _Section(data, "config", issues)

    model_sec = root.subsection("model", required=True)
    params = None
    if model_sec is not None:
        fields = {}
        for name in ("d1", "d2", "a", "b", "e", "mu", "h0"):
            fields[name] = model_sec.number(name, required=True)
        fields["rho"] = model_sec.number("rho", 0.0)
        kernel1 = _parse_kernel(model_sec.subsection("kernel1", required=True), issues)
        kernel2 = _parse_kernel(model_sec.subsection("kernel2", required=True), issues)
        weight = _parse_weight(model_sec.subsection("weight", required=True), issues)
        infection = _parse_infection(model_sec.subsection("infection", required=True), issues)
        model_sec.flag_unknown()
        pieces = list(fields.values()) + [kernel1, kernel2, weight, infection]
        if all(piece is not None for piece in pieces):
            params = ModelParams(
                kernel1=kernel1, kernel2=kernel2, weight=weight, infection=infection, **fields
            )
            for msg in validate_params(params):
                issues.append(f"config.model: {msg}")

    numerics = None
    num_sec = root.subsection("numerics")
    if params is not None:
        h0 = params.h0
        if num_sec is not None:
            numerics = SimConfig(
                dx=num_sec.number("dx", h0 / 20.0),
                dt=num_sec.number("dt", stability_limit(params)),
                t_end=num_sec.number("t_end", 100.0),
                domain_cap=num_sec.number("domain_cap", 8.0 * h0),
                record_every=num_sec.integer("record_every", 10),
                tol_vanish=num_sec.number("tol_vanish", 1e-3),
                tol_spread=num_sec.number("tol_spread", 0.5),
            )
            num_sec.flag_unknown()
        else:
            numerics = SimConfig(
                dx=h0 / 20.0,
                dt=stability_limit(params),
                t_end=100.0,
                domain_cap=8.0 * h0,
            )
        for msg in validate_sim_config(params, numerics):
            issues.append(f"config.numerics: {msg}")
    elif num_sec is not None:
        num_sec.flag_unknown()

    u0 = v0 = None
    init_sec = root.subsection("initial")
    if init_sec is not None:
        u0 = _parse_profile(init_sec.subsection("u0", required=True), issues)
        v0 = _parse_profile(init_sec.subsection("v0", required=True), issues)
        init_sec.flag_unknown()
    else:
        u0 = ProfileSpec("bump", amplitude=1.0)
        v0 = ProfileSpec("bump", amplitude=1.0)

    output = OutputConfig()
    out_sec = root.subsection("output")
    if out_sec is not None:
        directory = out_sec.get("directory", ".")
        snapshots = out_sec.get("snapshots", False)
        if not isinstance(directory, str):
            issues.append("config.output.directory: must be a string")
            directory = "."
        if not isinstance(snapshots, bool):
            issues.append("config.output.snapshots: must be a boolean")
            snapshots = False
        output = OutputConfig(directory=directory, snapshots=snapshots)
        out_sec.flag_unknown()

    eigen = None
    eig_sec = root.subsection("eigen")
    if eig_sec is not None:
        L1 = eig_sec.number("L1", required=True)
        L2 = eig_sec.number("L2", required=True)
        n = eig_sec.integer("n", 400)
        eig_sec.flag_unknown()
        if L1 is not None and L2 is not None and n is not None:
            if L2 > L1 and n >= 16:
                eigen = EigenConfig(L1=L1, L2=L2, n=n)
            else:
                issues.append("config.eigen: needs L1 < L2 and n >= 16")

    ode_cfg = None
    ode_sec = root.subsection("ode")
    if ode_sec is not None:
        ode_cfg = OdeConfig(
            u0=ode_sec.number("u0", 1.0),
            v0=ode_sec.number("v0", 1.0),
            t_end=ode_sec.number("t_end", 100.0),
            dt=ode_sec.number("dt", 0.01),
        )
        ode_sec.flag_unknown()
        if ode_cfg.u0 < 0.0 or ode_cfg.v0 < 0.0 or ode_cfg.dt <= 0.0 or ode_cfg.t_end <= 0.0:
            issues.append("config.ode: needs u0, v0 >= 0 and dt, t_end > 0")

    thresholds = ThresholdConfig()
    thr_sec = root.subsection("thresholds")
    if thr_sec is not None:
        thresholds = ThresholdConfig(
            n=thr_sec.integer("n", 241),
            tol=thr_sec.number("tol", 1e-6),
            rel_tol=thr_sec.number("rel_tol", 1e-2),
            bracket_lo=thr_sec.number("bracket_lo"),
            bracket_hi=thr_sec.number("bracket_hi"),
        )
        thr_sec.flag_unknown()

    root.flag_unknown()
    if issues or params is None or numerics is None or u0 is None or v0 is None:
        return None, issues
    return (
        RunConfig(
            params=params,
            numerics=numerics,
            u0=u0,
            v0=v0,
            output=output,
            eigen=eigen,
            ode=ode_cfg,
            thresholds=thresholds,
            raw=data,
        ),
        [],
    )


def parse_config(path: str):
    """Load and validate a JSON run configuration from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            return None, [f"invalid JSON: {err}"]
    return parse_config_dict(data)
