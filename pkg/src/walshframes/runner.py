"""Config-driven verification suites and deterministic JSON reports.

A run configuration is an INI file. The [masks] section names the mask
file that fully determines the system; optional [field] and [system]
sections are cross-checked against it and rejected on disagreement, so a
config can never silently reinterpret a mask file. [scales] bounds the
scale ranges, [suite] fixes the random test family (PCG64 with a recorded
64-bit seed), and [tolerances] may override verdict thresholds.

Reports are plain dicts; render_report renders them with sorted keys and
fixed indentation so identical runs produce identical bytes.
"""

from __future__ import annotations

import configparser
import json
import os

import numpy as np

from . import __version__
from .algebra import NORMALIZATIONS, FieldConfig, SystemConfig, uindex
from .errors import ConfigError, WalshFramesError
from .framekit import (
    GRAM_TOL,
    FrameAnalyzer,
    Mask,
    bessel_mask_check,
    check_partition,
    derive_generators,
    iterate_refinement,
    load_masks,
    sigma_v0,
    uep_gram,
)
from .periodic import (
    PeriodicSystemSpec,
    periodic_tightness_check,
    periodic_two_scale_check,
    projection_energy_scan,
)
from .stepfn import PeriodicStepFunction, dump_csv

__all__ = [
    "RESIDUAL_TOL",
    "TAIL_TOL",
    "RunConfig",
    "dump_wavelets_report",
    "field_info_report",
    "render_report",
    "suite_functions",
    "uindex_report",
    "verify_report",
    "periodic_report",
]

RESIDUAL_TOL = 1e-9
TAIL_TOL = 1e-12
MAX_SEED = 2 ** 64


def _parse_modulus(token: str) -> tuple[int, ...]:
    try:
        return tuple(int(d) for d in token.split("."))
    except ValueError as exc:
        raise ConfigError(f"malformed modulus {token!r}") from exc


class RunConfig:
    """Parsed run configuration: system, scale ranges, suite, tolerances."""

    __slots__ = ("cfg", "sys", "j0", "j1", "j_max", "epsilon",
                 "cascade_iterations", "seed", "count", "resolution",
                 "gram_tol", "residual_tol", "tail_tol")

    def __init__(self, cfg, sys, j0, j1, j_max, epsilon, cascade_iterations,
                 seed, count, resolution, gram_tol, residual_tol, tail_tol):
        self.cfg = cfg
        self.sys = sys
        self.j0 = j0
        self.j1 = j1
        self.j_max = j_max
        self.epsilon = epsilon
        self.cascade_iterations = cascade_iterations
        self.seed = seed
        self.count = count
        self.resolution = resolution
        self.gram_tol = gram_tol
        self.residual_tol = residual_tol
        self.tail_tol = tail_tol

    @classmethod
    def load(cls, path: str, seed: int | None = None, mode: str | None = None,
             need_masks: bool = True) -> "RunConfig":
        parser = configparser.ConfigParser()
        try:
            found = parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config file: {exc}") from exc
        if not found:
            raise ConfigError(f"cannot read config file {path!r}")
        try:
            return cls._build(parser, path, seed, mode, need_masks)
        except ValueError as exc:
            if isinstance(exc, WalshFramesError):
                raise
            raise ConfigError(f"malformed config value ({exc})") from exc

    @classmethod
    def _build(cls, parser, path, seed, mode, need_masks):
        sys_cfg = None
        cfg = None
        mask_file = parser.get("masks", "file", fallback=None)
        if mask_file is not None:
            if not os.path.isabs(mask_file):
                mask_file = os.path.join(
                    os.path.dirname(os.path.abspath(path)), mask_file)
            if not os.path.exists(mask_file):
                raise ConfigError(f"masks file {mask_file!r} does not exist")
            sys_cfg = load_masks(mask_file)
            cfg = sys_cfg.field

        if parser.has_section("field"):
            p = parser.getint("field", "p")
            c = parser.getint("field", "c", fallback=1)
            token = parser.get("field", "modulus", fallback=None)
            if c > 1 and token is None:
                raise ConfigError("field with c > 1 must state the modulus")
            want = FieldConfig(p, c, _parse_modulus(token) if token else None)
            if cfg is not None and (want.p, want.c, want.modulus) != \
                    (cfg.p, cfg.c, cfg.modulus):
                raise ConfigError("field section disagrees with the masks file")
            if cfg is None:
                cfg = want
        if cfg is None:
            raise ConfigError("config needs a [field] section or a [masks] file")
        if need_masks and sys_cfg is None:
            raise ConfigError("this command needs a [masks] file entry")

        if sys_cfg is not None and parser.has_section("system"):
            for key, actual in (("n", sys_cfg.N), ("r", sys_cfg.r),
                                ("dilation_unit", sys_cfg.nu)):
                if parser.has_option("system", key) and \
                        parser.getint("system", key) != actual:
                    raise ConfigError(
                        f"system option {key} disagrees with the masks file")
            stated = parser.get("system", "normalization", fallback=None)
            if stated is not None and stated != sys_cfg.normalization:
                raise ConfigError(
                    "system normalization disagrees with the masks file")

        if mode is not None and sys_cfg is not None:
            if mode not in NORMALIZATIONS:
                raise ConfigError(
                    f"mode must be one of {NORMALIZATIONS}, got {mode!r}")
            if mode != sys_cfg.normalization:
                base = SystemConfig(cfg, sys_cfg.N, sys_cfg.r, sys_cfg.nu, mode)
                sys_cfg = base.with_masks(
                    tuple(Mask(base, m.coeffs) for m in sys_cfg.masks))

        resolution = parser.getint("suite", "resolution", fallback=4)
        count = parser.getint("suite", "count", fallback=100)
        cfg_seed = parser.getint("suite", "seed", fallback=0)
        seed = cfg_seed if seed is None else seed
        if not 0 <= seed < MAX_SEED:
            raise ConfigError(f"seed must fit in 64 bits, got {seed}")
        if count < 1:
            raise ConfigError(f"suite count must be positive, got {count}")
        if resolution < 0:
            raise ConfigError(f"suite resolution must be >= 0, got {resolution}")

        j0 = parser.getint("scales", "j0", fallback=0)
        j1 = parser.getint("scales", "j1", fallback=resolution)
        j_max = parser.getint("scales", "j_max", fallback=resolution)
        epsilon = parser.getfloat("scales", "epsilon", fallback=0.01)
        iterations = parser.getint("scales", "cascade_iterations", fallback=4)
        if j1 < j0:
            raise ConfigError(f"need j0 <= j1, got [{j0}, {j1}]")
        if j_max < 0 or iterations < 0:
            raise ConfigError("j_max and cascade_iterations must be >= 0")
        if epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {epsilon}")

        gram_tol = parser.getfloat("tolerances", "gram", fallback=GRAM_TOL)
        residual_tol = parser.getfloat(
            "tolerances", "residual", fallback=RESIDUAL_TOL)
        tail_tol = parser.getfloat("tolerances", "tail", fallback=TAIL_TOL)
        return cls(cfg, sys_cfg, j0, j1, j_max, epsilon, iterations,
                   seed, count, resolution, gram_tol, residual_tol, tail_tol)

    def config_block(self) -> dict:
        cfg = self.cfg
        block = {
            "p": cfg.p,
            "c": cfg.c,
            "modulus": list(cfg.modulus) if cfg.modulus is not None else None,
            "q": cfg.q,
            "j0": self.j0,
            "j1": self.j1,
            "j_max": self.j_max,
            "epsilon": self.epsilon,
            "cascade_iterations": self.cascade_iterations,
            "seed": self.seed,
            "count": self.count,
            "resolution": self.resolution,
            "rng": "pcg64",
        }
        if self.sys is not None:
            block.update({
                "N": self.sys.N,
                "r": self.sys.r,
                "nu": self.sys.nu,
                "normalization": self.sys.normalization,
                "branches": self.sys.branches,
                "lambda_degenerate": self.sys.lambda_degenerate,
                "dilation_amplitude": self.sys.dilation_amplitude,
                "mask_norm_const": self.sys.mask_norm_const,
                "mask_count": len(self.sys.masks),
            })
        return block


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def suite_functions(cfg: FieldConfig, resolution: int, count: int, seed: int):
    """The deterministic random test family: complex standard-normal value
    tables over the resolution grid, drawn from PCG64(seed)."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    n = cfg.q ** resolution
    for _ in range(count):
        vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        yield PeriodicStepFunction(cfg, resolution, vals)


def _require_system(rc: RunConfig) -> SystemConfig:
    if rc.sys is None or not rc.sys.masks:
        raise ConfigError("this command needs a masks file with coefficients")
    return rc.sys


# ------------------------------------------------------------- commands --

def field_info_report(rc: RunConfig) -> dict:
    cfg = rc.cfg
    return {
        "version": __version__,
        "command": "field-info",
        "field": {
            "p": cfg.p,
            "c": cfg.c,
            "q": cfg.q,
            "modulus": list(cfg.modulus) if cfg.modulus is not None else None,
            "prime_element": cfg.prime_element().text(),
            "unit_ball_measure": 1.0,
            "prime_ideal_measure": 1.0 / cfg.q,
        },
        "uindex_table": _uindex_rows(cfg, 32),
    }


def _uindex_rows(cfg: FieldConfig, count: int) -> list[dict]:
    rows = []
    for n in range(count):
        x = uindex(cfg, n)
        rows.append({
            "n": n,
            "element": x.text(),
            "valuation": None if x.is_zero else x.valuation(),
            "norm": x.norm(),
        })
    return rows


def uindex_report(rc: RunConfig, count: int) -> dict:
    if count < 1:
        raise ConfigError(f"need a positive enumeration count, got {count}")
    return {
        "version": __version__,
        "command": "uindex",
        "p": rc.cfg.p,
        "c": rc.cfg.c,
        "q": rc.cfg.q,
        "table": _uindex_rows(rc.cfg, count),
    }


def verify_report(rc: RunConfig) -> dict:
    sys_cfg = _require_system(rc)
    cfg = sys_cfg.field

    phi_hat = iterate_refinement(sys_cfg.masks[0], sys_cfg,
                                 rc.cascade_iterations)
    part = check_partition(phi_hat, sys_cfg)
    dense = PeriodicStepFunction.from_step(part).values.real
    part_min = float(dense.min())
    part_max = float(dense.max())
    partition_ok = abs(part_max - 1.0) <= rc.residual_tol and \
        abs(part_min - 1.0) <= rc.residual_tol
    zero_cell = cfg.zero()
    phi_at_zero = abs(phi_hat.cells.get(zero_cell, 0j))

    gram = uep_gram(sys_cfg)
    gram_ok = gram["max_deviation"] <= rc.gram_tol
    bessel = bessel_mask_check(sys_cfg.masks[0], sys_cfg)

    generators = derive_generators(sys_cfg, rc.cascade_iterations)
    analyzer = FrameAnalyzer(sys_cfg, generators)
    worst = 0.0
    worst_proj = 0.0
    worst_ratio = 0.0
    for f in suite_functions(cfg, rc.resolution, rc.count, rc.seed):
        fs = f.to_step()
        for j in range(rc.j0, rc.j1):
            residual, proj = analyzer.two_scale_check(fs, j)
            worst = max(worst, residual)
            worst_proj = max(worst_proj, proj)
        ratio = analyzer.frame_ratio(fs, rc.j0, rc.j1)
        worst_ratio = max(worst_ratio, abs(ratio - 1.0))
    two_scale_ok = worst <= rc.residual_tol and worst_proj <= rc.residual_tol
    ratio_ok = worst_ratio <= rc.residual_tol

    verdicts = {
        "partition": partition_ok,
        "gram": gram_ok,
        "bessel": bool(bessel["verdict"]),
        "two_scale": two_scale_ok,
        "frame_ratio": ratio_ok,
    }
    verdicts["overall"] = all(verdicts.values())
    return {
        "version": __version__,
        "command": "verify",
        "config": rc.config_block(),
        "partition_check": {
            "resolution": part.resolution,
            "min": part_min,
            "max": part_max,
            "phi_hat_at_zero": phi_at_zero,
            "degenerate_family": sys_cfg.lambda_degenerate,
            "tolerance": rc.residual_tol,
        },
        "sigma_v0_fraction": sigma_v0(phi_hat, sys_cfg).norm2(),
        "gram": gram,
        "bessel": bessel,
        "two_scale": {
            "count": rc.count,
            "j0": rc.j0,
            "j1": rc.j1,
            "max_residual": worst,
            "max_projector_residual": worst_proj,
            "tolerance": rc.residual_tol,
        },
        "frame_ratio": {
            "count": rc.count,
            "j0": rc.j0,
            "j1": rc.j1,
            "max_abs_deviation": worst_ratio,
            "tolerance": rc.residual_tol,
        },
        "verdicts": verdicts,
    }


def periodic_report(rc: RunConfig) -> dict:
    sys_cfg = _require_system(rc)
    cfg = sys_cfg.field

    gram = uep_gram(sys_cfg)
    gram_ok = gram["max_deviation"] <= rc.gram_tol
    generators = derive_generators(sys_cfg, rc.cascade_iterations)
    spec = PeriodicSystemSpec(sys_cfg, generators, rc.j_max)

    all_finite = True
    max_j = None
    first_scan = None
    worst_residual = 0.0
    worst_tightness = 0.0
    worst_tail = 0.0
    for f in suite_functions(cfg, rc.resolution, rc.count, rc.seed):
        J, sums = projection_energy_scan(f, rc.epsilon, spec)
        if first_scan is None:
            first_scan = {"J": J, "sums": [sums[j] for j in sorted(sums)]}
        if J is None:
            all_finite = False
        elif max_j is None or J > max_j:
            max_j = J
        for j in range(rc.j_max):
            worst_residual = max(worst_residual,
                                 periodic_two_scale_check(f, j, spec))
        out = periodic_tightness_check(f, spec)
        worst_tightness = max(worst_tightness, out["residual"])
        worst_tail = max(worst_tail, out["tail"])

    two_scale_ok = worst_residual <= rc.residual_tol
    tightness_ok = worst_tightness <= rc.residual_tol and \
        worst_tail <= rc.tail_tol
    verdicts = {
        "gram": gram_ok,
        "scan_finite": all_finite,
        "two_scale": two_scale_ok,
        "tightness": tightness_ok,
    }
    verdicts["overall"] = all(verdicts.values())
    return {
        "version": __version__,
        "command": "periodic",
        "config": rc.config_block(),
        "gram": gram,
        "scaling_scan": {
            "epsilon": rc.epsilon,
            "count": rc.count,
            "all_finite": all_finite,
            "max_J": max_j,
            "first_function": first_scan,
        },
        "two_scale_residuals": {
            "count": rc.count,
            "scales": list(range(rc.j_max)),
            "max_residual": worst_residual,
            "tolerance": rc.residual_tol,
        },
        "tightness": {
            "count": rc.count,
            "max_residual": worst_tightness,
            "max_tail": worst_tail,
            "residual_tolerance": rc.residual_tol,
            "tail_tolerance": rc.tail_tol,
        },
        "verdicts": verdicts,
    }


def dump_wavelets_report(rc: RunConfig, out_dir: str) -> dict:
    sys_cfg = _require_system(rc)
    generators = derive_generators(sys_cfg, rc.cascade_iterations)
    os.makedirs(out_dir, exist_ok=True)
    files = []
    norms = []
    resolutions = []
    for l, g in enumerate(generators):
        name = "phi.csv" if l == 0 else f"psi_{l}.csv"
        dump_csv(g, os.path.join(out_dir, name))
        files.append(name)
        norms.append(g.norm2())
        resolutions.append(g.resolution)
    return {
        "version": __version__,
        "command": "dump-wavelets",
        "config": rc.config_block(),
        "directory": out_dir,
        "files": files,
        "norm2": norms,
        "resolutions": resolutions,
    }
