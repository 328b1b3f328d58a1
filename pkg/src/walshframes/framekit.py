"""Mask calculus and exact frame verification.

A mask is a finitely supported character polynomial over the translation
family: m(xi) = norm_const * sum_idx a_idx * conj(chi(lambda_idx * xi)).
Masks are locally constant, so every check below reduces to finitely many
exact evaluations:

  * refinement and wavelet generation in the frequency domain,
  * the partition-of-unity sum over the translation family,
  * the shift-Gram (perfect reconstruction) matrix and a Bessel bound,
  * frame-coefficient analysis of the dilate/translate system with
    support-exact truncation of the translation sums, and
  * the per-scale energy identity with materialized projection operators.

The FrameAnalyzer caches system members across calls, which matters when a
whole suite of test functions is pushed through the same system.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .algebra import (
    FieldConfig,
    FieldElement,
    LambdaIndex,
    SystemConfig,
    chi,
)
from .errors import ConfigError, DegenerateInput, InputDataError, NotNormalized
from .harmonic import character_table, inverse_transform
from .stepfn import (
    PeriodicStepFunction,
    StepFunction,
    dilate,
    inner,
    prune,
    refine,
    translate,
    unit_ball,
)

__all__ = [
    "FrameAnalyzer",
    "GRAM_TOL",
    "Mask",
    "NORMALIZATION_GATE",
    "PRUNE_TOL",
    "STRUCTURAL_TOL",
    "TRANSFORM_TOL",
    "analysis",
    "bessel_mask_check",
    "cascade",
    "check_partition",
    "derive_generators",
    "eval_mask",
    "frame_ratio",
    "iterate_refinement",
    "load_masks",
    "mask_cells",
    "refine_hat",
    "save_masks",
    "sigma_v0",
    "system_member",
    "two_scale_check",
    "uep_gram",
    "wavelet_hat",
    "wavelet_time",
]

STRUCTURAL_TOL = 1e-12   # identities that involve no transform roundoff
TRANSFORM_TOL = 1e-9     # identities mediated by transforms / long sums
GRAM_TOL = 1e-10         # verdict threshold for the shift-Gram matrix
NORMALIZATION_GATE = 1e-6
PRUNE_TOL = 1e-14        # noise floor for iterated frequency products

MASK_MAGIC = "# walshframes-masks v1"


class Mask:
    """Finitely supported coefficients over the translation family."""

    __slots__ = ("sys", "coeffs", "_terms", "constancy_resolution")

    def __init__(self, sys: SystemConfig,
                 coeffs: Mapping | Iterable[tuple]):
        items = coeffs.items() if hasattr(coeffs, "items") else coeffs
        table: dict[LambdaIndex, complex] = {}
        for idx, value in items:
            idx = LambdaIndex(int(idx[0]), int(idx[1]))
            if idx.n < 0 or idx.delta not in (0, 1):
                raise ValueError(f"bad coefficient index {idx!r}")
            value = complex(value)
            if value != 0:
                table[idx] = value
        self.sys = sys
        self.coeffs = table
        self._terms = tuple((idx, sys.lambda_element(idx), a)
                            for idx, a in sorted(table.items()))
        K = 0
        for _, lam, _ in self._terms:
            if not lam.is_zero:
                K = max(K, -lam.valuation())
        self.constancy_resolution = K

    def items_sorted(self) -> list[tuple[LambdaIndex, complex]]:
        return [(idx, a) for idx, _, a in self._terms]

    def value(self, xi: FieldElement) -> complex:
        acc = 0j
        for _, lam, a in self._terms:
            acc += a * chi(lam * xi).conjugate()
        return self.sys.mask_norm_const * acc

    def __repr__(self):
        return f"<Mask terms={len(self._terms)} K={self.constancy_resolution}>"


def eval_mask(m: Mask, xi: FieldElement) -> complex:
    return m.value(xi)


def _domain_grid(cfg: FieldConfig, resolution: int) -> list[FieldElement]:
    reps = [cfg.zero()]
    for e in range(resolution):
        reps = [r + cfg.monomial(d, e) for r in reps for d in range(cfg.q)]
    return reps


def mask_cells(m: Mask) -> StepFunction:
    """The finitely many values m takes on D, one cell per coset of B^K."""
    cfg = m.sys.field
    K = m.constancy_resolution
    return StepFunction(cfg, K, {rep: m.value(rep) for rep in _domain_grid(cfg, K)})


# --------------------------------------------------- frequency-side products --

def _mask_refine(phi_hat: StepFunction, mask: Mask, sys: SystemConfig) -> StepFunction:
    """xi -> mask(w xi) * phi_hat(w xi) with w = t * nu^(-1), exact cellwise."""
    cfg = sys.field
    k2 = max(phi_hat.resolution - 1, mask.constancy_resolution - 1)
    moved = StepFunction(cfg, phi_hat.resolution - 1, {
        rep.scale(sys.nu).shift(-1): v for rep, v in phi_hat.cells.items()})
    moved = refine(moved, k2)
    inv_nu = cfg.gf_inv(sys.nu)
    return StepFunction(cfg, k2, {
        rep: v * mask.value(rep.scale(inv_nu).shift(1))
        for rep, v in moved.cells.items()})


def refine_hat(phi_hat: StepFunction, m0: Mask, sys: SystemConfig) -> StepFunction:
    return _mask_refine(phi_hat, m0, sys)


def wavelet_hat(phi_hat: StepFunction, ml: Mask, sys: SystemConfig) -> StepFunction:
    return _mask_refine(phi_hat, ml, sys)


def wavelet_time(phi_hat: StepFunction, ml: Mask, sys: SystemConfig) -> StepFunction:
    return inverse_transform(wavelet_hat(phi_hat, ml, sys))


def iterate_refinement(m0: Mask, sys: SystemConfig, iterations: int,
                       prune_tol: float = PRUNE_TOL) -> StepFunction:
    """Iterate the refinement product from the unit-ball seed; cells whose
    amplitude falls below prune_tol are dropped so that roundoff cannot
    inflate the support of a genuinely refinable limit."""
    if iterations < 0:
        raise ConfigError("iteration count must be nonnegative")
    phi_hat = unit_ball(sys.field)
    for _ in range(iterations):
        phi_hat = prune(refine_hat(phi_hat, m0, sys), prune_tol)
    return phi_hat


def cascade(m0: Mask, sys: SystemConfig, iterations: int) -> StepFunction:
    """Time-side refinable approximant; requires m0 normalized at 0."""
    dev = abs(m0.value(sys.field.zero()) - 1)
    if dev > NORMALIZATION_GATE:
        raise NotNormalized(
            f"mask value at 0 is off by {dev:.3e} (gate {NORMALIZATION_GATE})")
    return inverse_transform(iterate_refinement(m0, sys, iterations))


def derive_generators(sys: SystemConfig, iterations: int = 4,
                      prune_tol: float = PRUNE_TOL) -> tuple[StepFunction, ...]:
    """(phi, psi_1, ..., psi_L) from the configured masks; no normalization
    gate, so detectably broken masks still produce inspectable generators."""
    if not sys.masks:
        raise ConfigError("system has no masks configured")
    phi_hat = iterate_refinement(sys.masks[0], sys, iterations, prune_tol)
    gens = [inverse_transform(phi_hat)]
    for ml in sys.masks[1:]:
        gens.append(inverse_transform(prune(wavelet_hat(phi_hat, ml, sys), prune_tol)))
    return tuple(gens)


# ------------------------------------------------------ partition of unity --

def check_partition(phi_hat: StepFunction, sys: SystemConfig,
                    lam_range: Iterable[LambdaIndex] | None = None) -> StepFunction:
    """Per-cell value of sum_lambda |phi_hat(xi + lambda)|^2 on D.

    Every translation has purely negative digits, so a support cell h + B^K
    lands in D under exactly one lattice value, its own fractional part; the
    indexed family hits that value `branches` times. Passing an explicit
    lam_range instead sums over exactly those indices.
    """
    cfg = sys.field
    K = max(phi_hat.resolution, 0)
    g = refine(phi_hat, K)
    sums: dict[FieldElement, float] = {}
    if lam_range is None:
        mult = float(sys.branches)
        for rep, v in g.items_sorted():
            frac = rep.tail(0)
            sums[frac] = sums.get(frac, 0.0) + abs(v) ** 2 * mult
    else:
        for idx in lam_range:
            lam = sys.lambda_element(idx)
            for rep, v in g.items_sorted():
                d = rep - lam
                if d.terms and d.terms[0][0] < 0:
                    continue
                sums[d] = sums.get(d, 0.0) + abs(v) ** 2
    return StepFunction(cfg, K, sums)


def sigma_v0(phi_hat: StepFunction, sys: SystemConfig,
             tol: float = STRUCTURAL_TOL) -> StepFunction:
    """Indicator of the cells of D where the partition sum exceeds tol.

    The norm2 of the result is the Haar measure of that cell set.
    """
    part = check_partition(phi_hat, sys)
    return StepFunction(sys.field, part.resolution,
                        {rep: 1.0 for rep, v in part.cells.items() if abs(v) > tol})


# ------------------------------------------------------------- UEP matrix --

def _mask_table(m: Mask, shift: FieldElement, resolution: int) -> np.ndarray:
    """m(xi + shift) over the dense D-grid (PeriodicStepFunction indexing)."""
    cfg = m.sys.field
    out = np.zeros(cfg.q ** resolution, dtype=complex)
    for _, lam, a in m._terms:
        phase = chi(lam * shift).conjugate()
        out += (a * phase) * np.conj(character_table(cfg, lam, resolution))
    return out * m.sys.mask_norm_const


def uep_gram(sys: SystemConfig, sigma: StepFunction | None = None) -> dict:
    """Max deviation of G(xi) = sum_l m_l(xi+tau_s) conj(m_l(xi+tau_s'))
    from the identity over the cells of sigma (default: all of D)."""
    if not sys.shift_set:
        raise ConfigError("shift set is empty")
    if not sys.masks:
        raise ConfigError("system has no masks configured")
    K = max(m.constancy_resolution for m in sys.masks)
    if sigma is not None:
        K = max(K, sigma.resolution)
    T = np.array([[_mask_table(m, tau, K) for tau in sys.shift_set]
                  for m in sys.masks])
    G = np.einsum("lsc,ltc->cst", T, np.conj(T))
    dev = np.abs(G - np.eye(len(sys.shift_set)))
    if sigma is not None:
        sel = PeriodicStepFunction.from_step(refine(sigma, K)).values != 0
        dev = dev[sel]
    cells = int(dev.shape[0])
    max_dev = float(dev.max()) if cells else 0.0
    return {
        "max_deviation": max_dev,
        "tolerance": GRAM_TOL,
        "verdict": bool(max_dev <= GRAM_TOL),
        "resolution": K,
        "cells_checked": cells,
    }


def bessel_mask_check(m0: Mask, sys: SystemConfig) -> dict:
    """Per-cell sum_s |m0(xi + tau_s)|^2 against the Bessel bound 1."""
    if not sys.shift_set:
        raise ConfigError("shift set is empty")
    K = m0.constancy_resolution
    rows = np.array([_mask_table(m0, tau, K) for tau in sys.shift_set])
    sums = np.sum(np.abs(rows) ** 2, axis=0)
    max_sum = float(sums.max())
    return {
        "max_sum": max_sum,
        "tolerance": GRAM_TOL,
        "verdict": bool(max_sum <= 1.0 + GRAM_TOL),
    }


# ------------------------------------------------------------ member system --

def system_member(l: int, j: int, idx: LambdaIndex, sys: SystemConfig,
                  generators: Sequence[StepFunction]) -> StepFunction:
    """Translate generator l by lambda_idx, then apply j dilation steps."""
    g = translate(generators[l], sys.lambda_element(idx))
    for _ in range(abs(j)):
        g = dilate(g, sys, "fine" if j > 0 else "coarse")
    return g


def _support_overlaps(f: StepFunction, g: StepFunction) -> bool:
    if f.resolution <= g.resolution:
        coarse, fine = f, g
    else:
        coarse, fine = g, f
    keys = coarse.cells.keys()
    kc = coarse.resolution
    return any(rep.truncate(kc) in keys for rep in fine.cells)


def _energy(row: Mapping[LambdaIndex, complex]) -> float:
    return sum(abs(c) ** 2 for c in row.values())


class FrameAnalyzer:
    """Coefficient analysis against one system, with a member cache."""

    __slots__ = ("sys", "generators", "_members")

    def __init__(self, sys: SystemConfig, generators: Sequence[StepFunction]):
        if not generators:
            raise ConfigError("need at least the refinable generator")
        self.sys = sys
        self.generators = tuple(generators)
        self._members: dict[tuple, StepFunction] = {}

    def member(self, l: int, j: int, idx: LambdaIndex) -> StepFunction:
        # keyed on the translation value: degenerate indices share members
        lam = self.sys.lambda_element(idx)
        key = (l, j, lam.terms)
        got = self._members.get(key)
        if got is None:
            got = self._members[key] = system_member(
                l, j, idx, self.sys, self.generators)
        return got

    def coefficient_row(self, f: StepFunction, l: int, j: int,
                        margin: int = 0) -> dict[LambdaIndex, complex]:
        """All <f, member(l, j, idx)> whose supports overlap.

        Translations outside B^A, A = min(ball(f) - j, ball(g)), cannot meet
        the support of f, so the index scan below is provably exhaustive;
        margin widens it by a factor q^margin (the table must not change).
        """
        if f.is_zero or self.generators[l].is_zero:
            return {}
        A = min(f.support_ball() - j, self.generators[l].support_ball())
        exp = max(0, -A)
        if self.sys.branches == 2:
            exp = max(exp, -self.sys.theta.valuation())
        bound = self.sys.q ** (exp + margin)
        row: dict[LambdaIndex, complex] = {}
        for delta in range(self.sys.branches):
            for n in range(bound):
                idx = LambdaIndex(n, delta)
                member = self.member(l, j, idx)
                if _support_overlaps(f, member):
                    row[idx] = inner(f, member)
        return row

    def analysis(self, f: StepFunction, j_range: Iterable[int],
                 margin: int = 0) -> dict[tuple[int, int], dict]:
        """(l, j) -> coefficient row for the wavelet generators l >= 1."""
        return {(l, j): self.coefficient_row(f, l, j, margin)
                for l in range(1, len(self.generators)) for j in j_range}

    def _expand(self, row: Mapping[LambdaIndex, complex],
                l: int, j: int) -> StepFunction:
        out = StepFunction(self.sys.field, 0, {})
        for idx in sorted(row):
            out = out + self.member(l, j, idx).scale(row[idx])
        return out

    def two_scale_check(self, f: StepFunction, j: int) -> tuple[float, float]:
        """Energy balance across one scale step, by two independent routes.

        Returns (residual, projector_residual): the first compares summed
        squared coefficients, the second materializes the projections P_j f
        and Q_j f and compares <P_j f, f> + <Q_j f, f> with <P_{j+1} f, f>.
        """
        row_fine = self.coefficient_row(f, 0, j + 1)
        row_coarse = self.coefficient_row(f, 0, j)
        wave_rows = [self.coefficient_row(f, l, j)
                     for l in range(1, len(self.generators))]
        lhs = _energy(row_fine)
        rhs = _energy(row_coarse) + sum(_energy(r) for r in wave_rows)
        residual = abs(lhs - rhs)

        p_fine = self._expand(row_fine, 0, j + 1)
        p_coarse = self._expand(row_coarse, 0, j)
        q_parts = 0j
        for l, rw in enumerate(wave_rows, start=1):
            q_parts += inner(self._expand(rw, l, j), f)
        projector_residual = abs(
            inner(p_coarse, f) + q_parts - inner(p_fine, f))
        return residual, projector_residual

    def frame_ratio(self, f: StepFunction, j0: int, j1: int) -> float:
        """(coarse-scale energy + wavelet energies over [j0, j1)) / ||f||^2."""
        n2 = f.norm2()
        if n2 == 0.0:
            raise DegenerateInput("frame ratio of the zero function")
        total = _energy(self.coefficient_row(f, 0, j0))
        for l in range(1, len(self.generators)):
            for j in range(j0, j1):
                total += _energy(self.coefficient_row(f, l, j))
        return total / n2


def analysis(f: StepFunction, sys: SystemConfig,
             generators: Sequence[StepFunction], j_range: Iterable[int],
             margin: int = 0) -> dict:
    return FrameAnalyzer(sys, generators).analysis(f, j_range, margin)


def two_scale_check(f: StepFunction, j: int, sys: SystemConfig,
                    generators: Sequence[StepFunction]) -> tuple[float, float]:
    return FrameAnalyzer(sys, generators).two_scale_check(f, j)


def frame_ratio(f: StepFunction, sys: SystemConfig,
                generators: Sequence[StepFunction], j0: int, j1: int) -> float:
    return FrameAnalyzer(sys, generators).frame_ratio(f, j0, j1)


# ---------------------------------------------------------------- mask files --

def save_masks(sys: SystemConfig, dest: str | TextIO) -> None:
    """Write the full system description: field/system header plus one
    coefficient block per mask, rows "n delta re im"."""
    if isinstance(dest, str):
        with open(dest, "w") as fh:
            save_masks(sys, fh)
        return
    cfg = sys.field
    w = dest.write
    w(MASK_MAGIC + "\n")
    w(f"p = {cfg.p}\n")
    w(f"c = {cfg.c}\n")
    if cfg.modulus is not None:
        w("modulus = " + ".".join(str(d) for d in cfg.modulus) + "\n")
    w(f"N = {sys.N}\n")
    w(f"r = {sys.r}\n")
    w(f"nu = {sys.nu}\n")
    w(f"normalization = {sys.normalization}\n")
    for l, m in enumerate(sys.masks):
        w(f"mask {l}\n")
        for idx, a in m.items_sorted():
            w(f"{idx.n} {idx.delta} {a.real!r} {a.imag!r}\n")


def load_masks(src: str | TextIO) -> SystemConfig:
    """Inverse of save_masks; returns the system with masks attached.

    Structural problems in the file raise InputDataError with a line
    number; inconsistent field/system parameters raise ConfigError.
    """
    if isinstance(src, str):
        with open(src) as fh:
            return load_masks(fh)
    first = src.readline()
    if not first.startswith(MASK_MAGIC):
        raise InputDataError("line 1: missing mask file header")
    header: dict[str, str] = {}
    rows: list[dict[tuple[int, int], complex]] = []
    for lineno, raw in enumerate(src, start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("mask"):
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) != len(rows):
                raise InputDataError(
                    f"line {lineno}: mask sections must be numbered consecutively")
            rows.append({})
            continue
        if not rows:
            key, sep, val = line.partition("=")
            if not sep:
                raise InputDataError(f"line {lineno}: expected 'key = value'")
            header[key.strip()] = val.strip()
            continue
        parts = line.split()
        if len(parts) != 4:
            raise InputDataError(f"line {lineno}: expected 'n delta re im'")
        try:
            key = (int(parts[0]), int(parts[1]))
            value = complex(float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise InputDataError(f"line {lineno}: malformed row ({exc})") from exc
        if key in rows[-1]:
            raise InputDataError(f"line {lineno}: duplicate coefficient index")
        rows[-1][key] = value
    try:
        p = int(header["p"])
        c = int(header["c"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"mask file header needs integer p and c ({exc})") from exc
    if c > 1 and "modulus" not in header:
        raise ConfigError("mask file with c > 1 must state the modulus")
    try:
        modulus = (tuple(int(d) for d in header["modulus"].split("."))
                   if "modulus" in header else None)
        N = int(header.get("N", "1"))
        r = int(header.get("r", "1"))
        nu = int(header["nu"]) if "nu" in header else None
    except ValueError as exc:
        raise ConfigError(f"mask file header has a malformed value ({exc})") from exc
    cfg = FieldConfig(p, c, modulus)
    base = SystemConfig(cfg, N, r, dilation_unit=nu,
                        normalization=header.get("normalization", "unitary"))
    return base.with_masks(tuple(Mask(base, block) for block in rows))
