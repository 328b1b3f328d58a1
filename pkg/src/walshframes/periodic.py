"""Lattice folding and the folded wavelet system on the unit ball.

Because every step function here has compact support, folding a function
over the lattice {u(0), u(1), u(2), ...} is a finite sum, and the folded
system at scale j carries the integer labels 0 <= label < (qN)^j. The
checks in this module are the folded counterparts of the frame checks:
a projection-energy scan across scales, the per-scale energy balance,
and the full tight-frame sum with an explicit truncation tail.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateInput, TruncationError
from .framekit import system_member
from .stepfn import PeriodicStepFunction, StepFunction, refine

__all__ = [
    "PeriodicSystemSpec",
    "periodic_member",
    "periodic_tightness_check",
    "periodic_two_scale_check",
    "periodize",
    "projection_energy_scan",
]


def periodize(f: StepFunction) -> PeriodicStepFunction:
    """Fold f onto the unit ball: x -> sum over lattice shifts of f(x + u(n)).

    Each cell of f lands in exactly one lattice translate of the unit ball,
    so the fold just reroutes every cell to its fractional part; cells of
    resolution below zero are split first and contribute multiplicity.
    """
    k = max(f.resolution, 0)
    g = refine(f, k)
    out = PeriodicStepFunction(f.cfg, k, np.zeros(f.cfg.q ** k, dtype=complex))
    for rep, v in g.items_sorted():
        out.values[out.index_of_rep(rep.tail(0))] += v
    return out


class PeriodicSystemSpec:
    """Generators plus a scale cap, with folded members cached per label."""

    __slots__ = ("sys", "generators", "j_max", "_members")

    def __init__(self, sys, generators: Sequence[StepFunction], j_max: int):
        if not generators:
            raise ConfigError("need at least the refinable generator")
        if not isinstance(j_max, int) or j_max < 0:
            raise ConfigError(f"j_max must be a nonnegative integer, got {j_max!r}")
        self.sys = sys
        self.generators = tuple(generators)
        self.j_max = j_max
        self._members: dict[tuple, PeriodicStepFunction] = {}

    def member(self, l: int, j: int, label: int) -> PeriodicStepFunction:
        """periodize(system_member) for the label-th translation at scale j."""
        if not 0 <= j <= self.j_max:
            raise IndexError(f"scale {j} outside [0, {self.j_max}]")
        if not 0 <= label < self.sys.qN ** j:
            raise IndexError(
                f"label {label} outside [0, {self.sys.qN ** j}) at scale {j}")
        gen = self.generators[l]
        idx = self.sys.branch_index(label)
        # keyed on the translation value: degenerate labels share members
        key = (l, j, self.sys.lambda_element(idx).terms)
        got = self._members.get(key)
        if got is None:
            got = self._members[key] = periodize(
                system_member(l, j, idx, self.sys, self.generators))
        return got


def periodic_member(l: int, j: int, label: int,
                    spec: PeriodicSystemSpec) -> PeriodicStepFunction:
    return spec.member(l, j, label)


def _scaling_energy(f: PeriodicStepFunction, j: int,
                    spec: PeriodicSystemSpec) -> float:
    return sum(abs(f.inner(spec.member(0, j, s))) ** 2
               for s in range(spec.sys.qN ** j))


def _wavelet_energy(f: PeriodicStepFunction, j: int,
                    spec: PeriodicSystemSpec) -> float:
    total = 0.0
    for l in range(1, len(spec.generators)):
        total += sum(abs(f.inner(spec.member(l, j, s))) ** 2
                     for s in range(spec.sys.qN ** j))
    return total


def projection_energy_scan(f: PeriodicStepFunction, eps: float,
                           spec: PeriodicSystemSpec):
    """Per-scale scaling energies S_j and the smallest J from which every
    S_j stays within (1 +- eps) of the squared norm, None if none does."""
    if eps <= 0:
        raise ConfigError(f"scan slack must be positive, got {eps!r}")
    n2 = f.norm2()
    if n2 == 0.0:
        raise DegenerateInput("projection scan of the zero function")
    sums = {j: _scaling_energy(f, j, spec) for j in range(spec.j_max + 1)}
    J = None
    for start in range(spec.j_max + 1):
        if all((1 - eps) * n2 <= sums[j] <= (1 + eps) * n2
               for j in range(start, spec.j_max + 1)):
            J = start
            break
    return J, sums


def periodic_two_scale_check(f: PeriodicStepFunction, j: int,
                             spec: PeriodicSystemSpec) -> float:
    """|scaling energy at j+1  -  scaling energy at j - wavelet energy at j|."""
    lhs = _scaling_energy(f, j + 1, spec)
    rhs = _scaling_energy(f, j, spec) + _wavelet_energy(f, j, spec)
    return abs(lhs - rhs)


def periodic_tightness_check(f: PeriodicStepFunction,
                             spec: PeriodicSystemSpec) -> dict:
    """Full folded frame sum against the squared norm.

    Scales 0 <= j < j_max are summed explicitly; the returned tail is the
    wavelet energy at the first omitted scale j_max, which vanishes for
    inputs the scale cap resolves (wavelet members at that scale have zero
    mean on every cell where f is constant). Inputs finer than the cap
    raise TruncationError instead of returning a silently short sum.
    """
    if spec.j_max < f.resolution:
        raise TruncationError(
            f"scale cap {spec.j_max} cannot resolve a resolution-"
            f"{f.resolution} input")
    total = abs(f.inner(spec.member(0, 0, 0))) ** 2
    for j in range(spec.j_max):
        total += _wavelet_energy(f, j, spec)
    tail = _wavelet_energy(f, spec.j_max, spec)
    n2 = f.norm2()
    return {
        "total": total,
        "norm2": n2,
        "residual": abs(total - n2),
        "tail": tail,
    }
