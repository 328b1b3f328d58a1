"""Arithmetic for the local field K = GF(q)((t)) in positive characteristic.

Elements are finite Laurent series sum_e c_e * t^e with coefficients in
GF(q), q = p^c. A GF(q) scalar is stored as an integer in [0, q) whose
base-p digits are the coordinates in the power basis {1, z, ..., z^(c-1)}
of GF(p)[z] modulo a configured irreducible polynomial. The absolute value
is |x| = q^(-v(x)) with v(x) the lowest exponent carrying a nonzero
coefficient, and |0| = 0. The ring of integers D = {|x| <= 1} collects the
series supported on exponents >= 0; the prime ideal B = t*D on exponents
>= 1, and B^k on exponents >= k. Haar measure is normalized so that D has
measure 1, hence each coset of B^k has measure q^(-k).

The map n -> u(n) enumerates coset representatives of D: writing n in base
q as sum_i b_i q^i, u(n) = sum_i gf(b_i) * t^(-1-i) where gf(b) is the
scalar with base-p digit vector of b. u is injective, u(0) = 0, and
u(r q^k + s) = u(r) t^(-k) + u(s) for s < q^k.

The additive character chi is trivial on D and is evaluated from the
zeta_0-coordinate a of the coefficient at exponent -1: chi(x) =
exp(2*pi*i*a/p), read from a precomputed table of p-th roots of unity.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable, NamedTuple

from .errors import ConfigError, NonUnitScalar

__all__ = [
    "DEFAULT_MODULI",
    "FieldConfig",
    "FieldElement",
    "LambdaIndex",
    "SystemConfig",
    "chi",
    "chi_xi",
    "embed_integer",
    "uindex",
    "uindex_inverse",
]

# Shipped irreducible moduli (coefficients low to high degree, monic).
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),      # z^2 + z + 1
    (2, 3): (1, 1, 0, 1),   # z^3 + z + 1
}

NORMALIZATIONS = ("unitary", "qn")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_rem(a: list[int], b: tuple[int, ...], p: int) -> list[int]:
    """Remainder of a by monic b over Z/p; digit lists low to high."""
    a = [x % p for x in a]
    deg = len(b) - 1
    for top in range(len(a) - 1, deg - 1, -1):
        coeff = a[top]
        if coeff:
            for k in range(deg + 1):
                a[top - deg + k] = (a[top - deg + k] - coeff * b[k]) % p
    return a[:deg]


class FieldConfig:
    """Parameters and lookup tables for GF(q) and the field K = GF(q)((t)).

    Immutable; hashable on (p, c, modulus) so derived kernels can be cached.
    All scalar arithmetic goes through precomputed q x q tables.
    """

    __slots__ = ("p", "c", "q", "modulus", "roots",
                 "_add", "_mul", "_inv", "_neg", "_key")

    def __init__(self, p: int, c: int = 1, modulus: Iterable[int] | None = None):
        if not isinstance(p, int) or not _is_prime(p):
            raise ConfigError(f"p must be prime, got {p!r}")
        if not isinstance(c, int) or c < 1:
            raise ConfigError(f"c must be a positive integer, got {c!r}")
        self.p = p
        self.c = c
        self.q = p ** c
        if c == 1:
            self.modulus = None
            if modulus is not None:
                raise ConfigError("modulus is only meaningful for c > 1")
        else:
            if modulus is None:
                try:
                    modulus = DEFAULT_MODULI[(p, c)]
                except KeyError:
                    raise ConfigError(
                        f"no shipped modulus for (p, c) = ({p}, {c}); pass one "
                        f"explicitly (shipped defaults: {sorted(DEFAULT_MODULI)})"
                    ) from None
            modulus = tuple(int(x) % p for x in modulus)
            if len(modulus) != c + 1:
                raise ConfigError(f"modulus must have degree {c}")
            if modulus[-1] != 1:
                raise ConfigError("modulus must be monic")
            self.modulus = modulus
            self._check_irreducible()
        self._build_tables()
        if p == 2:
            # representable exactly; keeps binary character sums float-exact
            self.roots = (1 + 0j, -1 + 0j)
        else:
            self.roots = tuple(cmath.exp(2j * math.pi * a / p) for a in range(p))
        self._key = (self.p, self.c, self.modulus)

    def _check_irreducible(self) -> None:
        # trial division by every monic polynomial of degree <= c/2
        p, c = self.p, self.c
        for deg in range(1, c // 2 + 1):
            for idx in range(p ** deg):
                g = self._int_digits(idx, deg) + (1,)
                if not any(_poly_rem(list(self.modulus), g, p)):
                    raise ConfigError(
                        f"modulus {self.modulus} is reducible over GF({p})")

    def _int_digits(self, n: int, width: int) -> tuple[int, ...]:
        out = []
        for _ in range(width):
            n, d = divmod(n, self.p)
            out.append(d)
        return tuple(out)

    def _build_tables(self) -> None:
        p, c, q = self.p, self.c, self.q
        digits = [self._int_digits(a, c) for a in range(q)]

        def undig(ds):
            n = 0
            for d in reversed(ds):
                n = n * p + d
            return n

        self._add = tuple(
            tuple(undig([(x + y) % p for x, y in zip(digits[a], digits[b])])
                  for b in range(q))
            for a in range(q))
        self._neg = tuple(undig([(-x) % p for x in digits[a]]) for a in range(q))
        mul = []
        for a in range(q):
            row = []
            for b in range(q):
                prod = [0] * (2 * c - 1)
                for i, x in enumerate(digits[a]):
                    for j, y in enumerate(digits[b]):
                        prod[i + j] = (prod[i + j] + x * y) % p
                if c > 1:
                    prod = _poly_rem(prod, self.modulus, p)
                row.append(undig(prod[:c]))
            mul.append(tuple(row))
        self._mul = tuple(mul)
        inv = [0] * q
        for a in range(1, q):
            inv[a] = self._mul[a].index(1)
        self._inv = tuple(inv)

    # -- scalar arithmetic ------------------------------------------------

    def gf_add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def gf_neg(self, a: int) -> int:
        return self._neg[a]

    def gf_mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def gf_inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(q)")
        return self._inv[a]

    def gf_digits(self, a: int) -> tuple[int, ...]:
        return self._int_digits(a, self.c)

    def gf_from_digits(self, ds: Iterable[int]) -> int:
        ds = list(ds)
        if len(ds) != self.c:
            raise ValueError(f"need exactly {self.c} digits")
        n = 0
        for d in reversed(ds):
            n = n * self.p + d % self.p
        return n

    def zeta0(self, a: int) -> int:
        """Coordinate of a on the basis element 1 (used by the character)."""
        return a % self.p

    # -- element constructors ---------------------------------------------

    def element(self, terms: dict[int, int]) -> "FieldElement":
        return FieldElement(self, terms)

    def zero(self) -> "FieldElement":
        return FieldElement(self, {})

    def one(self) -> "FieldElement":
        return FieldElement(self, {0: 1})

    def prime_element(self) -> "FieldElement":
        return FieldElement(self, {1: 1})

    def monomial(self, coeff: int, exponent: int) -> "FieldElement":
        return FieldElement(self, {exponent: coeff})

    # -- plumbing -----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, FieldConfig) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        if self.c == 1:
            return f"FieldConfig(p={self.p})"
        return f"FieldConfig(p={self.p}, c={self.c}, modulus={self.modulus})"


class FieldElement:
    """A finite Laurent series over GF(q); immutable and hashable.

    terms is a tuple of (exponent, coefficient) pairs, sorted by exponent,
    with coefficients in [1, q): zero coefficients are never stored.
    """

    __slots__ = ("cfg", "terms")

    def __init__(self, cfg: FieldConfig, terms: dict[int, int]):
        self.cfg = cfg
        self.terms = tuple(sorted(
            (int(e), int(c)) for e, c in terms.items() if int(c) % cfg.q != 0))
        if any(not 0 < c < cfg.q for _, c in self.terms):
            raise ValueError("coefficients must lie in [0, q)")

    # -- ring structure -----------------------------------------------------

    def _same_field(self, other: "FieldElement") -> None:
        if self.cfg != other.cfg:
            raise ValueError("elements belong to different field configs")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._same_field(other)
        add = self.cfg.gf_add
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = add(acc.get(e, 0), c)
        return FieldElement(self.cfg, acc)

    def __neg__(self) -> "FieldElement":
        neg = self.cfg.gf_neg
        return FieldElement(self.cfg, {e: neg(c) for e, c in self.terms})

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return self + (-other)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._same_field(other)
        add, mul = self.cfg.gf_add, self.cfg.gf_mul
        acc: dict[int, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                acc[e] = add(acc.get(e, 0), mul(c1, c2))
        return FieldElement(self.cfg, acc)

    def scale(self, a: int) -> "FieldElement":
        """Multiply by the GF(q) scalar a."""
        mul = self.cfg.gf_mul
        return FieldElement(self.cfg, {e: mul(a, c) for e, c in self.terms})

    def shift(self, j: int) -> "FieldElement":
        """Multiply by t^j (shift every exponent by j)."""
        return FieldElement(self.cfg, {e + j: c for e, c in self.terms})

    # -- valuation ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def valuation(self) -> int:
        if not self.terms:
            raise ValueError("the zero element has no valuation")
        return self.terms[0][0]

    def norm(self) -> float:
        if not self.terms:
            return 0.0
        return float(self.cfg.q) ** (-self.terms[0][0])

    def coefficient(self, exponent: int) -> int:
        for e, c in self.terms:
            if e == exponent:
                return c
        return 0

    def truncate(self, k: int) -> "FieldElement":
        """Keep exponents < k: the canonical representative mod B^k."""
        return FieldElement(self.cfg, {e: c for e, c in self.terms if e < k})

    def tail(self, k: int) -> "FieldElement":
        """Keep exponents >= k."""
        return FieldElement(self.cfg, {e: c for e, c in self.terms if e >= k})

    # -- plumbing -----------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, FieldElement)
                and self.cfg == other.cfg and self.terms == other.terms)

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"<{self.text()}>"

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms, reverse=True):
            if self.cfg.c == 1:
                coeff = str(c)
            else:
                coeff = "(" + ",".join(str(d) for d in self.cfg.gf_digits(c)) + ")"
            parts.append(f"{coeff}*t^{e}")
        return " + ".join(parts)


# -------------------------------------------------------------- character --

def chi(x: FieldElement) -> complex:
    """Additive character of K: exp(2*pi*i*a/p) with a the zeta_0 coordinate
    of the coefficient at exponent -1. Trivial on D, nontrivial on B^(-1)."""
    return x.cfg.roots[x.cfg.zeta0(x.coefficient(-1))]


def chi_xi(xi: FieldElement, x: FieldElement) -> complex:
    """The modulated character chi_xi(x) = chi(xi * x)."""
    return chi(xi * x)


# ------------------------------------------------------------------ uindex --

def uindex(cfg: FieldConfig, n: int) -> FieldElement:
    """The n-th coset representative of D: base-q digits of n placed at
    exponents -1, -2, ... as GF(q) scalars."""
    if n < 0:
        raise ValueError("uindex is defined on nonnegative integers")
    terms = {}
    e = -1
    while n:
        n, b = divmod(n, cfg.q)
        if b:
            terms[e] = b
        e -= 1
    return FieldElement(cfg, terms)


def uindex_inverse(x: FieldElement) -> int:
    """Recover n from u(n); the element must have exponents < 0 only."""
    if any(e >= 0 for e, _ in x.terms):
        raise ValueError("not a lattice representative: nonnegative exponents")
    n = 0
    for e, c in x.terms:
        n += c * x.cfg.q ** (-e - 1)
    return n


def embed_integer(cfg: FieldConfig, n: int) -> int:
    """n mod p as a scalar of the prime subfield; must be a unit."""
    a = n % cfg.p
    if a == 0:
        raise NonUnitScalar(f"{n} reduces to 0 mod {cfg.p}: not a unit")
    return a


class LambdaIndex(NamedTuple):
    """Index of a translation: the element u(n) + delta * theta."""
    n: int
    delta: int


class SystemConfig:
    """Field, sampling density N, offset index r and normalization mode.

    The dilation is x -> t^(-1) * nu * x with nu a unit scalar, by default
    embed_integer(N). The translation family pairs the lattice {u(n)} with
    the offset branch {u(n) + theta}, theta = u(r) * nu^(-1); for N = 1 only
    the lattice branch exists. In positive characteristic theta always has
    purely negative exponents, so for N > 1 the indexed family is a multiset
    over the lattice; `lambda_degenerate` reports this and downstream checks
    surface it instead of deduplicating.
    """

    __slots__ = ("field", "N", "r", "nu", "normalization", "masks",
                 "shift_set", "theta", "branches")

    def __init__(self, field: FieldConfig, N: int = 1, r: int = 1,
                 dilation_unit: int | None = None,
                 normalization: str = "unitary",
                 masks: tuple = (),
                 shift_set: tuple[FieldElement, ...] = ()):
        if not isinstance(N, int) or N < 1:
            raise ConfigError(f"N must be a positive integer, got {N!r}")
        if not isinstance(r, int) or r % 2 == 0:
            raise ConfigError(f"r must be odd, got {r!r}")
        if not 1 <= r <= field.q * N - 1:
            raise ConfigError(f"r must lie in [1, qN-1] = [1, {field.q * N - 1}]")
        if math.gcd(r, N) != 1:
            raise ConfigError(f"r = {r} must be coprime to N = {N}")
        if normalization not in NORMALIZATIONS:
            raise ConfigError(
                f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
        if dilation_unit is None:
            nu = embed_integer(field, N)
        else:
            nu = int(dilation_unit)
            if not 1 <= nu < field.q:
                raise ConfigError(f"dilation_unit must be a unit of GF({field.q})")
        self.field = field
        self.N = N
        self.r = r
        self.nu = nu
        self.normalization = normalization
        self.masks = tuple(masks)
        self.theta = uindex(field, r).scale(field.gf_inv(nu))
        self.branches = 1 if N == 1 else 2
        if shift_set:
            self.shift_set = tuple(shift_set)
        else:
            inv_nu = field.gf_inv(nu)
            self.shift_set = tuple(
                field.monomial(field.gf_mul(inv_nu, s), 0) if s else field.zero()
                for s in range(field.q))

    # -- derived quantities ---------------------------------------------------

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def qN(self) -> int:
        return self.field.q * self.N

    @property
    def dilation_amplitude(self) -> float:
        if self.normalization == "unitary":
            return math.sqrt(self.q)
        return math.sqrt(self.qN)

    @property
    def mask_norm_const(self) -> float:
        return 1.0 / self.dilation_amplitude

    @property
    def lambda_degenerate(self) -> bool:
        """True when the offset branch folds into the lattice (multiset)."""
        return self.branches == 2 and all(e < 0 for e, _ in self.theta.terms)

    def dilation_arg_factor(self) -> FieldElement:
        """The factor t^(-1) * nu applied to the argument by one dilation."""
        return self.field.monomial(self.nu, -1)

    # -- translation family ---------------------------------------------------

    def lambda_element(self, idx: LambdaIndex) -> FieldElement:
        n, delta = idx
        if n < 0 or delta not in (0, 1):
            raise ValueError(f"bad lambda index {idx!r}")
        if delta and self.N == 1:
            # tolerated on input; enumeration never emits it for N = 1
            pass
        lam = uindex(self.field, n)
        if delta:
            lam = lam + self.theta
        return lam

    def branch_index(self, label: int) -> LambdaIndex:
        """Map an integer translation label to a LambdaIndex."""
        if label < 0:
            raise ValueError("labels are nonnegative")
        if self.N == 1:
            return LambdaIndex(label, 0)
        return LambdaIndex(label // 2, label % 2)

    def coset_label_decompose(self, k: int, j: int) -> tuple[int, int]:
        """Split k = r * (qN)^j + s with 0 <= s < (qN)^j."""
        if k < 0 or j < 0:
            raise ValueError("k and j must be nonnegative")
        return divmod(k, self.qN ** j)

    def with_masks(self, masks: tuple) -> "SystemConfig":
        return SystemConfig(self.field, self.N, self.r, self.nu,
                            self.normalization, tuple(masks), self.shift_set)

    def __repr__(self):
        return (f"SystemConfig(q={self.q}, N={self.N}, r={self.r}, nu={self.nu}, "
                f"normalization={self.normalization!r})")
