"""Exact arithmetic in the tower F_p < F_q < F_{q^3} (q = p^h).

Field elements are plain integers, the *canonical encoding*:

  * an element of F_p is its residue in [0, p);
  * an element of an extension of degree d over a base field of size s is
    the polynomial c_0 + c_1 t + ... + c_{d-1} t^{d-1} encoded as the
    integer  enc(c_0) + enc(c_1) s + ... + enc(c_{d-1}) s^{d-1}, i.e.
    little-endian digits with the constant term least significant.

The encoding is a bijection between [0, size) and the field, and a base
field element c embeds into any extension as the constant polynomial,
whose encoding is again c.  All arithmetic routines take and return
encodings; the small `Element` wrapper only carries the tower level so
that level misuse is caught at the API boundary.

Defining moduli are deterministic: the monic irreducible polynomial of
the required degree whose canonical encoding (leading coefficient
excluded) is smallest.  The normal-basis generator alpha is the element
of smallest encoding whose conjugate triple is linearly independent.
Inverses are computed as x^(size-2); at the sizes this package allows
(p^{3h} <= 2^24) there is no need for extended gcd.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .errors import NotPrime, TooLarge, WrongLevel

# Flat add/mul tables are built lazily for fields up to this size; the
# largest field any in-budget search touches is F_1024.
_TABLE_LIMIT = 1024

TOWER_SIZE_LIMIT = 2**24


class Level(Enum):
    PRIME = "prime"
    BASE = "base"
    CUBIC = "cubic"


@dataclass(frozen=True)
class Element:
    """A field element tagged with its tower level."""

    level: Level
    code: int


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class PrimeField:
    """F_p with residue arithmetic."""

    def __init__(self, p: int):
        self.p = p
        self.char = p
        self.size = p
        self._mul_table: list[int] | None = None
        self._add_table: list[int] | None = None
        self._inv_table: list[int] | None = None
        self._neg_table: list[int] | None = None
        self._roots2_table: list[tuple[int, ...]] | None = None

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.p)

    def elements(self) -> range:
        return range(self.p)

    def from_int(self, n: int) -> int:
        return n % self.p

    def build_tables(self) -> None:
        if self._mul_table is not None:
            return
        p = self.p
        self._neg_table = [(-a) % p for a in range(p)]
        self._add_table = [(a + b) % p for a in range(p) for b in range(p)]
        self._mul_table = [(a * b) % p for a in range(p) for b in range(p)]
        self._inv_table = [0] + [pow(a, p - 2, p) for a in range(1, p)]

    def monic_quadratic_roots(self, b: int, c: int) -> tuple[int, ...]:
        t = self._roots2_table
        if t is None:
            t = _fill_roots2(self)
        return t[b * self.p + c]

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


def _fill_roots2(field) -> list[tuple[int, ...]]:
    """Root table for monic quadratics x^2 + b x + c over `field`."""
    s = field.size
    table: list[tuple[int, ...]] = [()] * (s * s)
    for r in range(s):
        for rp in range(r, s):
            b = field.neg(field.add(r, rp))
            c = field.mul(r, rp)
            table[b * s + c] = (r,) if r == rp else (r, rp)
    field._roots2_table = table
    return table


def poly_mul(base, fa: list[int], fb: list[int]) -> list[int]:
    """Product of coefficient lists over `base` (little-endian, no padding)."""
    if not fa or not fb:
        return []
    out = [0] * (len(fa) + len(fb) - 1)
    for i, a in enumerate(fa):
        if a == 0:
            continue
        for j, b in enumerate(fb):
            if b:
                out[i + j] = base.add(out[i + j], base.mul(a, b))
    return out


def poly_divmod(base, num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Quotient and remainder of coefficient lists over `base`."""
    num = list(num)
    dn = len(den) - 1
    while den and den[-1] == 0:
        den = den[:-1]
        dn -= 1
    if dn < 0:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = base.inv(den[-1])
    quot = [0] * max(0, len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        if c == 0:
            continue
        f = base.mul(c, inv_lead)
        quot[i - dn] = f
        for j, d in enumerate(den):
            num[i - dn + j] = base.sub(num[i - dn + j], base.mul(f, d))
    rem = num[:dn]
    while rem and rem[-1] == 0:
        rem.pop()
    return quot, rem


def _poly_is_zero(c: list[int]) -> bool:
    return all(v == 0 for v in c)


def poly_is_irreducible(base, coeffs: list[int]) -> bool:
    """Irreducibility of a monic polynomial over `base`.

    Trial division by every monic polynomial of degree up to deg/2; a
    reducible polynomial always has such a factor.  Fine at desk scale.
    """
    deg = len(coeffs) - 1
    if deg <= 0:
        return False
    if deg == 1:
        return True
    s = base.size
    for d in range(1, deg // 2 + 1):
        for enc in range(s**d):
            den = _decode_poly(enc, s, d) + [1]
            _, rem = poly_divmod(base, coeffs, den)
            if not rem:
                return False
    return True


def _decode_poly(enc: int, s: int, length: int) -> list[int]:
    digits = []
    for _ in range(length):
        digits.append(enc % s)
        enc //= s
    return digits


def smallest_irreducible(base, degree: int) -> tuple[int, ...]:
    """Monic irreducible of given degree over `base` with smallest encoding."""
    s = base.size
    for enc in range(s**degree):
        coeffs = _decode_poly(enc, s, degree) + [1]
        if poly_is_irreducible(base, coeffs):
            return tuple(coeffs)
    raise RuntimeError("no irreducible polynomial found")  # unreachable


class ExtField:
    """Extension of `base` by a monic irreducible modulus.

    Elements are encodings as described in the module docstring.  Small
    fields get flat add/mul tables on first use; the generic polynomial
    path is kept for everything else.
    """

    def __init__(self, base, modulus: tuple[int, ...]):
        self.base = base
        self.modulus = tuple(modulus)
        self.degree = len(modulus) - 1
        self.size = base.size**self.degree
        self.char = base.char
        # reduction table: t^(degree+i) as a digit vector, i = 0..degree-2
        red = []
        top = [base.neg(c) for c in modulus[:-1]]
        cur = list(top)
        for _ in range(self.degree - 1):
            red.append(list(cur))
            cur = [0] + cur
            if len(cur) > self.degree:
                lead = cur.pop()
                if lead:
                    cur = [base.add(c, base.mul(lead, t)) for c, t in zip(cur, top)]
        self._reduction = red
        self._mul_table: list[int] | None = None
        self._add_table: list[int] | None = None
        self._inv_table: list[int] | None = None
        self._neg_table: list[int] | None = None
        self._roots2_table: list[tuple[int, ...]] | None = None

    # -- encoding helpers -------------------------------------------------
    def decode(self, a: int) -> list[int]:
        return _decode_poly(a, self.base.size, self.degree)

    def encode(self, digits: list[int]) -> int:
        out = 0
        for d in reversed(digits):
            out = out * self.base.size + d
        return out

    # -- arithmetic -------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        t = self._add_table
        if t is not None:
            return t[a * self.size + b]
        return self._add_raw(a, b)

    def _add_raw(self, a: int, b: int) -> int:
        da, db = self.decode(a), self.decode(b)
        return self.encode([self.base.add(x, y) for x, y in zip(da, db)])

    def neg(self, a: int) -> int:
        t = self._neg_table
        if t is not None:
            return t[a]
        return self.encode([self.base.neg(x) for x in self.decode(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        t = self._mul_table
        if t is not None:
            return t[a * self.size + b]
        return self._mul_raw(a, b)

    def _mul_raw(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        prod = poly_mul(self.base, self.decode(a), self.decode(b))
        d = self.degree
        digits = prod[:d] + [0] * max(0, d - len(prod))
        for i, c in enumerate(prod[d:]):
            if c:
                row = self._reduction[i]
                digits = [self.base.add(x, self.base.mul(c, r)) for x, r in zip(digits, row)]
        return self.encode(digits)

    def pow(self, a: int, e: int) -> int:
        out = 1
        b = a
        while e:
            if e & 1:
                out = self.mul(out, b)
            b = self.mul(b, b)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        t = self._inv_table
        if t is not None:
            return t[a]
        return self.pow(a, self.size - 2)

    def elements(self) -> range:
        return range(self.size)

    def from_int(self, n: int) -> int:
        # n * 1 lies in the prime field, whose encodings are residues
        return n % self.char

    # -- lazy tables --------------------------------------------------------
    def build_tables(self) -> None:
        """Materialize flat op tables (sizes up to _TABLE_LIMIT only)."""
        if self._mul_table is not None or self.size > _TABLE_LIMIT:
            return
        s = self.size
        self._neg_table = [self.encode([self.base.neg(x) for x in self.decode(a)]) for a in range(s)]
        add_t = [0] * (s * s)
        for a in range(s):
            row = a * s
            for b in range(a, s):
                v = self._add_raw(a, b)
                add_t[row + b] = v
                add_t[b * s + a] = v
        self._add_table = add_t
        mul_t = [0] * (s * s)
        for a in range(1, s):
            row = a * s
            for b in range(a, s):
                v = self._mul_raw(a, b)
                mul_t[row + b] = v
                mul_t[b * s + a] = v
        self._mul_table = mul_t
        self._inv_table = [0] + [self.pow(a, s - 2) for a in range(1, s)]

    def monic_quadratic_roots(self, b: int, c: int) -> tuple[int, ...]:
        """Roots of x^2 + b x + c, as a tuple (possibly empty)."""
        t = self._roots2_table
        if t is None:
            t = _fill_roots2(self)
        return t[b * self.size + c]

    def base_frob_table(self) -> list[int]:
        """x -> x^(base size), the relative Frobenius over the base field."""
        t = getattr(self, "_base_frob_table", None)
        if t is None:
            t = [self.pow(x, self.base.size) for x in range(self.size)]
            self._base_frob_table = t
        return t

    def __repr__(self) -> str:
        return f"ExtField(base={self.base!r}, degree={self.degree})"


def extension_field(base, degree: int):
    """Degree-d extension of `base` with the deterministic modulus (cached)."""
    if degree == 1:
        return base
    cache = getattr(base, "_extensions", None)
    if cache is None:
        cache = base._extensions = {}
    ext = cache.get(degree)
    if ext is None:
        mod = smallest_irreducible(base, degree)
        ext = ExtField(base, mod)
        ext.build_tables()
        cache[degree] = ext
    return ext


class FieldTower:
    """The tower F_p < F_q < F_{q^3} with norm, trace, and a normal basis.

    Immutable after construction; every method is a pure function of its
    inputs, so a tower can be shared freely across worker processes.
    """

    def __init__(self, p: int, h: int):
        if not _is_prime(p):
            raise NotPrime(f"p={p} is not prime")
        if h < 1:
            raise ValueError("h must be positive")
        if p ** (3 * h) > TOWER_SIZE_LIMIT:
            raise TooLarge(f"p^(3h) = {p}^{3*h} exceeds {TOWER_SIZE_LIMIT}")
        self.p = p
        self.h = h
        self.q = p**h
        self.Fp = PrimeField(p)
        if h == 1:
            self.Fq = self.Fp
            self.modulus1: tuple[int, ...] | None = None
        else:
            self.modulus1 = smallest_irreducible(self.Fp, h)
            self.Fq = ExtField(self.Fp, self.modulus1)
            self.Fq.build_tables()
        self.modulus2 = smallest_irreducible(self.Fq, 3)
        self.Fq3 = ExtField(self.Fq, self.modulus2)
        self.Fq3.build_tables()
        self.size3 = self.Fq3.size

        F3 = self.Fq3
        self.frob_table = [F3.pow(x, self.q) for x in range(self.size3)]
        self.trace_table = [0] * self.size3
        self.norm_table = [0] * self.size3
        for x in range(self.size3):
            xq = self.frob_table[x]
            xq2 = self.frob_table[xq]
            t = F3.add(x, F3.add(xq, xq2))
            n = F3.mul(x, F3.mul(xq, xq2))
            td, nd = F3.decode(t), F3.decode(n)
            assert td[1] == td[2] == 0 and nd[1] == nd[2] == 0
            self.trace_table[x] = td[0]
            self.norm_table[x] = nd[0]

        self.alpha = self._find_normal_alpha()
        a = self.alpha
        self.alpha_conjugates = (a, self.frob_table[a], self.frob_table[self.frob_table[a]])
        self._nb_matrix = [self.Fq3.decode(c) for c in self.alpha_conjugates]  # columns
        self._nb_inverse = self._invert_nb_matrix()

    # -- construction helpers ---------------------------------------------
    def _conjugate_matrix_rank(self, x: int) -> int:
        """Rank over F_q of the coordinate matrix of {x, x^q, x^{q^2}}."""
        rows = []
        v = x
        for _ in range(3):
            rows.append(self.Fq3.decode(v))
            v = self.frob_table[v]
        return _rank3(self.Fq, rows)

    def _find_normal_alpha(self) -> int:
        for x in range(self.size3):
            if self._conjugate_matrix_rank(x) == 3:
                return x
        raise RuntimeError("no normal basis generator found")  # unreachable

    def _invert_nb_matrix(self) -> list[list[int]]:
        # invert the 3x3 matrix whose columns are the polynomial-basis
        # coordinates of alpha, alpha^q, alpha^{q^2}
        F = self.Fq
        m = [[self._nb_matrix[j][i] for j in range(3)] for i in range(3)]
        aug = [m[i] + [1 if i == j else 0 for j in range(3)] for i in range(3)]
        for col in range(3):
            piv = next(r for r in range(col, 3) if aug[r][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            f = F.inv(aug[col][col])
            aug[col] = [F.mul(f, v) for v in aug[col]]
            for r in range(3):
                if r != col and aug[r][col] != 0:
                    c = aug[r][col]
                    aug[r] = [F.sub(v, F.mul(c, w)) for v, w in zip(aug[r], aug[col])]
        return [row[3:] for row in aug]

    # -- element API --------------------------------------------------------
    def element(self, level: Level, code: int) -> Element:
        size = {Level.PRIME: self.p, Level.BASE: self.q, Level.CUBIC: self.size3}[level]
        if not 0 <= code < size:
            raise ValueError(f"encoding {code} out of range for {level}")
        return Element(level, code)

    def _require(self, x: Element, level: Level) -> int:
        if x.level is not level:
            raise WrongLevel(f"expected {level.value} element, got {x.level.value}")
        return x.code

    def embed_base(self, x: Element) -> Element:
        """F_q -> F_{q^3} as constant polynomials (identity on encodings)."""
        code = self._require(x, Level.BASE)
        return Element(Level.CUBIC, code)

    def project_to_base(self, x: Element) -> Element:
        code = self._require(x, Level.CUBIC)
        digits = self.Fq3.decode(code)
        if digits[1] or digits[2]:
            raise WrongLevel("element does not lie in the base field")
        return Element(Level.BASE, digits[0])

    def trace(self, x: Element) -> Element:
        """x + x^q + x^{q^2}, landing in F_q."""
        return Element(Level.BASE, self.trace_table[self._require(x, Level.CUBIC)])

    def norm(self, x: Element) -> Element:
        """x^(q^2+q+1), landing in F_q."""
        return Element(Level.BASE, self.norm_table[self._require(x, Level.CUBIC)])

    def frobenius(self, x: Element, k: int) -> Element:
        """x^(q^k) for k >= 0."""
        code = self._require(x, Level.CUBIC)
        if k < 0:
            raise ValueError("k must be nonnegative")
        for _ in range(k % 3):
            code = self.frob_table[code]
        return Element(Level.CUBIC, code)

    def coords_on_normal_basis(self, x: Element) -> tuple[Element, Element, Element]:
        """The unique (x0, x1, x2) with x = x0 a + x1 a^q + x2 a^{q^2}."""
        code = self._require(x, Level.CUBIC)
        c0, c1, c2 = self.nb_coords(code)
        return (Element(Level.BASE, c0), Element(Level.BASE, c1), Element(Level.BASE, c2))

    def from_normal_coords(self, coords: tuple[Element, Element, Element]) -> Element:
        parts = [self._require(c, Level.BASE) for c in coords]
        return Element(Level.CUBIC, self.nb_combine(*parts))

    # -- raw (encoding-level) helpers used by the other modules -------------
    def t_frob(self, code: int, k: int = 1) -> int:
        for _ in range(k % 3):
            code = self.frob_table[code]
        return code

    def nb_coords(self, code: int) -> tuple[int, int, int]:
        F = self.Fq
        digits = self.Fq3.decode(code)
        inv = self._nb_inverse
        out = []
        for row in inv:
            acc = 0
            for c, d in zip(row, digits):
                acc = F.add(acc, F.mul(c, d))
            out.append(acc)
        return tuple(out)

    def nb_combine(self, c0: int, c1: int, c2: int) -> int:
        F3 = self.Fq3
        a0, a1, a2 = self.alpha_conjugates
        return F3.add(F3.mul(c0, a0), F3.add(F3.mul(c1, a1), F3.mul(c2, a2)))

    def identity_dict(self) -> dict:
        """Serializable tower identity (moduli as coefficient lists)."""
        return {
            "p": self.p,
            "h": self.h,
            "q": self.q,
            "modulus1": list(self.modulus1) if self.modulus1 else None,
            "modulus2": list(self.modulus2),
            "alpha": self.alpha,
        }

    def identity_json(self) -> str:
        return json.dumps(self.identity_dict(), sort_keys=True)

    def __repr__(self) -> str:
        return f"FieldTower(p={self.p}, h={self.h})"


def _rank3(F, rows: list[list[int]]) -> int:
    """Rank of a small matrix over the field F (Gaussian elimination)."""
    mat = [list(r) for r in rows]
    rank = 0
    ncols = len(mat[0])
    for col in range(ncols):
        piv = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        f = F.inv(mat[rank][col])
        mat[rank] = [F.mul(f, v) for v in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                c = mat[r][col]
                mat[r] = [F.sub(v, F.mul(c, w)) for v, w in zip(mat[r], mat[rank])]
        rank += 1
    return rank


@lru_cache(maxsize=None)
def build_tower(p: int, h: int) -> FieldTower:
    """Construct (and cache) the tower for q = p^h.

    Raises NotPrime for composite p and TooLarge when p^{3h} > 2^24.
    """
    return FieldTower(p, h)


def tower_for_q(q: int) -> FieldTower:
    """Resolve q to (p, h) and build the tower; q must be a prime power."""
    p = 2
    while p * p <= q and q % p != 0:
        p += 1
    if q % p != 0:
        p = q
    h = 0
    n = q
    while n % p == 0:
        n //= p
        h += 1
    if n != 1:
        raise NotPrime(f"q={q} is not a prime power")
    return build_tower(p, h)
