"""Cubic surfaces encoding norm-trace curve intersections.

Two affine cubics are built from a coefficient tuple (A, B, C, D) over
F_{q^3}:

  * the rational model over F_q, whose coefficients are traces and norms
    of alpha-power multiples of A, B, C, D (build_s1);
  * the sparse model over F_{q^3} in which the same surface reads
    X0 X1 X2 = A X0^3 + A^q X1^3 + A^{q^2} X2^3 + ... + E (build_s2).

The invertible linear map given by the conjugate matrix of alpha carries
one onto the other (apply_psi), so F_q-points of the first correspond to
conjugate-triple points of the second.

Classification walks a fixed decision tree: linear factor (reducible),
cone, more-than-four singular points (non-isolated), then the isolated
pattern of field-of-definition degrees.  Singular points are located by
exhaustive search over the extensions of degree 1..4 of the coefficient
field, solving the formal gradient system; formal derivatives make the
characteristic 2 and 3 degenerations automatic.  All searches are
affine; points at infinity enter only through the cone vertex scan and
the dedicated at-infinity system check.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import TooLarge
from .gf import Element, FieldTower, Level, extension_field

# canonical monomial order: all (i, j, k) with i + j + k <= 3
MONOMIALS: tuple[tuple[int, int, int], ...] = tuple(
    (i, j, k) for i in range(4) for j in range(4 - i) for k in range(4 - i - j)
)
MONOMIAL_INDEX = {m: n for n, m in enumerate(MONOMIALS)}

SEARCH_SPACE_LIMIT = 2**28  # cap on (field size)^3 for point searches

# verdicts
REDUCIBLE = "reducible"
CONE_SMOOTH = "cone_over_smooth_cubic"
CONE_SINGULAR = "cone_over_singular_cubic"
NON_ISOLATED = "non_isolated_not_cone"
ISOLATED = "isolated"
SMOOTH = "smooth"


@dataclass(frozen=True)
class CubicForm:
    """An affine cubic in three variables over `field` (total degree 3)."""

    field: object
    coeffs: tuple[int, ...]

    def coefficient(self, i: int, j: int, k: int) -> int:
        return self.coeffs[MONOMIAL_INDEX[(i, j, k)]]

    @property
    def coeff_map(self) -> dict[tuple[int, int, int], int]:
        return {m: c for m, c in zip(MONOMIALS, self.coeffs) if c}

    def evaluate(self, x0: int, x1: int, x2: int, F=None) -> int:
        """Value at a point; F may be any extension of the coefficient field."""
        F = F or self.field
        acc = 0
        for (i, j, k), c in zip(MONOMIALS, self.coeffs):
            if c == 0:
                continue
            term = c
            for v, e in ((x0, i), (x1, j), (x2, k)):
                for _ in range(e):
                    term = F.mul(term, v)
            acc = F.add(acc, term)
        return acc

    def cubic_part(self) -> "CubicForm":
        """The degree-3 homogeneous part, as a form of its own."""
        coeffs = tuple(
            c if sum(m) == 3 else 0 for m, c in zip(MONOMIALS, self.coeffs)
        )
        return CubicForm(self.field, coeffs)


def make_form(field, mapping: dict[tuple[int, int, int], int]) -> CubicForm:
    """Build a CubicForm from an exponent->coefficient map, checking degree."""
    coeffs = [0] * len(MONOMIALS)
    for m, c in mapping.items():
        coeffs[MONOMIAL_INDEX[m]] = c
    if not any(coeffs[MONOMIAL_INDEX[m]] for m in MONOMIALS if sum(m) == 3):
        raise ValueError("total degree must be exactly 3")
    return CubicForm(field, tuple(coeffs))


# ---------------------------------------------------------------------------
# construction of the two surface models
# ---------------------------------------------------------------------------

def _s1_constants(tower: FieldTower) -> dict:
    cache = getattr(tower, "_s1_constants", None)
    if cache is not None:
        return cache
    F3 = tower.Fq3
    Fq = tower.Fq
    a = tower.alpha
    q = tower.q

    def apow(e: int) -> int:
        return F3.pow(a, e)

    tr = tower.trace_table
    nalpha = tower.norm_table[a]
    three = Fq.from_int(3)
    two = Fq.from_int(2)
    talpha3 = tr[apow(3)]
    c111 = Fq.neg(Fq.add(Fq.mul(three, nalpha), talpha3))
    cache = {
        "nalpha": nalpha,
        "tq2": tr[apow(q + 2)],
        "t2q1": tr[apow(2 * q + 1)],
        "c111": c111,
        "two": two,
        "three": three,
        # multipliers m with coefficient contribution T(A * m), in the
        # monomial order of _S1_A_MONOMIALS below
        "A_mults": [
            apow(3), apow(3 * q), apow(3 * q * q),
            apow(q + 2), apow(q * q + 2), apow(q * q + 2 * q),
            apow(1 + 2 * q), apow(1 + 2 * q * q), apow(q + 2 * q * q),
        ],
        "B_mults": [
            apow(2), apow(2 * q), apow(2 * q * q),
            apow(q + 1), apow(q * q + 1), apow(q * q + q),
        ],
    }
    tower._s1_constants = cache
    return cache


_S1_A_MONOMIALS = (
    (3, 0, 0), (0, 3, 0), (0, 0, 3),
    (2, 1, 0), (2, 0, 1), (0, 2, 1),
    (1, 2, 0), (1, 0, 2), (0, 1, 2),
)
_S1_B_MONOMIALS = ((2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1))


def s1_coefficients(tower: FieldTower, a: int, b: int, c: int, d: int) -> list[int]:
    """Coefficient vector of the rational surface model, F_q encodings.

    Inputs are F_{q^3} encodings of (A, B, C, D).  The coefficient of
    every monomial is a trace or norm of the inputs against fixed powers
    of alpha, so the result lives in F_q by construction.
    """
    k = _s1_constants(tower)
    F3, Fq, tr = tower.Fq3, tower.Fq, tower.trace_table
    mulq3 = F3.mul
    three, two = k["three"], k["two"]
    out = [0] * len(MONOMIALS)

    # degree-3 terms: the norm form is subtracted from the cubic trace form
    am = k["A_mults"]
    nalpha, tq2, t2q1 = k["nalpha"], k["tq2"], k["t2q1"]
    for n, m in enumerate(_S1_A_MONOMIALS):
        ta = tr[mulq3(a, am[n])]
        if n < 3:
            v = Fq.sub(ta, nalpha)
        else:
            base = tq2 if m in ((2, 1, 0), (0, 2, 1), (1, 0, 2)) else t2q1
            v = Fq.sub(Fq.mul(three, ta), base)
        out[MONOMIAL_INDEX[m]] = v
    out[MONOMIAL_INDEX[(1, 1, 1)]] = k["c111"]

    bm = k["B_mults"]
    for n, m in enumerate(_S1_B_MONOMIALS):
        tb = tr[mulq3(b, bm[n])]
        out[MONOMIAL_INDEX[m]] = tb if n < 3 else Fq.mul(two, tb)

    alpha = tower.alpha
    cq = tower.frob_table[c]
    cq2 = tower.frob_table[cq]
    out[MONOMIAL_INDEX[(1, 0, 0)]] = tr[mulq3(alpha, c)]
    out[MONOMIAL_INDEX[(0, 1, 0)]] = tr[mulq3(alpha, cq2)]
    out[MONOMIAL_INDEX[(0, 0, 1)]] = tr[mulq3(alpha, cq)]
    out[MONOMIAL_INDEX[(0, 0, 0)]] = tower.trace_table[d]
    return out


def _codes(tower: FieldTower, *xs) -> list[int]:
    out = []
    for x in xs:
        if isinstance(x, Element):
            out.append(tower._require(x, Level.CUBIC))
        else:
            out.append(int(x))
    return out


def build_s1(tower: FieldTower, A, B, C, D) -> CubicForm:
    """Rational model over F_q of the intersection surface for (A,B,C,D)."""
    a, b, c, d = _codes(tower, A, B, C, D)
    return CubicForm(tower.Fq, tuple(s1_coefficients(tower, a, b, c, d)))


def build_s2(tower: FieldTower, A, B, C, D) -> CubicForm:
    """Sparse model over F_{q^3}; the constant term is E = T(D)."""
    a, b, c, d = _codes(tower, A, B, C, D)
    F3 = tower.Fq3
    frob = tower.frob_table
    e = tower.trace_table[d]  # embeds as a constant encoding
    mapping = {
        (3, 0, 0): a, (0, 3, 0): frob[a], (0, 0, 3): frob[frob[a]],
        (2, 0, 0): b, (0, 2, 0): frob[b], (0, 0, 2): frob[frob[b]],
        (1, 0, 0): c, (0, 1, 0): frob[c], (0, 0, 1): frob[frob[c]],
        (1, 1, 1): F3.neg(1),
        (0, 0, 0): e,
    }
    return make_form(F3, mapping)


def apply_psi(tower: FieldTower, point: tuple[int, int, int]) -> tuple[int, int, int]:
    """The conjugate-matrix change of variables, F_q triples to F_{q^3}.

    The image of a rational triple is (beta, beta^q, beta^{q^2}) where
    beta is the normal-basis combination of the triple.
    """
    x0, x1, x2 = point
    F3 = tower.Fq3
    a0, a1, a2 = tower.alpha_conjugates

    def dot(m0, m1, m2):
        return F3.add(F3.mul(x0, m0), F3.add(F3.mul(x1, m1), F3.mul(x2, m2)))

    return (dot(a0, a1, a2), dot(a1, a2, a0), dot(a2, a0, a1))


def substitution_expansion(tower: FieldTower, A, B, C, D) -> CubicForm:
    """The same rational surface, derived by direct polynomial expansion.

    Substitutes the normal-basis combination into the curve equation and
    expands over F_{q^3}; used as an independent cross-check of the
    trace-formula construction (the two must agree coefficient by
    coefficient after embedding).
    """
    a, b, c, d = _codes(tower, A, B, C, D)
    F3 = tower.Fq3
    frob = tower.frob_table
    a0, a1, a2 = tower.alpha_conjugates

    # beta_r = row r of the conjugate matrix as a linear form in (x0,x1,x2)
    rows = [(a0, a1, a2), (a1, a2, a0), (a2, a0, a1)]

    def lin(row):
        return {(1, 0, 0): row[0], (0, 1, 0): row[1], (0, 0, 1): row[2]}

    def pmul(fa, fb):
        out: dict[tuple[int, int, int], int] = {}
        for ma, ca in fa.items():
            if ca == 0:
                continue
            for mb, cb in fb.items():
                if cb == 0:
                    continue
                m = (ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2])
                out[m] = F3.add(out.get(m, 0), F3.mul(ca, cb))
        return out

    def padd(fa, fb):
        out = dict(fa)
        for m, cc in fb.items():
            out[m] = F3.add(out.get(m, 0), cc)
        return out

    def pscale(fa, s):
        return {m: F3.mul(s, cc) for m, cc in fa.items()}

    l0, l1, l2 = (lin(r) for r in rows)
    norm_form = pmul(pmul(l0, l1), l2)
    acc: dict[tuple[int, int, int], int] = {m: F3.neg(cc) for m, cc in norm_form.items()}
    coefs3 = (a, frob[a], frob[frob[a]])
    coefs2 = (b, frob[b], frob[frob[b]])
    coefs1 = (c, frob[c], frob[frob[c]])
    for ln, c3, c2, c1 in zip((l0, l1, l2), coefs3, coefs2, coefs1):
        sq = pmul(ln, ln)
        acc = padd(acc, pscale(pmul(sq, ln), c3))
        acc = padd(acc, pscale(sq, c2))
        acc = padd(acc, pscale(ln, c1))
    acc = padd(acc, {(0, 0, 0): tower.trace_table[d]})
    coeffs = [0] * len(MONOMIALS)
    for m, cc in acc.items():
        coeffs[MONOMIAL_INDEX[m]] = cc
    return CubicForm(F3, tuple(coeffs))


# ---------------------------------------------------------------------------
# point counting
# ---------------------------------------------------------------------------

def _check_search_size(field, degree: int) -> None:
    if (field.size**degree) ** 3 > SEARCH_SPACE_LIMIT:
        raise TooLarge(
            f"search over the degree-{degree} extension of a size-{field.size} "
            f"field exceeds the {SEARCH_SPACE_LIMIT} point budget"
        )


def rational_points_at_infinity(form: CubicForm) -> int:
    """Projective rational points of the surface on the plane at infinity.

    These are the zeros of the cubic part in the projective plane over
    the coefficient field; adding them to the affine count gives the
    projective point count.
    """
    F = form.field
    cubic = form.cubic_part()
    s = F.size
    reps = [(1, a, b) for a in range(s) for b in range(s)]
    reps += [(0, 1, b) for b in range(s)]
    reps.append((0, 0, 1))
    return sum(1 for pt in reps if cubic.evaluate(*pt, F) == 0)


def projective_count(form: CubicForm) -> int:
    """Rational points of the projective closure over the coefficient field."""
    return count_points(form, 1) + rational_points_at_infinity(form)


def count_points(form: CubicForm, field_degree: int = 1) -> int:
    """Number of affine zeros with coordinates in the degree-d extension."""
    _check_search_size(form.field, field_degree)
    F = extension_field(form.field, field_degree)
    F.build_tables()
    s = F.size
    add, mul = F.add, F.mul
    c = form.coeffs
    count = 0
    for x0 in range(s):
        # reduce to a bivariate in (x1, x2) for this x0
        x0sq = mul(x0, x0)
        x0cu = mul(x0sq, x0)
        g = {}
        for (i, j, k), cc in zip(MONOMIALS, c):
            if cc == 0:
                continue
            w = cc if i == 0 else mul(cc, (x0, x0sq, x0cu)[i - 1])
            g[(j, k)] = add(g.get((j, k), 0), w)
        for x1 in range(s):
            x1sq = mul(x1, x1)
            x1cu = mul(x1sq, x1)
            u0 = u1 = u2 = u3 = 0
            for (j, k), cc in g.items():
                if cc == 0:
                    continue
                w = cc if j == 0 else mul(cc, (x1, x1sq, x1cu)[j - 1])
                if k == 0:
                    u0 = add(u0, w)
                elif k == 1:
                    u1 = add(u1, w)
                elif k == 2:
                    u2 = add(u2, w)
                else:
                    u3 = add(u3, w)
            for x2 in range(s):
                if add(u0, mul(x2, add(u1, mul(x2, add(u2, mul(x2, u3)))))) == 0:
                    count += 1
    return count


# ---------------------------------------------------------------------------
# singular locus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularLocus:
    """Affine singular points grouped by field-of-definition degree.

    Each entry is ((x0, x1, x2), d) with coordinates encoded in the
    degree-d extension of the form's coefficient field; Frobenius orbits
    are always complete.  `exceeded` is set as soon as more than four
    distinct points have been seen, signalling non-isolated singularities.
    """

    points: tuple[tuple[tuple[int, int, int], int], ...]
    exceeded: bool
    searched_degrees: tuple[int, ...]

    def rational_points(self) -> list[tuple[int, int, int]]:
        return [p for p, d in self.points if d == 1]

    @property
    def delta(self) -> int:
        return len(self.points)

    def pattern(self) -> tuple[int, ...]:
        return tuple(sorted(d for _, d in self.points))


def _solve_singular_system(form: CubicForm, F, hit, x0_values=None) -> bool:
    """Find all solutions of {f = 0, grad f = 0} with coordinates in F.

    Fixes (x0, x1) and solves the first partial-derivative equation that
    is not identically zero in x2 (a quadratic, linear, or constant
    constraint), then verifies the remaining equations.  Calls hit(x0,
    x1, x2) for every solution; a False return aborts the whole search.
    Returns False if aborted.

    x0_values restricts the outer loop; passing Frobenius orbit
    representatives finds at least one member of every conjugate orbit
    of solutions, since the solution set of a system with coefficients
    fixed by Frobenius is Frobenius-stable.
    """
    F.build_tables()
    s = F.size
    mt, at_, nt, it_ = F._mul_table, F._add_table, F._neg_table, F._inv_table
    if F._roots2_table is None:
        from .gf import _fill_roots2

        _fill_roots2(F)
    r2t = F._roots2_table
    c = form.coeffs
    ix = MONOMIAL_INDEX
    c000, c100, c200, c300 = c[ix[0, 0, 0]], c[ix[1, 0, 0]], c[ix[2, 0, 0]], c[ix[3, 0, 0]]
    c010, c110, c210 = c[ix[0, 1, 0]], c[ix[1, 1, 0]], c[ix[2, 1, 0]]
    c020, c120, c030 = c[ix[0, 2, 0]], c[ix[1, 2, 0]], c[ix[0, 3, 0]]
    c001, c101, c201 = c[ix[0, 0, 1]], c[ix[1, 0, 1]], c[ix[2, 0, 1]]
    c011, c111, c021 = c[ix[0, 1, 1]], c[ix[1, 1, 1]], c[ix[0, 2, 1]]
    c002, c102, c012 = c[ix[0, 0, 2]], c[ix[1, 0, 2]], c[ix[0, 1, 2]]
    c003 = c[ix[0, 0, 3]]
    two = F.from_int(2)
    three = F.from_int(3)
    # x2^2 coefficients of the three partials (constants over the field)
    r0 = c102
    r1 = c012
    r2 = mt[three * s + c003]
    two_c201 = mt[two * s + c201]
    two_c021 = mt[two * s + c021]
    two_c200 = mt[two * s + c200]
    three_c300 = mt[three * s + c300]
    two_c210 = mt[two * s + c210]
    two_c020 = mt[two * s + c020]
    two_c120 = mt[two * s + c120]
    three_c030 = mt[three * s + c030]

    if x0_values is None:
        x0_values = range(s)
    for x0 in x0_values:
        x0sq = mt[x0 * s + x0]
        # univariate-in-x1 coefficients of everything we may need
        b0_0 = at_[c101 * s + mt[two_c201 * s + x0]]      # B0 = b0_0 + c111 x1
        a0_0 = at_[c100 * s + at_[mt[two_c200 * s + x0] * s + mt[three_c300 * s + x0sq]]]
        a0_1 = at_[c110 * s + mt[two_c210 * s + x0]]      # A0 = a0_0 + a0_1 x1 + c120 x1^2
        b1_0 = at_[c011 * s + mt[c111 * s + x0]]          # B1 = b1_0 + 2 c021 x1
        a1_0 = at_[c010 * s + at_[mt[c110 * s + x0] * s + mt[c210 * s + x0sq]]]
        a1_1 = at_[two_c020 * s + mt[two_c120 * s + x0]]  # A1 = a1_0 + a1_1 x1 + 3 c030 x1^2
        f1_0 = at_[c001 * s + at_[mt[c101 * s + x0] * s + mt[c201 * s + x0sq]]]
        f1_1 = at_[c011 * s + mt[c111 * s + x0]]          # F1 = f1_0 + f1_1 x1 + c021 x1^2
        f2_0 = at_[c002 * s + mt[c102 * s + x0]]          # F2 = f2_0 + c012 x1
        f0_0 = at_[c000 * s + at_[mt[c100 * s + x0] * s + at_[mt[c200 * s + x0sq] * s + mt[mt[c300 * s + x0sq] * s + x0]]]]
        f0_1 = at_[c010 * s + at_[mt[c110 * s + x0] * s + mt[c210 * s + x0sq]]]
        f0_2 = at_[c020 * s + mt[c120 * s + x0]]
        # F0 = f0_0 + f0_1 x1 + f0_2 x1^2 + c030 x1^3
        for x1 in range(s):
            x1sq = mt[x1 * s + x1]
            # partial in x2 direction: A2 + B2 x2 + r2 x2^2, with A2 = F1, B2 = 2 F2
            f2v = at_[f2_0 * s + mt[c012 * s + x1]]
            f1v = at_[f1_0 * s + at_[mt[f1_1 * s + x1] * s + mt[c021 * s + x1sq]]]
            a2v = f1v
            b2v = at_[f2v * s + f2v]
            a0v = a1v = None
            # solve the first non-degenerate partial for x2
            if r2 or b2v:
                if r2:
                    m = it_[r2]
                    cands = r2t[mt[b2v * s + m] * s + mt[a2v * s + m]]
                else:
                    cands = (mt[nt[a2v] * s + it_[b2v]],)
            elif a2v:
                continue
            else:
                a0v = at_[a0_0 * s + at_[mt[a0_1 * s + x1] * s + mt[c120 * s + x1sq]]]
                b0v = at_[b0_0 * s + mt[c111 * s + x1]]
                if r0 or b0v:
                    if r0:
                        m = it_[r0]
                        cands = r2t[mt[b0v * s + m] * s + mt[a0v * s + m]]
                    else:
                        cands = (mt[nt[a0v] * s + it_[b0v]],)
                elif a0v:
                    continue
                else:
                    a1v = at_[a1_0 * s + at_[mt[a1_1 * s + x1] * s + mt[three_c030 * s + x1sq]]]
                    b1v = at_[b1_0 * s + mt[two_c021 * s + x1]]
                    if r1 or b1v:
                        if r1:
                            m = it_[r1]
                            cands = r2t[mt[b1v * s + m] * s + mt[a1v * s + m]]
                        else:
                            cands = (mt[nt[a1v] * s + it_[b1v]],)
                    elif a1v:
                        continue
                    else:
                        # all three partials vanish identically in x2
                        cands = range(s)
            if not cands:
                continue
            if a0v is None:
                a0v = at_[a0_0 * s + at_[mt[a0_1 * s + x1] * s + mt[c120 * s + x1sq]]]
                b0v = at_[b0_0 * s + mt[c111 * s + x1]]
            if a1v is None:
                a1v = at_[a1_0 * s + at_[mt[a1_1 * s + x1] * s + mt[three_c030 * s + x1sq]]]
                b1v = at_[b1_0 * s + mt[two_c021 * s + x1]]
            f0v = at_[f0_0 * s + at_[mt[f0_1 * s + x1] * s + at_[mt[f0_2 * s + x1sq] * s + mt[mt[c030 * s + x1sq] * s + x1]]]]
            for x2 in cands:
                # verify the two remaining partials and the form itself
                if at_[a0v * s + mt[x2 * s + at_[b0v * s + mt[r0 * s + x2]]]]:
                    continue
                if at_[a1v * s + mt[x2 * s + at_[b1v * s + mt[r1 * s + x2]]]]:
                    continue
                if at_[a2v * s + mt[x2 * s + at_[b2v * s + mt[r2 * s + x2]]]]:
                    continue
                if at_[f0v * s + mt[x2 * s + at_[f1v * s + mt[x2 * s + at_[f2v * s + mt[c003 * s + x2]]]]]]:
                    continue
                if not hit(x0, x1, x2):
                    return False
    return True


def _frobenius_orbit_reps(F) -> list[int]:
    """Smallest member of each orbit of the relative Frobenius on F."""
    reps = getattr(F, "_frob_orbit_reps", None)
    if reps is not None:
        return reps
    frob = F.base_frob_table()
    reps = []
    for x in range(F.size):
        y = frob[x]
        smallest = True
        while y != x:
            if y < x:
                smallest = False
                break
            y = frob[y]
        if smallest:
            reps.append(x)
    F._frob_orbit_reps = reps
    return reps


def singular_locus(form: CubicForm, max_degree: int = 4,
                   skip_degree4_when_found: bool = False) -> SingularLocus:
    """Affine singular points over extensions of degree 1..max_degree.

    Searches each degree exhaustively, records every point with its
    exact field-of-definition degree, and short-circuits with
    exceeded=True as soon as more than four distinct points are known.
    Degrees whose search space exceeds the point budget raise TooLarge.

    The degree-d sweep walks x0 over Frobenius orbit representatives
    only and completes each hit to its full conjugate orbit, which is
    exhaustive because the solution set is Frobenius-stable.

    skip_degree4_when_found skips the degree-4 sweep when lower-degree
    points were already found: a degree-4 orbit adds four points at
    once, so it can only coexist with other singular points on surfaces
    that are already past the four-point limit, and those reveal
    themselves at lower degrees through their rational double line.
    """
    found: list[tuple[tuple[int, int, int], int]] = []
    exceeded = False
    searched: list[int] = []
    base = form.field
    for d in range(1, max_degree + 1):
        if exceeded:
            break
        if d == 4 and skip_degree4_when_found and found:
            break
        _check_search_size(base, d)
        F = extension_field(base, d)
        if d == 1:
            frob, x0_values = None, None
        else:
            frob = F.base_frob_table()
            x0_values = _frobenius_orbit_reps(F)
        seen: set[tuple[int, int, int]] = set()
        state = {"stop": False}

        def hit(x0, x1, x2, _d=d, _frob=frob):
            p = (x0, x1, x2)
            if p in seen:
                return True
            orbit = [p]
            if _frob is not None:
                cur = (_frob[x0], _frob[x1], _frob[x2])
                while cur != p:
                    orbit.append(cur)
                    cur = (_frob[cur[0]], _frob[cur[1]], _frob[cur[2]])
            seen.update(orbit)
            if len(orbit) != _d:
                return True  # already recorded during a lower-degree sweep
            found.extend((pt, _d) for pt in orbit)
            if len(found) > 4:
                state["stop"] = True
                return False
            return True

        completed = _solve_singular_system(form, F, hit, x0_values)
        searched.append(d)
        if state["stop"] and not completed:
            exceeded = True
    return SingularLocus(tuple(found), exceeded, tuple(searched))


# ---------------------------------------------------------------------------
# linear factors
# ---------------------------------------------------------------------------

def _hom_coeffs(form: CubicForm) -> dict[tuple[int, int, int, int], int]:
    out = {}
    for (i, j, k), c in zip(MONOMIALS, form.coeffs):
        if c:
            out[(i, j, k, 3 - i - j - k)] = c
    return out


def _hom_eval(hom, F, pt) -> int:
    acc = 0
    for e, c in hom.items():
        term = c
        for v, d in zip(pt, e):
            for _ in range(d):
                term = F.mul(term, v)
        acc = F.add(acc, term)
    return acc


def _substitute_plane(hom, F, lead: int, tail: dict[int, int]) -> bool:
    """True iff the plane x_lead + sum tail[v] x_v divides the cubic.

    Substitutes x_lead = -(sum tail[v] x_v) and checks that the result
    is identically zero.
    """
    out: dict[tuple[int, ...], int] = {}
    for e, c in hom.items():
        # expand (-(sum m_v x_v))^e_lead
        terms = [({}, c)]
        for _ in range(e[lead]):
            nxt = []
            for mono, coef in terms:
                for v, mv in tail.items():
                    if mv == 0:
                        continue
                    m2 = dict(mono)
                    m2[v] = m2.get(v, 0) + 1
                    nxt.append((m2, F.mul(coef, F.neg(mv))))
            terms = nxt
        for mono, coef in terms:
            key = list(e)
            key[lead] = 0
            for v, dd in mono.items():
                key[v] += dd
            key_t = tuple(key)
            out[key_t] = F.add(out.get(key_t, 0), coef)
    return all(v == 0 for v in out.values())


def _univ_coeffs(hom, F, lead: int, var: int) -> list[int] | None:
    """Coefficients of u -> hom at x_lead = -u, x_var = 1, rest 0.

    Returns None when the polynomial is identically zero (then the
    corresponding plane coefficient is unconstrained).
    """
    cs = [0, 0, 0, 0]
    for e, c in hom.items():
        ok = True
        for v in range(4):
            if v not in (lead, var) and e[v]:
                ok = False
                break
        if ok:
            cs[e[lead]] = F.add(cs[e[lead]], c if e[lead] % 2 == 0 else F.neg(c))
    if cs[0] == cs[1] == cs[2] == cs[3] == 0:
        return None
    return cs


def _scan_roots(cs: list[int], F) -> list[int]:
    F.build_tables()
    s, mt, at_ = F.size, F._mul_table, F._add_table
    c0, c1, c2, c3 = cs
    roots = []
    for u in range(s):
        acc = at_[mt[at_[mt[at_[mt[c3 * s + u] * s + c2] * s + u] * s + c1] * s + u] * s + c0]
        if acc == 0:
            roots.append(u)
    return roots


def _plane_probably_divides(hom, F, lead: int, tail: dict[int, int]) -> bool:
    """Cheap necessary test: the form vanishes at a few points of the plane.

    Points are chosen with two of the free coordinates set to 1 and the
    lead coordinate solved from the plane equation; false candidates
    are almost always rejected by the first evaluation.
    """
    free = [v for v in range(4) if v != lead]
    probes = []
    for na in range(len(free)):
        for nb in range(na, len(free)):
            pt = [0, 0, 0, 0]
            pt[free[na]] = 1
            pt[free[nb]] = 1
            acc = 0
            for v, m in tail.items():
                if pt[v]:
                    acc = F.add(acc, m)
            pt[lead] = F.neg(acc)
            probes.append(pt)
    for pt in probes:
        if _hom_eval(hom, F, pt) != 0:
            return False
    return True


def linear_factor(form: CubicForm, max_field_degree: int = 3):
    """A linear form dividing the homogenized cubic, or None.

    Any linear component of a cubic is defined over an extension of
    degree at most 3 (component orbits under Frobenius have size <= 3),
    so searching degrees 1..3 decides absolute reducibility.  Returns
    (field_degree, (l0, l1, l2, l3)) with the leading coefficient
    normalized to 1, or None.
    """
    hom = _hom_coeffs(form)
    base = form.field
    # base-field coefficient lists are reused across search degrees
    cs_cache = {
        (lead, var): _univ_coeffs(hom, base, lead, var)
        for lead in range(3)
        for var in range(lead + 1, 4)
    }
    for deg in range(1, max_field_degree + 1):
        F = extension_field(form.field, deg)
        # leading variable 3 alone would need a zero cubic part
        for lead in range(3):
            free = list(range(lead + 1, 4))
            stack = [()]
            for var in free:
                cs = cs_cache[(lead, var)]
                cands = range(F.size) if cs is None else _scan_roots(cs, F)
                if not cands:
                    stack = []
                    break
                stack = [t + (m,) for t in stack for m in cands]
            for tail_vals in stack:
                tail = dict(zip(free, tail_vals))
                if not _plane_probably_divides(hom, F, lead, tail):
                    continue
                if _substitute_plane(hom, F, lead, tail):
                    vec = [0, 0, 0, 0]
                    vec[lead] = 1
                    for v, m in tail.items():
                        vec[v] = m
                    return (deg, tuple(vec))
    return None


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------

def _binomial(n: int, k: int) -> int:
    from math import comb

    return comb(n, k)


def _is_cone_vertex(hom, F, P: tuple[int, int, int, int]) -> bool:
    """True iff the surface is a union of lines through P.

    Expands the form at X + t P; the form is translation invariant along
    P exactly when the t and t^2 coefficient forms vanish identically
    and P itself lies on the surface, which is the cone condition in
    every characteristic.
    """
    t1: dict[tuple[int, ...], int] = {}
    t2: dict[tuple[int, ...], int] = {}
    t3 = 0
    for e, c in hom.items():
        # distribute the t-degree among the four binomial expansions
        stack = [((0, 0, 0, 0), 0, c, 0)]
        expanded = []
        for v in range(4):
            nxt = []
            for key, tdeg, coef, _ in stack:
                ev = e[v]
                pv = P[v]
                for i in range(ev + 1):
                    if i and pv == 0:
                        break
                    w = coef
                    if i:
                        w = F.mul(w, F.from_int(_binomial(ev, i)))
                        for _ in range(i):
                            w = F.mul(w, pv)
                    k2 = list(key)
                    k2[v] = ev - i
                    nxt.append((tuple(k2), tdeg + i, w, 0))
            stack = nxt
        expanded = stack
        for key, tdeg, coef, _ in expanded:
            if tdeg == 0 or coef == 0:
                continue
            if tdeg == 1:
                t1[key] = F.add(t1.get(key, 0), coef)
            elif tdeg == 2:
                t2[key] = F.add(t2.get(key, 0), coef)
            else:
                t3 = F.add(t3, coef)
    return t3 == 0 and all(v == 0 for v in t1.values()) and all(v == 0 for v in t2.values())


def infinity_singular_points(form: CubicForm, max_degree: int = 1):
    """Projective singular points on the plane at infinity, by degree.

    A point [X0:X1:X2:0] is singular when the cubic part and its
    gradient vanish there together with the quadratic part (the
    x3-partial).  Returns a list of (degree, (X0, X1, X2)) pairs with
    coordinates in the degree-d extension, one entry per projective
    point; degrees whose scan would exceed the table budget are skipped.
    """
    base = form.field
    cubic = form.cubic_part()
    polys = [cubic] + [_formal_partial(cubic, v) for v in range(3)]
    vecs = [p.coeffs for p in polys]
    quad_vec = [0] * len(MONOMIALS)
    for m, c in form.coeff_map.items():
        if sum(m) == 2:
            quad_vec[MONOMIAL_INDEX[m]] = c
    vecs.append(tuple(quad_vec))
    active = [[(MONOMIALS[n], c) for n, c in enumerate(vec) if c] for vec in vecs]
    out = []
    for d in range(1, max_degree + 1):
        F = extension_field(base, d)
        if F.size > 1024:
            break
        F.build_tables()
        s, mt, at_ = F.size, F._mul_table, F._add_table
        frob = F.base_frob_table() if d > 1 else None
        powers: list = [None] * s

        def pows(x):
            p = powers[x]
            if p is None:
                x2 = mt[x * s + x]
                p = (1, x, x2, mt[x2 * s + x])
                powers[x] = p
            return p

        reps = [(1, x1, x2) for x1 in range(s) for x2 in range(s)]
        reps += [(0, 1, x2) for x2 in range(s)]
        reps.append((0, 0, 1))
        for pt in reps:
            p0, p1, p2 = pows(pt[0]), pows(pt[1]), pows(pt[2])
            good = True
            for act in active:
                acc = 0
                for (i, j, k), c in act:
                    acc = at_[acc * s + mt[mt[mt[c * s + p0[i]] * s + p1[j]] * s + p2[k]]]
                if acc:
                    good = False
                    break
            if not good:
                continue
            if d == 1:
                out.append((1, pt))
                continue
            # projective degree: orbit size of the normalized representative
            def norm(p):
                nz = next(x for x in p if x)
                if nz == 1:
                    return p
                inv = F._inv_table[nz]
                return tuple(mt[inv * s + x] for x in p)

            deg, cur = 1, norm(tuple(frob[x] for x in pt))
            while cur != pt:
                deg += 1
                cur = norm(tuple(frob[x] for x in cur))
            if deg == d:
                out.append((d, pt))
    return out


def _infinity_rational_singulars(form: CubicForm) -> list[tuple[int, int, int, int]]:
    """Rational singular points at infinity, as homogeneous 4-tuples."""
    return [(pt[0], pt[1], pt[2], 0) for _, pt in infinity_singular_points(form, 1)]


def _formal_partial(form: CubicForm, v: int) -> CubicForm:
    F = form.field
    out = [0] * len(MONOMIALS)
    for (i, j, k), c in zip(MONOMIALS, form.coeffs):
        if c == 0:
            continue
        e = (i, j, k)[v]
        if e == 0:
            continue
        m = list((i, j, k))
        m[v] -= 1
        out[MONOMIAL_INDEX[tuple(m)]] = F.add(
            out[MONOMIAL_INDEX[tuple(m)]], F.mul(F.from_int(e), c)
        )
    return CubicForm(F, tuple(out))


def _base_curve_is_smooth(hom, F, P, max_degree: int = 3) -> bool:
    """Smoothness of the cone's base cubic, cut by a plane avoiding P.

    The section by any plane not through the vertex is a copy of the
    base curve.  Uses the coordinate plane x_v = 0 for the first v with
    P_v != 0, and scans its projective plane over extensions of degree
    up to 3 for points where the curve and all its partials vanish.
    """
    v_out = next(v for v in range(4) if P[v] != 0)
    keep = [v for v in range(4) if v != v_out]
    # base curve in the three variables `keep`
    curve: dict[tuple[int, int, int], int] = {}
    for e, c in hom.items():
        if e[v_out]:
            continue
        m = tuple(e[v] for v in keep)
        curve[m] = F.add(curve.get(m, 0), c)

    def partial(var):
        out = {}
        for m, c in curve.items():
            if m[var] == 0:
                continue
            mm = list(m)
            mm[var] -= 1
            key = tuple(mm)
            out[key] = F.add(out.get(key, 0), F.mul(F.from_int(m[var]), c))
        return out

    parts = [partial(v) for v in range(3)]

    def ev(poly, K, pt):
        acc = 0
        for m, c in poly.items():
            term = c
            for vv, e in zip(pt, m):
                for _ in range(e):
                    term = K.mul(term, vv)
            acc = K.add(acc, term)
        return acc

    for d in range(1, max_degree + 1):
        K = extension_field(F, d)
        if K.size**2 > 2**22:
            break
        reps = [(1, a, b) for a in range(K.size) for b in range(K.size)]
        reps += [(0, 1, b) for b in range(K.size)]
        reps.append((0, 0, 1))
        for pt in reps:
            if ev(curve, K, pt) != 0:
                continue
            if all(ev(pp, K, pt) == 0 for pp in parts):
                return False
    return True


def cone_test(form: CubicForm, locus: SingularLocus):
    """Vertex of a cone structure, or None.

    Candidate vertices are the rational singular points (affine, from
    the locus, and at infinity): the vertex of an irreducible cone is
    the unique point of its apex locus, hence Frobenius-fixed.  Returns
    (vertex, base_is_smooth) with the vertex in homogeneous coordinates.
    """
    F = form.field
    hom = _hom_coeffs(form)
    candidates = [(p[0], p[1], p[2], 1) for p in locus.rational_points()]
    candidates += _infinity_rational_singulars(form)
    for P in candidates:
        if _is_cone_vertex(hom, F, P):
            return P, _base_curve_is_smooth(hom, F, P)
    return None


# ---------------------------------------------------------------------------
# the at-infinity system and classification
# ---------------------------------------------------------------------------

def singular_at_infinity(form: CubicForm, max_degree: int = 4) -> bool:
    """Nonzero solution of the top-part singular system over small extensions.

    The system couples the gradient of the cubic part with the cubic
    part itself; a surface of the sparse shape has such a solution
    exactly when its projective closure could carry singular points at
    infinity.  Searches extensions of the coefficient field of degree
    up to max_degree, skipping degrees whose tables would exceed the
    budget (the budget covers every in-scope tower).
    """
    cubic = form.cubic_part()
    base = form.field
    for d in range(1, max_degree + 1):
        F = extension_field(base, d)
        if F.size > 1024:
            break
        state = {"found": False}

        def hit(x0, x1, x2):
            if (x0, x1, x2) != (0, 0, 0):
                state["found"] = True
                return False
            return True

        _solve_singular_system(cubic, F, hit)
        if state["found"]:
            return True
    return False


@dataclass(frozen=True)
class SurfaceClass:
    """Classification verdict for one cubic surface."""

    verdict: str
    delta: int | None = None
    pattern: tuple[int, ...] | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "delta": self.delta,
            "pattern": list(self.pattern) if self.pattern is not None else None,
            "detail": self.detail,
        }


def classify(form: CubicForm, skip_degree4_when_found: bool = True) -> SurfaceClass:
    """Full decision tree: reducible, cone, non-isolated, isolated, smooth."""
    lf = linear_factor(form)
    if lf is not None:
        deg, vec = lf
        return SurfaceClass(REDUCIBLE, detail=f"factor deg {deg}: {vec}")
    locus = singular_locus(form, skip_degree4_when_found=skip_degree4_when_found)
    cone = cone_test(form, locus)
    if cone is not None:
        vertex, base_smooth = cone
        verdict = CONE_SMOOTH if base_smooth else CONE_SINGULAR
        return SurfaceClass(verdict, detail=f"vertex {vertex}")
    if locus.exceeded:
        detail = ""
        rats = locus.rational_points()
        if len(rats) >= 2:
            detail = f"double line through {rats[0]} and {rats[1]}"
        else:
            detail = "line not located over the base field"
        return SurfaceClass(NON_ISOLATED, detail=detail)
    if not locus.points:
        return SurfaceClass(SMOOTH, delta=0, pattern=())
    return SurfaceClass(ISOLATED, delta=locus.delta, pattern=locus.pattern())
