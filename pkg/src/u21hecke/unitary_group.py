"""The quasi-split unitary group in three variables over the Laurent field,
preserving the hermitian form with antidiagonal ones.

Group elements are handled in two layers:
  * atoms -- short tuples tagging the standard generators: upper/lower
    unipotents, norm-compatible diagonals, powers of the diagonal shift
    element, and the form matrix itself (an involution in the group);
  * Mat3 matrices -- for products, membership tests and reductions.

Also here: the two standard maximal compact subgroups (stabilizer of the
standard lattice, and of a shifted lattice), reduction to their reductive
quotients over the residue field, the scan that finds the unipotent depth
constants of each compact, and the closed-form exchange identities used to
reorder unipotent products.
"""

from .errors import (
    CrossCheckFailed,
    IndeterminateMembership,
    InsufficientPrecision,
    MembershipViolated,
    NotApplicable,
    RelationViolated,
)
from .laurent import Series
from .mat3 import EXACT_ONE, EXACT_ZERO, Mat3, form_matrix

K0 = "K0"
K1 = "K1"

# Entry-valuation patterns of the two compacts.
_K_PATTERN = {
    K0: ((0, 0, 0), (0, 0, 0), (0, 0, 0)),
    K1: ((0, 0, -1), (1, 0, 0), (1, 1, 0)),
}


# ---------------------------------------------------------------------------
# atoms


def _series(tower, v):
    if isinstance(v, Series):
        return v
    return Series.const(tower, v)


def _check_unipotent_relation(x, y):
    """x*conj(x) + y + conj(y) must not be certified nonzero."""
    r = x * x.conj() + y + y.conj()
    if r.coeffs:
        raise RelationViolated(
            "unipotent parameters violate x*conj(x) + y + conj(y) = 0"
        )
    return r.prec


def atom_n(tower, x, y, check=True):
    """Upper unipotent with rows (1, x, y), (0, 1, -conj(x)), (0, 0, 1)."""
    x, y = _series(tower, x), _series(tower, y)
    if check:
        _check_unipotent_relation(x, y)
    return ("n", x.trip, y.trip)


def atom_np(tower, x, y, check=True):
    """Lower unipotent, mirror image of atom_n."""
    x, y = _series(tower, x), _series(tower, y)
    if check:
        _check_unipotent_relation(x, y)
    return ("np", x.trip, y.trip)


def atom_d(tower, d1, d2, d3, check=True):
    """Diagonal group element diag(d1, d2, d3); needs d3 = conj(d1)^-1 and
    d2 * conj(d2) = 1."""
    d1, d2, d3 = _series(tower, d1), _series(tower, d2), _series(tower, d3)
    if check:
        r1 = d1.conj() * d3 - Series.const(tower, 1)
        r2 = d2 * d2.conj() - Series.const(tower, 1)
        if r1.coeffs or r2.coeffs:
            raise RelationViolated("diagonal entries violate unitarity")
    return ("d", d1.trip, d2.trip, d3.trip)


def atom_h(tower, x):
    """The standard torus element diag(x, -conj(x)/x, conj(x)^-1)."""
    x = _series(tower, x)
    xb = x.conj()
    xinv = x.inverse()
    return ("d", x.trip, (-(xb * xinv)).trip, xb.inverse().trip)


def atom_alpha(e):
    """e-th power of the diagonal shift diag(t^-1, 1, t)."""
    return ("a", int(e))


def atom_beta():
    """The antidiagonal form matrix; an involution in the group."""
    return ("b",)


def atom_identity(tower):
    return ("d", EXACT_ONE, EXACT_ONE, EXACT_ONE)


def atom_is_identity(atom):
    if atom[0] == "d":
        return all(t == EXACT_ONE for t in atom[1:])
    if atom[0] == "a":
        return atom[1] == 0
    if atom[0] in ("n", "np"):
        return atom[1] == EXACT_ZERO and atom[2] == EXACT_ZERO
    return False


def atom_matrix(tower, atom):
    kind = atom[0]
    z, o = EXACT_ZERO, EXACT_ONE
    if kind == "n":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        mxb = (-x.conj()).trip
        return Mat3(tower, (o, atom[1], atom[2], z, o, mxb, z, z, o))
    if kind == "np":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        mxb = (-x.conj()).trip
        return Mat3(tower, (o, z, z, atom[1], o, z, atom[2], mxb, o))
    if kind == "d":
        return Mat3(tower, (atom[1], z, z, z, atom[2], z, z, z, atom[3]))
    if kind == "a":
        e = atom[1]
        te = Series.t_pow(tower, -e).trip
        ti = Series.t_pow(tower, e).trip
        return Mat3(tower, (te, z, z, z, o, z, z, z, ti))
    if kind == "b":
        return form_matrix(tower)
    raise ValueError("unknown atom kind %r" % (kind,))


def atom_inv(tower, atom):
    kind = atom[0]
    if kind == "n":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        return ("n", (-x).trip, y.conj().trip)
    if kind == "np":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        return ("np", (-x).trip, y.conj().trip)
    if kind == "d":
        inv = tuple(Series(tower, t).inverse().trip for t in atom[1:])
        return ("d",) + inv
    if kind == "a":
        return ("a", -atom[1])
    if kind == "b":
        return atom
    raise ValueError("unknown atom kind %r" % (kind,))


def atom_conj_beta(tower, atom):
    """beta * A * beta for an atom A (beta is an involution)."""
    kind = atom[0]
    if kind == "n":
        x = Series(tower, atom[1])
        return ("np", (-x.conj()).trip, atom[2])
    if kind == "np":
        x = Series(tower, atom[1])
        return ("n", (-x.conj()).trip, atom[2])
    if kind == "d":
        return ("d", atom[3], atom[2], atom[1])
    if kind == "a":
        return ("a", -atom[1])
    if kind == "b":
        return ("d", EXACT_ONE, EXACT_ONE, EXACT_ONE)
    raise ValueError("unknown atom kind %r" % (kind,))


def atom_conj_alpha(tower, atom, e):
    """alpha^e * A * alpha^-e for an atom A (never called on the form atom)."""
    if e == 0:
        return atom
    kind = atom[0]
    if kind == "n":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        return ("n", x.shift(-e).trip, y.shift(-2 * e).trip)
    if kind == "np":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        return ("np", x.shift(e).trip, y.shift(2 * e).trip)
    if kind == "d":
        return atom
    if kind == "a":
        return atom
    raise NotApplicable("cannot conjugate atom kind %r by the shift" % kind)


def atom_conj_diag(tower, datom, atom):
    """d * A * d^-1 for a diagonal d and a unipotent or diagonal A."""
    d1, d2, d3 = (Series(tower, t) for t in datom[1:])
    kind = atom[0]
    if kind == "n":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        return ("n", (d1 * x * d2.inverse()).trip, (d1 * y * d3.inverse()).trip)
    if kind == "np":
        x, y = Series(tower, atom[1]), Series(tower, atom[2])
        return (
            "np",
            (d2 * x * d1.inverse()).trip,
            (d3 * y * d1.inverse()).trip,
        )
    if kind == "d":
        return atom
    if kind == "a":
        return atom
    raise NotApplicable("cannot conjugate atom kind %r by a diagonal" % kind)


def merge_atoms(tower, a, b):
    """Product of two adjacent same-kind atoms, or None if not mergeable."""
    ka, kb = a[0], b[0]
    if ka != kb:
        return None
    if ka == "n":
        x1, y1 = Series(tower, a[1]), Series(tower, a[2])
        x2, y2 = Series(tower, b[1]), Series(tower, b[2])
        return ("n", (x1 + x2).trip, (y1 + y2 - x1 * x2.conj()).trip)
    if ka == "np":
        x1, y1 = Series(tower, a[1]), Series(tower, a[2])
        x2, y2 = Series(tower, b[1]), Series(tower, b[2])
        return ("np", (x1 + x2).trip, (y1 + y2 - x2 * x1.conj()).trip)
    if ka == "d":
        out = []
        for i in (1, 2, 3):
            out.append((Series(tower, a[i]) * Series(tower, b[i])).trip)
        return ("d",) + tuple(out)
    if ka == "a":
        return ("a", a[1] + b[1])
    if ka == "b":
        return atom_identity(tower)
    return None


def word_matrix(tower, word):
    m = Mat3.identity(tower)
    for atom in word:
        m = m * atom_matrix(tower, atom)
    return m


def word_inverse(tower, word):
    return tuple(atom_inv(tower, a) for a in reversed(word))


def alpha_pow_matrix(tower, e):
    return atom_matrix(tower, atom_alpha(e))


# ---------------------------------------------------------------------------
# residue quotients of the compacts


class GammaElem:
    """Element of the residue-field quotient of a maximal compact.

    For the standard lattice the quotient is the full unitary group of the
    hermitian form over the quadratic residue extension (a 3x3 matrix of
    residue indices).  For the shifted lattice it is the product of a
    two-variable unitary group (2x2 matrix) with the norm-one circle (one
    scalar)."""

    __slots__ = ("tower", "kind", "m", "s")

    def __init__(self, tower, kind, m, s=None):
        self.tower = tower
        self.kind = kind
        self.m = tuple(m)
        self.s = s

    @classmethod
    def identity(cls, tower, kind):
        if kind == K0:
            return cls(tower, kind, (1, 0, 0, 0, 1, 0, 0, 0, 1))
        return cls(tower, kind, (1, 0, 0, 1), 1)

    def _n(self):
        return 3 if self.kind == K0 else 2

    def __mul__(self, other):
        tw, n = self.tower, self._n()
        a, b = self.m, other.m
        out = []
        for i in range(n):
            for j in range(n):
                acc = 0
                for k in range(n):
                    acc = tw.a(acc, tw.m_(a[i * n + k], b[k * n + j]))
                out.append(acc)
        if self.kind == K0:
            return GammaElem(tw, self.kind, out)
        return GammaElem(tw, self.kind, out, tw.m_(self.s, other.s))

    def inverse(self):
        tw = self.tower
        if self.kind == K0:
            a = self.m
            # J * conj(a)^T * J with J the antidiagonal: reverse both indices.
            out = [
                tw.c(a[(2 - j) * 3 + (2 - i)]) for i in range(3) for j in range(3)
            ]
            return GammaElem(tw, self.kind, out)
        a = self.m
        out = [tw.c(a[3]), tw.c(a[1]), tw.c(a[2]), tw.c(a[0])]
        return GammaElem(tw, self.kind, out, tw.i_(self.s))

    def det(self):
        tw = self.tower
        a = self.m
        if self.kind == K0:
            d = 0
            for (i, j, k), sgn in (
                ((0, 1, 2), 1),
                ((1, 2, 0), 1),
                ((2, 0, 1), 1),
                ((0, 2, 1), -1),
                ((1, 0, 2), -1),
                ((2, 1, 0), -1),
            ):
                term = tw.m_(tw.m_(a[i], a[3 + j]), a[6 + k])
                d = tw.a(d, term if sgn == 1 else tw.n(term))
            return d
        d2 = tw.s(tw.m_(a[0], a[3]), tw.m_(a[1], a[2]))
        return tw.m_(d2, self.s)

    def in_borel(self):
        if self.kind == K0:
            return self.m[3] == 0 and self.m[6] == 0 and self.m[7] == 0
        return self.m[2] == 0

    def in_unipotent(self):
        if not self.in_borel():
            return False
        if self.kind == K0:
            return self.m[0] == 1 and self.m[4] == 1 and self.m[8] == 1
        return self.m[0] == 1 and self.m[3] == 1 and self.s == 1

    def torus_pair(self):
        """(first diagonal residue, circle residue) of a Borel element; the
        pair that torus characters are evaluated on."""
        if not self.in_borel():
            raise NotApplicable("torus data of a non-Borel element")
        if self.kind == K0:
            return (self.m[0], self.m[4])
        return (self.m[0], self.s)

    def is_form_compatible(self):
        """Check the residue unitarity relation."""
        tw = self.tower
        a = self.m
        if self.kind == K0:
            for i in range(3):
                for j in range(3):
                    acc = 0
                    for k in range(3):
                        acc = tw.a(
                            acc, tw.m_(a[k * 3 + i], tw.c(a[(2 - k) * 3 + j]))
                        )
                    want = 1 if i + j == 2 else 0
                    if acc != want:
                        return False
            return True
        for i in range(2):
            for j in range(2):
                acc = 0
                for k in range(2):
                    acc = tw.a(acc, tw.m_(a[k * 2 + i], tw.c(a[(1 - k) * 2 + j])))
                want = 1 if i + j == 1 else 0
                if acc != want:
                    return False
        return tw.m_(self.s, tw.c(self.s)) == 1

    def key(self):
        return (self.kind, self.m, self.s)

    def __eq__(self, other):
        return (
            isinstance(other, GammaElem)
            and self.kind == other.kind
            and self.m == other.m
            and self.s == other.s
        )

    def __hash__(self):
        return hash((self.kind, self.m, self.s))

    def __repr__(self):
        if self.kind == K0:
            return "GammaElem(K0, %r)" % (self.m,)
        return "GammaElem(K1, %r, %r)" % (self.m, self.s)


def in_compact(tower, K, g):
    """Certified entry-pattern membership in the compact K.

    For matrices assembled from group atoms this is equivalent to lattice
    stabilization; the reduction below re-checks residue unitarity."""
    from .mat3 import decide_entry_val_ge

    return decide_entry_val_ge(g, _K_PATTERN[K])


def reduce_to_gamma(tower, K, g, check=True):
    """Reduce a compact element to the residue quotient."""
    if not in_compact(tower, K, g):
        raise MembershipViolated("matrix is not in the compact %s" % K)
    if K == K0:
        m = tuple(g.entry(i, j).coeff_at(0) for i in range(3) for j in range(3))
        gamma = GammaElem(tower, K0, m)
    else:
        m = (
            g.entry(0, 0).coeff_at(0),
            g.entry(0, 2).coeff_at(-1),
            g.entry(2, 0).coeff_at(1),
            g.entry(2, 2).coeff_at(0),
        )
        gamma = GammaElem(tower, K1, m, g.entry(1, 1).coeff_at(0))
    if check and not gamma.is_form_compatible():
        raise MembershipViolated("reduction is not residue-unitary")
    return gamma


def in_iwahori_unipotent(tower, K, g):
    """Membership in the pro-unipotent radical: in K with unipotent image."""
    try:
        ok = in_compact(tower, K, g)
    except IndeterminateMembership:
        raise
    if not ok:
        return False
    return reduce_to_gamma(tower, K, g).in_unipotent()


# ---------------------------------------------------------------------------
# filtration layers of the unipotent subgroups


def layer_coords(tower, k):
    """Deterministic coordinate list for the k-th filtration layer of the
    upper unipotent subgroup: pairs (x, y0) of residue indices with
    x * conj(x) + y0 + conj(y0) = 0 when k is even (y0 may be zero only with
    x = 0), and (0, y0) with y0 of trace zero when k is odd."""
    tw = tower
    if k % 2 == 0:
        out = []
        for xi in range(tw.Q):
            c = tw.n(tw.m_(xi, tw.c(xi)))
            for ti in range(tw.Q):
                if tw.a(ti, tw.c(ti)) == c:
                    out.append((xi, ti))
        return out
    return [(0, ti) for ti in tw.trace_zero]


def layer_atom(tower, k, coords, prime=False):
    """Exact-constant representative of a filtration-layer coset."""
    xi, ti = coords
    if k % 2 == 0:
        x = Series.from_coeffs(tower, k // 2, (xi,)) if xi else Series.zero(tower)
    else:
        if xi:
            raise NotApplicable("odd layers carry no x coordinate")
        x = Series.zero(tower)
    y = Series.from_coeffs(tower, k, (ti,)) if ti else Series.zero(tower)
    if prime:
        return atom_np(tower, x, y)
    return atom_n(tower, x, y)


def layer_size(tower, k):
    return tower.q ** 3 if k % 2 == 0 else tower.q


def layer_transversal(tower, k, prime=False):
    """Coset representatives of the k-th layer modulo the (k+1)-st."""
    return [layer_atom(tower, k, c, prime) for c in layer_coords(tower, k)]


# ---------------------------------------------------------------------------
# depth constants of the compacts


def _layer_inside(tower, K, k, prime, pro_unipotent):
    for atom in layer_transversal(tower, k, prime):
        g = atom_matrix(tower, atom)
        try:
            ok = (
                in_iwahori_unipotent(tower, K, g)
                if pro_unipotent
                else in_compact(tower, K, g)
            )
        except MembershipViolated:
            ok = False
        if not ok:
            return False
    return True


def iwahori_constants(tower, K):
    """Scan for the unipotent depth constants of the compact.

    Returns (n_K, m_K, t_K): the least k with the whole upper filtration
    group at depth k inside K (equivalently inside its pro-unipotent
    radical), the least k with the lower filtration group at depth k inside
    the pro-unipotent radical, and the residue size exponent of the
    depth-n_K upper layer."""
    cache = getattr(tower, "_iwahori_cache", None)
    if cache is None:
        cache = tower._iwahori_cache = {}
    if K in cache:
        return cache[K]
    lo, hi = -4, 5

    def scan(prime, pro_unipotent):
        best = None
        for k in range(hi, lo - 1, -1):
            if _layer_inside(tower, K, k, prime, pro_unipotent):
                best = k
            else:
                break
        if best is None:
            raise MembershipViolated("no unipotent layer inside %s" % K)
        return best

    n_K = scan(False, False)
    m_K = scan(True, True)
    t_K = 3 if n_K % 2 == 0 else 1
    cache[K] = (n_K, m_K, t_K)
    return cache[K]


# ---------------------------------------------------------------------------
# structural identities


def beta_compact_word(K):
    """Word of the distinguished form involution lying inside the compact.

    The antidiagonal involution itself stabilizes the standard lattice; the
    shifted lattice contains its product with the inverse diagonal shift
    (also an involution)."""
    if K == K0:
        return (atom_beta(),)
    return (atom_beta(), atom_alpha(-1))


def beta_times_n(tower, x, y):
    """Factor beta * n(x, y), y invertible, as n * h * np.

    Returns the three atoms (upper, diagonal, lower); the product of the
    returned word equals beta * n(x, y)."""
    x, y = _series(tower, x), _series(tower, y)
    yi = y.inverse()
    ybi = y.conj().inverse()
    n1 = atom_n(tower, ybi * x, yi)
    h = atom_h(tower, ybi)
    np1 = atom_np(tower, -(ybi * x.conj()), yi)
    return (n1, h, np1)


def np_factorization(tower, x, y):
    """Factor np(x, y), y invertible, as n * h * np * beta.

    Returns the first three atoms; the caller appends the form atom."""
    x, y = _series(tower, x), _series(tower, y)
    yi = y.inverse()
    ybi = y.conj().inverse()
    n1 = atom_n(tower, -(ybi * x.conj()), yi)
    h = atom_h(tower, ybi)
    np1 = atom_np(tower, ybi * x, yi)
    return (n1, h, np1)


def exchange(tower, uprime, u, verify=True):
    """Rewrite np(x, y) * n(x1, y1) as n * d * np.

    Closed form; requires the correction terms 1 + x*x1 + conj(y*y1) to be
    invertible (automatic when the product lands in the pro-unipotent
    radical).  Returns (n-atom, d-atom, np-atom)."""
    if uprime[0] != "np" or u[0] != "n":
        raise NotApplicable("exchange wants a lower then an upper unipotent")
    x, y = Series(tower, uprime[1]), Series(tower, uprime[2])
    x1, y1 = Series(tower, u[1]), Series(tower, u[2])
    one = Series.const(tower, 1)
    d1 = one + x * x1 + (y * y1).conj()
    d2 = d1.conj()
    from .errors import InversionOfZero

    try:
        d1i = d1.inverse()
        d2i = d2.inverse()
    except (InversionOfZero, InsufficientPrecision):
        raise NotApplicable("exchange correction is not invertible")
    n_new = atom_n(tower, (x1 - x.conj() * y1.conj()) * d1i, y1 * d2i)
    d_new = atom_d(tower, d1i, d1 * d2i, d2)
    np_new = atom_np(tower, (x - (x1 * y).conj()) * d1i, y * d2i)
    if verify:
        lhs = atom_matrix(tower, uprime) * atom_matrix(tower, u)
        rhs = (
            atom_matrix(tower, n_new)
            * atom_matrix(tower, d_new)
            * atom_matrix(tower, np_new)
        )
        if (lhs - rhs).decide_zero(1) is False:
            raise CrossCheckFailed("exchange closed form failed to reassemble")
    return (n_new, d_new, np_new)


def exchange2(tower, u, uprime, verify=True):
    """Rewrite n(x1, y1) * np(x, y) as np * d * n (mirror of exchange)."""
    a, h, b = exchange(
        tower,
        atom_inv(tower, uprime),
        atom_inv(tower, u),
        verify=verify,
    )
    return (
        atom_inv(tower, b),
        atom_inv(tower, h),
        atom_inv(tower, a),
    )


def torus_unit_atoms(tower):
    """Transversal of the unit torus modulo its pro-p part: one diagonal
    atom diag(a, c, conj(a)^-1) per residue pair (a, c) with a invertible
    and c of norm one."""
    out = []
    for a in range(1, tower.Q):
        ainv_bar = tower.c(tower.i_(a))
        for c in tower.norm_one:
            out.append(
                atom_d(
                    tower,
                    Series.const(tower, a),
                    Series.const(tower, c),
                    Series.const(tower, ainv_bar),
                )
            )
    return out
