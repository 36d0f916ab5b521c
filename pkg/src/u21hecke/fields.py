"""Finite residue fields and torus characters.

The residue tower is k_F = GF(q) inside k_E = GF(q^2), q = p^f with p odd.
Coefficient field for weights is the smallest GF(p^m) containing all
(q^2-1)-th roots of unity; the divisibility scan always lands on m = 2f, so
the coefficient field coincides with k_E and one set of tables serves both.

Elements are table indices (0 = zero, 1 = one); all arithmetic is lookups.
"""

import numpy as np

from .errors import InversionOfZero, NotApplicable

_TOWER_CACHE = {}


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _poly_mulmod(a, b, poly, p):
    """Multiply coefficient tuples mod (poly, p); poly is monic, degree m."""
    m = len(poly) - 1
    res = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                res[i + j] = (res[i + j] + ca * cb) % p
    # reduce by poly (x^m = -(poly[:-1]))
    for i in range(len(res) - 1, m - 1, -1):
        c = res[i]
        if c:
            res[i] = 0
            for j in range(m):
                res[i - m + j] = (res[i - m + j] - c * poly[j]) % p
    res = res[:m] + [0] * max(0, m - len(res))
    return tuple(res[:m])


def _poly_gcd(a, b, p):
    a, b = list(a), list(b)

    def deg(u):
        d = len(u) - 1
        while d >= 0 and u[d] % p == 0:
            d -= 1
        return d

    while deg(b) >= 0:
        da, db = deg(a), deg(b)
        if da < db:
            a, b = b, a
            continue
        inv = pow(b[db], p - 2, p)
        while deg(a) >= db:
            da = deg(a)
            c = a[da] * inv % p
            for j in range(db + 1):
                a[da - db + j] = (a[da - db + j] - c * b[j]) % p
        a, b = b, a
    return a


def _is_irreducible(poly, p):
    """poly = (c0..c_{m-1}) meaning x^m + sum c_k x^k; rabin test."""
    m = len(poly) - 1
    x = tuple([0, 1] + [0] * (m - 2)) if m >= 2 else (poly[0],)
    # compute x^(p^k) by iterated p-th powers
    def frob_iter(u, times):
        for _ in range(times):
            v = (1,) + (0,) * (m - 1)
            # u^p by square-and-multiply on exponent p
            e = p
            base = u
            acc = v
            while e:
                if e & 1:
                    acc = _poly_mulmod(acc, base, poly, p)
                base = _poly_mulmod(base, base, poly, p)
                e >>= 1
            u = acc
        return u

    xq = frob_iter(x, m)
    if xq != x:
        return False
    for r in _prime_factors(m):
        xr = frob_iter(x, m // r)
        diff = [(a - b) % p for a, b in zip(xr, x)]
        if not any(diff):
            return False
        g = _poly_gcd(list(poly), diff, p)
        nz = [i for i, c in enumerate(g) if c % p]
        if nz and max(nz) != 0:
            return False
    return True


def _find_poly(p, m):
    """Deterministic monic irreducible of degree m over GF(p): smallest
    coefficient vector in base-p counting order."""
    if m == 1:
        return (0, 1)
    for code in range(1, p**m):
        coeffs = []
        c = code
        for _ in range(m):
            coeffs.append(c % p)
            c //= p
        poly = tuple(coeffs) + (1,)
        if _is_irreducible(poly, p):
            return poly
    raise NotApplicable("no irreducible polynomial found")


class Tower:
    """Arithmetic tables for k_F < k_E = coefficient field GF(p^m)."""

    def __init__(self, p, f):
        if p < 3 or any(p % r == 0 for r in range(2, int(p**0.5) + 1)):
            raise NotApplicable("p must be an odd prime, got %r" % (p,))
        self.p = p
        self.f = f
        self.q = p**f
        # minimal m with (q^2 - 1) | (p^m - 1)
        m = 1
        while (p**m - 1) % (self.q**2 - 1) != 0:
            m += 1
        self.m = m
        self.Q = p**m  # size of the coefficient field (= q^2)
        if self.Q != self.q**2:
            raise NotApplicable("coefficient field scan did not return GF(q^2)")
        self.poly = _find_poly(p, m)
        self.default_window = 16
        self._build_tables()

    # ---- table construction -------------------------------------------
    def _idx_to_vec(self, i):
        v = []
        for _ in range(self.m):
            v.append(i % self.p)
            i //= self.p
        return tuple(v)

    def _vec_to_idx(self, v):
        i = 0
        for c in reversed(v):
            i = i * self.p + c
        return i

    def _build_tables(self):
        p, m, Q = self.p, self.m, self.Q
        digits = np.zeros((Q, m), dtype=np.int64)
        for i in range(Q):
            digits[i] = self._idx_to_vec(i)
        # addition: digitwise mod p
        summed = (digits[:, None, :] + digits[None, :, :]) % p
        powers = p ** np.arange(m, dtype=np.int64)
        self.add = (summed * powers).sum(axis=2).astype(np.uint16)
        self.neg = ((-digits) % p * powers).sum(axis=1).astype(np.uint16)
        # find a multiplicative generator using scalar poly multiplication
        def mul_scalar(a, b):
            return self._vec_to_idx(
                _poly_mulmod(self._idx_to_vec(a), self._idx_to_vec(b), self.poly, p)
            )

        order = Q - 1
        rs = _prime_factors(order)

        def pow_scalar(a, e):
            acc, base = 1, a
            while e:
                if e & 1:
                    acc = mul_scalar(acc, base)
                base = mul_scalar(base, base)
                e >>= 1
            return acc

        gen = None
        for cand in range(2, Q):
            if all(pow_scalar(cand, order // r) != 1 for r in rs):
                gen = cand
                break
        self.gen = gen
        # exp/log
        self.exp = np.zeros(order, dtype=np.uint16)
        self.log = np.zeros(Q, dtype=np.int64)
        cur = 1
        for k in range(order):
            self.exp[k] = cur
            self.log[cur] = k
            cur = mul_scalar(cur, gen)
        self.log[0] = -1
        # mul/inv/frobenius via logs
        li = self.log[:, None] + self.log[None, :]
        mul = self.exp[np.mod(li, order)]
        mul[0, :] = 0
        mul[:, 0] = 0
        self.mul = mul.astype(np.uint16)
        self.inv = np.zeros(Q, dtype=np.uint16)
        self.inv[1:] = self.exp[np.mod(-self.log[1:], order)]
        self.frob = np.zeros(Q, dtype=np.uint16)  # x -> x^q
        self.frob[1:] = self.exp[np.mod(self.log[1:] * self.q, order)]
        # subfield and special subsets
        self.in_base = self.frob == np.arange(Q)  # k_F = fixed field
        idxs = np.arange(Q)
        self.trace_zero = [int(i) for i in idxs if self.add[i, self.frob[i]] == 0]
        self.norm_one = [
            int(i) for i in idxs[1:] if self.mul[i, self.frob[i]] == 1
        ]
        self.norm_one.sort(key=lambda i: int(np.mod(self.log[i], order)))

    # ---- scalar helpers ------------------------------------------------
    def a(self, i, j):
        return int(self.add[i, j])

    def s(self, i, j):
        return int(self.add[i, self.neg[j]])

    def n(self, i):
        return int(self.neg[i])

    def m_(self, i, j):
        return int(self.mul[i, j])

    def i_(self, i):
        if i == 0:
            raise InversionOfZero("residue-field inverse of 0")
        return int(self.inv[i])

    def c(self, i):
        return int(self.frob[i])

    def elem(self, i, tag="kE"):
        return FFElem(self, int(i), tag)

    def from_int(self, n):
        """Image of the rational integer n (prime-field element)."""
        n %= self.p
        acc = 0
        for _ in range(n):
            acc = self.a(acc, 1)
        return acc

    def trace_zero_unit_idx(self):
        """Smallest-index nonzero element with x + x^q = 0."""
        for i in self.trace_zero:
            if i != 0:
                return i
        raise NotApplicable("no trace-zero unit")

    def __repr__(self):
        return "Tower(p=%d, f=%d, q=%d, Lambda=GF(%d))" % (
            self.p,
            self.f,
            self.q,
            self.Q,
        )


class FFElem:
    """Element of the residue tower; tag records the declared subfield."""

    __slots__ = ("tower", "idx", "tag")

    def __init__(self, tower, idx, tag="kE"):
        if tag == "kF" and not tower.in_base[idx]:
            raise NotApplicable("element is not in k_F")
        self.tower = tower
        self.idx = int(idx)
        self.tag = tag

    def _join(self, other):
        return "kF" if self.tag == other.tag == "kF" else "kE"

    def __add__(self, other):
        return FFElem(self.tower, self.tower.a(self.idx, other.idx), self._join(other))

    def __sub__(self, other):
        return FFElem(self.tower, self.tower.s(self.idx, other.idx), self._join(other))

    def __mul__(self, other):
        return FFElem(self.tower, self.tower.m_(self.idx, other.idx), self._join(other))

    def __neg__(self):
        return FFElem(self.tower, self.tower.n(self.idx), self.tag)

    def inverse(self):
        return FFElem(self.tower, self.tower.i_(self.idx), self.tag)

    def conj(self):
        return FFElem(self.tower, self.tower.c(self.idx), self.tag)

    def __pow__(self, e):
        if self.idx == 0:
            if e <= 0:
                raise InversionOfZero("0**nonpositive")
            return FFElem(self.tower, 0, self.tag)
        t = self.tower
        k = int(np.mod(t.log[self.idx] * e, t.Q - 1))
        return FFElem(t, int(t.exp[k]), self.tag)

    def in_base_field(self):
        return bool(self.tower.in_base[self.idx])

    def __eq__(self, other):
        return isinstance(other, FFElem) and self.idx == other.idx

    def __hash__(self):
        return hash(("FF", self.idx))

    def __repr__(self):
        return "FF(%d)" % self.idx


def build_tower(p, f=1):
    """Residue tower for q = p^f; cached per (p, f)."""
    key = (p, f)
    if key not in _TOWER_CACHE:
        _TOWER_CACHE[key] = Tower(p, f)
    return _TOWER_CACHE[key]


class Character:
    """Character of the finite torus k_E^x × U1(k_E), stored as exponents
    (i mod q^2-1, j mod q+1) against the fixed generator zeta of k_E^x and
    xi = zeta^(q-1) of the norm-one subgroup."""

    __slots__ = ("tower", "i", "j")

    def __init__(self, tower, i, j):
        self.tower = tower
        self.i = int(i) % (tower.Q - 1)
        self.j = int(j) % (tower.q + 1)

    def value(self, a_idx, b_idx):
        """chi(a, b) as a coefficient-field index; a a unit, b norm-one."""
        t = self.tower
        if a_idx == 0:
            raise InversionOfZero("character at a = 0")
        la = int(t.log[a_idx])
        lb = int(t.log[b_idx])
        if b_idx == 0 or lb % (t.q - 1) != 0:
            raise NotApplicable("second coordinate is not norm-one")
        v = lb // (t.q - 1)
        k = (self.i * la + (t.q - 1) * self.j * v) % (t.Q - 1)
        return int(t.exp[k])

    def __mul__(self, other):
        return Character(self.tower, self.i + other.i, self.j + other.j)

    def inverse(self):
        return Character(self.tower, -self.i, -self.j)

    def is_trivial(self):
        return self.i == 0 and self.j == 0

    def det_twist_power(self):
        """k if chi is the k-th determinant twist (i == -k(q-1)), else None."""
        t = self.tower
        k = self.j
        if (self.i + k * (t.q - 1)) % (t.Q - 1) == 0:
            return k
        return None

    def __eq__(self, other):
        return (
            isinstance(other, Character) and self.i == other.i and self.j == other.j
        )

    def __hash__(self):
        return hash(("chi", self.i, self.j))

    def __repr__(self):
        return "Character(i=%d, j=%d)" % (self.i, self.j)


def characters_of_torus(tower, K=None):
    """All characters of the reduced torus, deterministic order."""
    out = []
    for i in range(tower.Q - 1):
        for j in range(tower.q + 1):
            out.append(Character(tower, i, j))
    return out


def char_s(chi, K=None):
    """Conjugate character: the hyperspecial/other involution sends the torus
    element with residues (a, b) to the one with residues (conj(a)^-1, b),
    hence exponents (i, j) -> (-q i, j). Independent of K."""
    return Character(chi.tower, -chi.tower.q * chi.i, chi.j)


def is_regular(chi, K=None):
    return char_s(chi, K) != chi
