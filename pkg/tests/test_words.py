"""Normal forms u * shift^T * k and coset tags."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from u21hecke.fields import build_tower
from u21hecke.laurent import Series
from u21hecke.mat3 import Mat3
from u21hecke.unitary_group import (
    atom_alpha,
    atom_beta,
    atom_d,
    atom_matrix,
    atom_n,
    atom_np,
    iwahori_constants,
    layer_atom,
    layer_coords,
    torus_unit_atoms,
    word_inverse,
    word_matrix,
)
from u21hecke.words import (
    nf_kau,
    nf_uak,
    sort_unipotent_mix,
    tag_of,
    word_from_tag,
)

TW = build_tower(3, 1)
TW.default_window = 26


def rand_pair(rng, maxv=2):
    v = rng.randint(-maxv, maxv)
    co = [rng.randrange(9) for _ in range(rng.randint(1, 3))]
    if not any(co):
        co[0] = 1
    x = Series.from_coeffs(TW, v, co)
    y = (-(x * x.conj())).scale(TW.i_(TW.from_int(2)))
    if rng.random() < 0.7:
        k = rng.randint(-2 * maxv, 2 * maxv)
        y = y + Series.from_coeffs(TW, k, [TW.trace_zero_unit_idx()])
    return x, y


def rand_atom(rng):
    r = rng.random()
    if r < 0.3:
        return atom_n(TW, *rand_pair(rng))
    if r < 0.6:
        return atom_np(TW, *rand_pair(rng))
    if r < 0.75:
        return atom_alpha(rng.randint(-2, 2))
    if r < 0.9:
        return atom_beta()
    a = rng.randrange(1, 9)
    c = rng.choice(sorted(TW.norm_one))
    d1 = Series.const(TW, a)
    d2 = Series.const(TW, c)
    return atom_d(TW, d1, d2, d1.conj().inverse())


def check_nf(K, word):
    nf = nf_uak(TW, K, word)
    # reassembly: u * shift^T * k equals the input word
    lhs = word_matrix(TW, word)
    rhs = word_matrix(TW, nf.u + (atom_alpha(nf.t),)) * nf.k
    assert lhs.eq_to_prec(rhs, min_prec=1)
    tg = tag_of(TW, K, word)
    rep = word_from_tag(TW, K, tg)
    assert tag_of(TW, K, rep) == tg
    # rep lies in the same double coset: rep^-1 * g has the trivial tag shape
    comb = word_inverse(TW, rep) + tuple(word)
    t0, coords0 = tag_of(TW, K, comb)
    assert t0 == 0 and coords0 == ()
    k_mat, t_mirror, u = nf_kau(TW, K, word)
    lhs2 = k_mat * word_matrix(TW, (atom_alpha(t_mirror),) + tuple(u))
    assert lhs.eq_to_prec(lhs2, min_prec=1)
    assert abs(t_mirror) == abs(nf.t)
    return tg


def test_randomized_battery():
    rng = random.Random(9011)
    spread = {"K0": set(), "K1": set()}
    for K in ("K0", "K1"):
        for _ in range(40):
            word = tuple(rand_atom(rng) for _ in range(rng.randint(1, 5)))
            tg = check_nf(K, word)
            spread[K].add(tg[0])
    # the battery must reach well beyond the compact (|t| >= 3 both sides)
    assert max(spread["K0"]) >= 3 and min(spread["K0"]) <= -3
    assert max(spread["K1"]) >= 3 and min(spread["K1"]) <= -3


def test_shift_word_normal_forms():
    for K in ("K0", "K1"):
        for e in (-3, -1, 0, 2, 4):
            nf = nf_uak(TW, K, (atom_alpha(e),))
            assert nf.t == e
            assert nf.u == ()
            assert nf.k.eq_to_prec(Mat3.identity(TW), min_prec=1)


def test_weyl_atom_tags():
    # the form atom lies in the standard compact but not the shifted one:
    # against K1 it shifts by one step
    assert tag_of(TW, "K0", (atom_beta(),))[0] == 0
    t1 = tag_of(TW, "K1", (atom_beta(),))
    assert t1 == tag_of(TW, "K1", (atom_alpha(-1),))
    assert t1[0] == -1


def test_tag_coords_shapes():
    nK, mK, _ = iwahori_constants(TW, "K0")
    # positive side: 2t - 1 layers of lower-unipotent data starting at mK
    tg = tag_of(TW, "K0", (atom_alpha(2),))
    assert tg[0] == 2 and len(tg[1]) == 3
    assert [c[0] for c in tg[1]] == [mK, mK + 1, mK + 2]
    # negative side: 2|t| layers of upper-unipotent data starting at nK
    tg2 = tag_of(TW, "K0", (atom_alpha(-2),))
    assert tg2[0] == -2 and len(tg2[1]) == 4
    assert [c[0] for c in tg2[1]] == [nK, nK + 1, nK + 2, nK + 3]
    assert all(c[1:] == (0, 0) for c in tg2[1])


def test_distinct_layer_data_gives_distinct_tags():
    nK, mK, _ = iwahori_constants(TW, "K0")
    seen = set()
    for coords in layer_coords(TW, mK):
        word = (layer_atom(TW, mK, coords, prime=True), atom_alpha(1))
        seen.add(tag_of(TW, "K0", word))
    assert len(seen) == len(layer_coords(TW, mK))


@settings(max_examples=40, deadline=None)
@given(
    K=st.sampled_from(["K0", "K1"]),
    e=st.integers(-2, 2),
    i=st.integers(0, 26),
    j=st.integers(0, 3),
    depth=st.integers(0, 1),
)
def test_tag_coset_invariance(K, e, i, j, depth):
    """Tags label right cosets g*(compact): invariant under the compact on
    the right, and on the left under elements whose conjugate by the shift
    stays compact (the non-coordinate unipotent side)."""
    nK, mK, _ = iwahori_constants(TW, K)
    base = (atom_alpha(e),)
    tg = tag_of(TW, K, base)
    if e >= 0:
        k_layer = nK + 2 * depth
        coords = layer_coords(TW, k_layer)
        left = layer_atom(TW, k_layer, coords[i % len(coords)])
    else:
        k_layer = mK + 2 * depth
        coords = layer_coords(TW, k_layer)
        left = layer_atom(TW, k_layer, coords[i % len(coords)], prime=True)
    assert tag_of(TW, K, (left,) + base) == tg
    # right multiply by a compact atom
    k_right = nK if K == "K0" else nK + 1
    rights = [
        layer_atom(TW, k_right, layer_coords(TW, k_right)[j % 3]),
        torus_unit_atoms(TW)[(i + j) % 32],
    ]
    if K == "K0":
        rights.append(atom_beta())
    for right in rights:
        assert tag_of(TW, K, base + (right,)) == tg


def test_tag_detects_moved_coset():
    # a lower-unipotent left factor at the first peeled layer moves the coset
    nK, mK, _ = iwahori_constants(TW, "K0")
    left = layer_atom(TW, mK, layer_coords(TW, mK)[1], prime=True)
    assert tag_of(TW, "K0", (left, atom_alpha(1))) != tag_of(TW, "K0", (atom_alpha(1),))


def test_sort_unipotent_mix_roundtrip():
    rng = random.Random(4)
    for lower_first in (True, False):
        for _ in range(10):
            atoms = []
            for _ in range(rng.randint(2, 4)):
                if rng.random() < 0.5:
                    atoms.append(atom_n(TW, *rand_pair(rng, maxv=1)))
                else:
                    atoms.append(atom_np(TW, *rand_pair(rng, maxv=1)))
            try:
                triple = sort_unipotent_mix(TW, atoms, lower_first=lower_first)
            except Exception:
                continue  # non-invertible corrections are legitimately skipped
            kinds = [a[0] for a in triple]
            if lower_first:
                assert kinds == ["np", "d", "n"]
            else:
                assert kinds == ["n", "d", "np"]
            lhs = word_matrix(TW, tuple(atoms))
            assert lhs.eq_to_prec(word_matrix(TW, triple), min_prec=1)
