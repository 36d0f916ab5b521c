"""Weight catalog of the reduced compacts: frozen dimensions, characters,
collapse idempotents, spin/socle machinery, intertwiners."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from u21hecke import gfmat
from u21hecke import weights as W
from u21hecke.errors import DegenerateWeight, InconclusiveLattice, NotApplicable
from u21hecke.fields import Character, char_s, characters_of_torus, is_regular
from u21hecke.unitary_group import K0, K1, GammaElem

BOTH = (K0, K1)


def regular_chis(tower):
    return [c for c in characters_of_torus(tower) if is_regular(c)]


def test_inventories(tower):
    for K, q_t in ((K0, 27), (K1, 3)):
        assert len(W.gamma_upper(tower, K)) == q_t
        assert len(W.gamma_lower(tower, K)) == q_t
        assert len(W.gamma_torus(tower, K)) == 32
        b = W.gamma_beta(tower, K)
        assert (b * b).key() == GammaElem.identity(tower, K).key()
        reps, label_map = W.borel_coset_reps(tower, K)
        assert len(reps) == 1 + q_t
        assert len(label_map) == len(reps)


def test_coset_classification(tower):
    for K in BOTH:
        reps, _ = W.borel_coset_reps(tower, K)
        for g in W.gamma_generators(tower, K):
            for x in reps:
                y = x * g
                idx, b = W.classify_coset(tower, K, y)
                assert b.in_borel()
                assert (b * reps[idx]).key() == y.key()


def test_ps_dimensions(tower):
    chi0 = Character(tower, 0, 0)
    for K, d in ((K0, 28), (K1, 4)):
        ps = W.make_weight(tower, K, W.PRINCIPAL_SERIES, chi=chi0)
        assert ps.dim == d
        st_w = W.make_weight(tower, K, W.STEINBERG)
        assert st_w.dim == d - 1


@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_action_is_homomorphism(tower, data):
    K = data.draw(st.sampled_from(BOTH))
    chi = data.draw(st.sampled_from([(0, 0), (1, 0), (3, 2), (6, 1)]))
    ps = W.make_weight(
        tower, K, W.PRINCIPAL_SERIES, chi=Character(tower, *chi)
    )
    gens = W.gamma_generators(tower, K)
    idx = data.draw(st.lists(st.integers(0, len(gens) - 1), min_size=2, max_size=4))
    prod = gens[idx[0]]
    for i in idx[1:]:
        prod = prod * gens[i]
    lhs = ps.matrix(prod)
    rhs = ps.matrix(gens[idx[0]])
    for i in idx[1:]:
        rhs = gfmat.matmul(tower, rhs, ps.matrix(gens[i]))
    assert np.array_equal(lhs, rhs)


def test_u_invariant_dimensions(tower):
    for K in BOTH:
        assert W.make_weight(tower, K, W.TRIVIAL).u_invariants().shape[0] == 1
        assert (
            W.make_weight(tower, K, W.DET_TWIST, power=1)
            .u_invariants().shape[0] == 1
        )
        assert W.make_weight(tower, K, W.STEINBERG).u_invariants().shape[0] == 1
        ps0 = W.make_weight(
            tower, K, W.PRINCIPAL_SERIES, chi=Character(tower, 0, 0)
        )
        assert ps0.u_invariants().shape[0] == 2
    chi = regular_chis(tower)[0]
    ps = W.make_weight(tower, K1, W.PRINCIPAL_SERIES, chi=chi)
    assert ps.u_invariants().shape[0] == 2


def test_chi_of_frozen(tower):
    for K in BOTH:
        st_w = W.make_weight(tower, K, W.STEINBERG)
        assert st_w.chi_of() == Character(tower, 0, 0)
        for k, expo in ((1, (6, 1)), (2, (4, 2)), (3, (2, 3))):
            dt = W.make_weight(tower, K, W.DET_TWIST, power=k)
            got = dt.chi_of()
            assert (got.i, got.j) == expo
            assert got.det_twist_power() == k
    chi = regular_chis(tower)[0]
    sub = W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="sub")
    quo = W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="quotient")
    assert sub.dim == 2 and quo.dim == 2
    assert sub.chi_of() == char_s(chi)
    assert quo.chi_of() == chi


def test_j_map(tower):
    for K in BOTH:
        triv = W.make_weight(tower, K, W.TRIVIAL)
        assert triv.j_matrix().tolist() == [[1]]
        st_w = W.make_weight(tower, K, W.STEINBERG)
        j = st_w.j_matrix()
        assert gfmat.rank(tower, j) == 1
        assert np.array_equal(gfmat.matmul(tower, j, j), j)
        v0 = st_w.v0()
        assert np.array_equal(gfmat.matvec(tower, j, v0), v0)
        ps0 = W.make_weight(
            tower, K, W.PRINCIPAL_SERIES, chi=Character(tower, 0, 0)
        )
        with pytest.raises(DegenerateWeight):
            ps0.j_matrix()


def test_weight_s_identity(tower):
    chi = regular_chis(tower)[0]
    catalog = []
    for K in BOTH:
        catalog.append(W.make_weight(tower, K, W.TRIVIAL))
        catalog.append(W.make_weight(tower, K, W.DET_TWIST, power=2))
        catalog.append(W.make_weight(tower, K, W.STEINBERG))
    catalog.append(W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="sub"))
    catalog.append(
        W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="quotient")
    )
    for wgt in catalog:
        assert W.weight_s(wgt).chi_of() == char_s(wgt.chi_of())
    # the involution swaps the two layers of the length-two series
    quo = catalog[-1]
    assert W.weight_s(quo).part == "sub"
    assert W.weight_s(W.weight_s(quo)).part == "quotient"
    # cross-check: the conjugate partner is where the conjugate series puts it
    sub = catalog[-2]
    quo_s = W.make_weight(
        tower, K1, W.PS_SUB_QUOTIENT, chi=char_s(chi), part="quotient"
    )
    assert W.hom_space(sub, quo_s).shape[0] == 1


def test_spin(tower):
    for K in BOTH:
        ps0 = W.make_weight(
            tower, K, W.PRINCIPAL_SERIES, chi=Character(tower, 0, 0)
        )
        ones = np.ones(ps0.dim, dtype=np.uint16)
        assert W.spin(ps0, [ones]).shape[0] == 1
        assert W.spin(ps0, list(gfmat.eye(ps0.dim))).shape[0] == ps0.dim
    chi = regular_chis(tower)[0]
    ps = W.make_weight(tower, K1, W.PRINCIPAL_SERIES, chi=chi)
    eig = W.borel_eigenvectors(ps, char_s(chi))
    assert eig.shape[0] == 1
    assert W.spin(ps, [eig[0]]).shape[0] == 2


def test_socle_chains(tower):
    for K in BOTH:
        assert [b.shape[0] for b in W.socle_chain(
            W.make_weight(tower, K, W.TRIVIAL)
        )] == [1]
        st_w = W.make_weight(tower, K, W.STEINBERG)
        assert [b.shape[0] for b in W.socle_chain(st_w)] == [st_w.dim]
    for chi in regular_chis(tower)[:4]:
        ps = W.make_weight(tower, K1, W.PRINCIPAL_SERIES, chi=chi)
        chain = W.socle_chain(ps)
        assert [b.shape[0] for b in chain] == [2, 4]
        sub_c = W.sub_weight(ps, chain[0])
        cat = W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="sub")
        assert sub_c.fingerprint() == cat.fingerprint()
        quo_c = W.quotient_weight(ps, chain[0])
        catq = W.make_weight(
            tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="quotient"
        )
        assert quo_c.fingerprint() == catq.fingerprint()
        # non-split: no section of the quotient back into the series
        assert W.hom_space(catq, ps).shape[0] == 0


def test_trivial_ps_splits(tower):
    """In defining characteristic the trivial-character series is split
    (the large quotient is also a submodule): the lattice is not a chain
    and the implementation must say so rather than guess."""
    for K in BOTH:
        ps0 = W.make_weight(
            tower, K, W.PRINCIPAL_SERIES, chi=Character(tower, 0, 0)
        )
        with pytest.raises(InconclusiveLattice):
            W.socle_chain(ps0)
        ones = np.ones(ps0.dim, dtype=np.uint16)
        complement = None
        for line in W._lines_of(tower, ps0.u_invariants()):
            sp = W.spin(ps0, [line])
            if 0 < sp.shape[0] < ps0.dim and not gfmat.in_row_space(
                tower, sp, ones
            ):
                complement = sp
        assert complement is not None
        assert complement.shape[0] == ps0.dim - 1


def test_not_applicable_guards(tower):
    chi = regular_chis(tower)[0]
    with pytest.raises(NotApplicable):
        W.make_weight(tower, K0, W.PS_SUB_QUOTIENT, chi=chi, part="sub")
    nonreg = Character(tower, 0, 1)
    assert not is_regular(nonreg)
    with pytest.raises(NotApplicable):
        W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=nonreg, part="sub")
    with pytest.raises(NotApplicable):
        W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="middle")


def test_fingerprints_distinguish_layers(tower):
    chi = regular_chis(tower)[0]
    sub = W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="sub")
    quo = W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="quotient")
    assert sub.fingerprint() != quo.fingerprint()


def test_reciprocity_intertwiner(tower):
    # shifted compact: series of the conjugate character onto the socle
    chi = regular_chis(tower)[0]
    sub = W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi, part="sub")
    eig = W.borel_eigenvectors(sub, char_s(chi))
    assert eig.shape[0] == 1
    ps_s = W.make_weight(tower, K1, W.PRINCIPAL_SERIES, chi=char_s(chi))
    mat = W.reciprocity_map_from_ps(sub, char_s(chi), eig[0])
    assert mat.shape == (2, 4)
    assert gfmat.rank(tower, mat) == 2
    assert W.check_equivariant(ps_s, sub, mat)
    # standard compact: trivial series onto the large quotient
    st_w = W.make_weight(tower, K0, W.STEINBERG)
    ps0 = W.make_weight(
        tower, K0, W.PRINCIPAL_SERIES, chi=Character(tower, 0, 0)
    )
    mat = W.reciprocity_map_from_ps(st_w, Character(tower, 0, 0), st_w.v0())
    assert gfmat.rank(tower, mat) == st_w.dim
    assert W.check_equivariant(ps0, st_w, mat)


def test_frobenius_reciprocity_dimensions(tower):
    """dim Hom(series of chi, W) equals the dimension of the chi-eigenspace
    of the Borel on W, for every small W at the shifted compact."""
    chi_r = regular_chis(tower)[0]
    targets = [
        W.make_weight(tower, K1, W.TRIVIAL),
        W.make_weight(tower, K1, W.STEINBERG),
        W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi_r, part="sub"),
        W.make_weight(tower, K1, W.PS_SUB_QUOTIENT, chi=chi_r, part="quotient"),
    ]
    for chi in (Character(tower, 0, 0), chi_r, char_s(chi_r)):
        ps = W.make_weight(tower, K1, W.PRINCIPAL_SERIES, chi=chi)
        for wgt in targets:
            direct = W.hom_space(ps, wgt).shape[0]
            eig = W.borel_eigenvectors(wgt, chi).shape[0]
            assert direct == eig
