import pytest
from hypothesis import given, settings

from pnlkit.atoms import (
    DOWN,
    ID,
    ID_REN,
    Atom,
    AtomError,
    AtomSetExpr,
    PermissionSet,
    Permutation,
    Renaming,
    as_expr,
    atom,
    fresh_atom,
    fresh_atoms,
    make_freshening_pair,
)
from strategies import atom_set_exprs, atom_sets, permission_sets, permutations_, renamings

nu = lambda i: Atom("nu", i)
PROBE = [Atom("nu", i) for i in range(-16, 17)]


def members(S):
    return {a for a in PROBE if a in S}


class TestAtom:
    def test_polarity_is_sign_of_index(self):
        assert nu(-1).down and nu(-7).down
        assert not nu(0).down and not nu(3).down

    def test_parse_and_print(self):
        assert atom("nu#-3") == nu(-3)
        assert str(nu(-3)) == "nu#-3"
        with pytest.raises(AtomError):
            atom("nu")

    def test_equality_by_sort_and_index(self):
        assert Atom("nu", 1) != Atom("mu", 1)


class TestPermissionSet:
    def test_membership(self):
        S = PermissionSet(adds={nu(2)}, removes={nu(-1)})
        assert nu(-2) in S and nu(2) in S
        assert nu(-1) not in S and nu(0) not in S

    def test_rejects_wrong_polarity(self):
        with pytest.raises(AtomError):
            PermissionSet(adds={nu(-1)})
        with pytest.raises(AtomError):
            PermissionSet(removes={nu(0)})

    def test_print(self):
        assert str(PermissionSet({nu(0)}, {nu(-1)})) == "perm(+{nu#0},-{nu#-1})"


class TestFreshAtom:
    def test_smallest_unused_up_index(self):
        assert fresh_atom("nu", {nu(0), nu(1)}) == nu(2)

    def test_smallest_magnitude_down(self):
        assert fresh_atom("nu", set(), want_down=True) == nu(-1)

    def test_up_atom_outside_down_and_extras(self):
        assert fresh_atom("nu", DOWN.to_expr().union({nu(0)})) == nu(1)

    def test_down_atom_exhaustion_reported(self):
        with pytest.raises(AtomError):
            fresh_atom("nu", DOWN, want_down=True)

    def test_down_atom_from_excluded_part(self):
        assert fresh_atom("nu", PermissionSet(removes={nu(-4)}), want_down=True) == nu(-4)

    @given(atom_set_exprs())
    def test_fresh_is_fresh(self, S):
        a = fresh_atom("nu", S)
        assert a not in S and not a.down
        assert len(set(fresh_atoms("nu", S, 3))) == 3


class TestPermutation:
    def test_swap_applies(self):
        p = Permutation.swap(nu(0), nu(1))
        assert p(nu(0)) == nu(1) and p(nu(1)) == nu(0) and p(nu(2)) == nu(2)

    def test_cross_sort_swap_rejected(self):
        with pytest.raises(AtomError):
            Permutation.swap(nu(0), Atom("mu", 0))

    def test_not_bijective_rejected(self):
        with pytest.raises(AtomError):
            Permutation({nu(0): nu(1)})

    def test_nontriv_is_stored_domain(self):
        p = Permutation.from_cycles([[nu(0), nu(1), nu(2)]])
        assert p.nontriv() == {nu(0), nu(1), nu(2)}
        assert str(p) == "((nu#0 nu#1 nu#2))"

    def test_extending_closes_chains(self):
        p = Permutation.extending({nu(0): nu(1), nu(1): nu(2)})
        assert p(nu(2)) == nu(0)

    @given(permutations_(), permutations_(), permutations_())
    def test_group_laws(self, p, q, r):
        assert p.compose(q.compose(r)) == p.compose(q).compose(r)
        assert p.compose(p.inverse()) == ID == p.inverse().compose(p)
        assert p.compose(ID) == p == ID.compose(p)

    @given(permutations_(), atom_set_exprs())
    def test_apply_set_round_trip(self, p, S):
        assert S.perm_image(p.inverse()).perm_image(p) == S

    @given(permutations_(), atom_set_exprs())
    def test_apply_set_pointwise(self, p, S):
        img = S.perm_image(p)
        inv = p.inverse()
        assert all((a in img) == (inv(a) in S) for a in PROBE)

    @given(permutations_(), permission_sets())
    def test_permission_sets_stay_cofinite_down(self, p, S):
        assert S.to_expr().perm_image(p).include_down

    def test_apply_set_swap_down_up(self):
        a, b = nu(-1), nu(0)
        img = DOWN.to_expr().perm_image(Permutation.swap(a, b))
        assert img == DOWN.to_expr().minus({a}).union({b})


class TestRenaming:
    def test_atomic(self):
        r = Renaming.atomic(nu(0), nu(1))
        assert r(nu(0)) == nu(1) and r(nu(1)) == nu(1)

    def test_cross_sort_rejected(self):
        with pytest.raises(AtomError):
            Renaming.atomic(nu(0), Atom("mu", 0))

    def test_print(self):
        assert str(Renaming({nu(0): nu(1), nu(2): nu(1)})) == "[nu#0->nu#1, nu#2->nu#1]"

    @given(renamings(), renamings(), renamings())
    def test_monoid_laws(self, r, s, t):
        assert r.compose(s.compose(t)) == r.compose(s).compose(t)
        assert r.compose(ID_REN) == r == ID_REN.compose(r)
        for a in PROBE:
            assert r.compose(s)(a) == r(s(a))


class TestAtomSetExpr:
    def test_normalisation(self):
        S = AtomSetExpr(True, frozenset({nu(-1)}), frozenset({nu(-1), nu(-2), nu(3)}))
        assert S.excluded == frozenset() and S.extras == {nu(3)}

    @given(atom_set_exprs(), atom_set_exprs())
    def test_subset_agrees_with_sampling(self, S, T):
        sampled = members(S) <= members(T)
        # the probe covers every atom either side mentions, plus the far down tail
        assert S.issubset(T) == sampled
        if not S.issubset(T):
            w = S.counterexample(T)
            assert w in S and w not in T

    @given(atom_set_exprs(), atom_set_exprs())
    def test_union_and_minus(self, S, T):
        assert members(S.union(T)) == members(S) | members(T)
        fin = {a for a in PROBE if a.index % 3 == 0}
        assert members(S.minus(fin)) == members(S) - fin

    @given(renamings(), atom_set_exprs())
    def test_renaming_image_pointwise(self, r, S):
        img = S.ren_image(r)
        for a in PROBE:
            if a in S:
                assert r(a) in img


class TestFresheningPair:
    def test_empty(self):
        p = make_freshening_pair(set(), set())
        assert p.rho1 == ID_REN and p.rho2 == ID_REN

    def test_single(self):
        p = make_freshening_pair({nu(0)}, {nu(0)})
        c = p.rho1(nu(0))
        assert c != nu(0)
        assert p.rho2 == Renaming({c: nu(0)})

    @given(atom_sets(), atom_set_exprs())
    @settings(max_examples=100)
    def test_conditions(self, A, avoid):
        p = make_freshening_pair(A, avoid)
        assert p.rho1.dom() == A
        assert p.rho2.dom() == p.rho1.img()
        assert all(p.rho2(p.rho1(a)) == a for a in A)
        assert not any(c in as_expr(avoid) or c in A for c in p.rho2.dom())
