import pytest
from hypothesis import given, settings

from pnlkit.atoms import DOWN, ID, Atom, PermissionSet, Permutation, atom
from pnlkit.gen import ATOMS4, IOTA, NU, TermGen, lambda_signature
from pnlkit.syntax import (
    Abs,
    AbsSort,
    App,
    BaseSort,
    Forall,
    Imp,
    NameSort,
    PermissionViolation,
    Pred,
    Signature,
    SortError,
    Susp,
    Tup,
    TupleSort,
    UNIT,
    Unknown,
    alpha_eq,
    apply_subst,
    canon,
    check_prop,
    free_atoms,
    free_unknowns,
    mk_point_subst,
    permute,
    permute_unknowns,
    sort_of,
    unknown_swap,
    var,
)
from pnlkit.text import ParseError, parse_prop, parse_signature, parse_term, show
from strategies import rng, seeds

a, b, c, d = (atom(s) for s in ("nu#-1", "nu#-2", "nu#0", "nu#1"))
SIG_TEXT = """\
atomsort nu
basesort iota
termformer var : (nu) iota
termformer app : (iota, iota) iota
termformer lam : ([nu]iota) iota
propformer eq : (iota, iota)
propformer P : [nu]iota
unknown X : iota
unknown Y : iota#perm(+{nu#0},-{nu#-1})
unknown Z : iota#perm(+{nu#0,nu#1},-{})
"""
SIG = parse_signature(SIG_TEXT)
X, Y, Z = (SIG.unknowns[n] for n in "XYZ")
UNKNOWNS = (X, Y, Z)


def T(s):
    return parse_term(s, SIG)


def Pr(s):
    return parse_prop(s, SIG)


def gen(seed):
    return TermGen(SIG, rng(seed), unknowns=UNKNOWNS)


class TestSorts:
    def test_var_atom(self):
        assert sort_of(SIG, App("var", a)) == IOTA

    def test_lam_abstraction(self):
        assert sort_of(SIG, App("lam", Abs(a, var(X)))) == IOTA

    def test_arity_mismatch(self):
        with pytest.raises(SortError):
            sort_of(SIG, App("app", a))

    def test_undeclared_former(self):
        with pytest.raises(SortError):
            sort_of(SIG, App("nope", a))

    def test_unit_tuple(self):
        assert sort_of(SIG, Tup(())) == UNIT

    def test_abstraction_sort_must_bind_a_name_sort(self):
        with pytest.raises(SortError):
            Signature({"nu"}, {"iota"}, prop_formers={"Q": AbsSort("iota", IOTA)})

    def test_prop_check(self):
        with pytest.raises(SortError):
            check_prop(SIG, Pred("eq", App("var", a)))


class TestPermutationAction:
    def test_abstraction_clause(self):
        p = Permutation.swap(a, c)
        assert permute(p, Abs(a, var(X))) == canon(Abs(c, Susp(p, X)))

    def test_forall_leaves_unknown(self):
        p = Permutation.swap(a, c)
        phi = Pr("forall W:iota. P([nu#-1]W)")
        W = phi.unknown
        assert permute(p, phi) == canon(Forall(W, Pred("P", Abs(c, Susp(p, W)))))

    def test_suspensions_compose(self):
        p, q = Permutation.swap(a, b), Permutation.swap(b, c)
        assert permute(p, Susp(q, X)) == canon(Susp(p.compose(q), X))

    @given(seeds)
    @settings(max_examples=150)
    def test_free_atoms_equivariant(self, seed):
        g = gen(seed)
        r = g.term(IOTA, 3)
        p = g.perm()
        assert free_atoms(permute(p, r)) == free_atoms(r).perm_image(p)

    @given(seeds)
    @settings(max_examples=100)
    def test_group_action(self, seed):
        g = gen(seed)
        r = g.term(IOTA, 3)
        p, q = g.perm(), g.perm()
        assert permute(ID, r) == canon(r)
        assert permute(p, permute(q, r)) == permute(p.compose(q), r)


class TestLevel2:
    def test_suspension(self):
        W = Unknown("W", IOTA)
        p = Permutation.swap(a, b)
        assert permute_unknowns(unknown_swap(X, W), Susp(p, X)) == canon(Susp(p, W))

    def test_binder_renamed(self):
        W = Unknown("W", IOTA)
        phi = Forall(X, Pred("eq", Tup((var(X), var(X)))))
        assert alpha_eq(permute_unknowns(unknown_swap(X, W), phi), phi)

    def test_mismatched_pmss_rejected(self):
        with pytest.raises(SortError):
            permute_unknowns(unknown_swap(X, Y), var(X))

    @given(seeds)
    @settings(max_examples=100)
    def test_free_unknowns_equivariant(self, seed):
        g = gen(seed)
        phi = g.prop(3, quantifiers=True)
        W = Unknown("W", IOTA)
        Pi = unknown_swap(X, W)
        assert free_unknowns(permute_unknowns(Pi, phi)) == {Pi.get(V, V) for V in free_unknowns(phi)}


class TestFreeAtoms:
    def test_bound_atom(self):
        assert free_atoms(Abs(a, a)).is_finite and not free_atoms(Abs(a, a)).extras

    def test_suspension(self):
        p = Permutation.swap(a, c)
        assert free_atoms(Susp(p, X)) == DOWN.to_expr().perm_image(p)

    def test_free_unknowns_under_binder(self):
        W = Unknown("W", IOTA)
        phi = Forall(W, Pred("eq", Tup((var(W), var(X)))))
        assert free_unknowns(phi) == {X}


class TestAlpha:
    def test_two_binders(self):
        assert alpha_eq(T("[nu#-1][nu#-2]nu#-1"), T("[nu#-3][nu#-4]nu#-3"))

    def test_shadowing(self):
        assert alpha_eq(T("[nu#-1][nu#-1]nu#-2"), T("[nu#-3][nu#-4]nu#-2"))

    def test_suspension_outside_permissions(self):
        S = Unknown("S", IOTA, PermissionSet(removes={a, b, atom("nu#-3"), atom("nu#-4")}))
        p = Permutation.from_cycles([[a, b], [atom("nu#-3"), atom("nu#-4")]])
        assert alpha_eq(Susp(p, S), var(S))

    def test_unknown_and_atom_binders(self):
        left = Pr("forall X:iota. P([nu#-1]X)")
        right = Pr("forall Y:iota. P([nu#0]((nu#0 nu#-1))*Y)")
        assert alpha_eq(left, right)

    def test_abstractions_over_permitted_atoms_differ(self):
        assert not alpha_eq(Abs(a, var(X)), Abs(b, var(X)))

    def test_distinct_atoms(self):
        assert not alpha_eq(a, b)

    def test_suspension_normalised(self):
        p = Permutation.from_cycles([[c, d]])
        assert canon(Susp(p, X)) == canon(var(X))

    @given(seeds)
    @settings(max_examples=150)
    def test_alpha_preserves_free_atoms_and_sort(self, seed):
        g = gen(seed)
        r = g.term(IOTA, 3)
        p = g.perm()
        # a swap of two atoms fresh for r is an alpha-conversion
        fresh = [x for x in (Atom("nu", 7), Atom("nu", 8)) if x not in free_atoms(r)]
        s = permute(Permutation.swap(*fresh), r) if len(fresh) == 2 else r
        assert alpha_eq(r, s)
        assert free_atoms(r) == free_atoms(s)
        assert sort_of(SIG, r) == sort_of(SIG, s)
        assert alpha_eq(permute(p, r), permute(p, s))


class TestSubstitution:
    def test_capturing(self):
        Xn = Unknown("Xn", NU)
        assert apply_subst(mk_point_subst(Xn, a), Abs(a, var(Xn))) == canon(Abs(a, a))

    def test_not_permitted_binder(self):
        Xn = Unknown("Xn", NU, PermissionSet(removes={b}))
        assert apply_subst(mk_point_subst(Xn, a), Abs(b, var(Xn))) == canon(Abs(b, a))

    def test_representative_choice(self):
        Xn = Unknown("Xn", NU)
        t = Abs(b, Susp(Permutation.swap(b, a), Xn))
        assert alpha_eq(apply_subst(mk_point_subst(Xn, a), t), Abs(a, a))

    def test_valid_point_subst(self):
        mk_point_subst(Unknown("Xn", NU), a)

    def test_permission_violation_names_atom(self):
        with pytest.raises(PermissionViolation, match="nu#0"):
            mk_point_subst(Unknown("Xn", NU), c)

    def test_violation_from_suspension(self):
        with pytest.raises(PermissionViolation) as e:
            mk_point_subst(X, var(Z), SIG)
        assert e.value.atom not in X.pmss

    def test_sort_mismatch(self):
        with pytest.raises(SortError):
            mk_point_subst(X, a, SIG)

    @given(seeds)
    @settings(max_examples=150)
    def test_substitution_respects_alpha(self, seed):
        g = gen(seed)
        r = g.term(IOTA, 3)
        V = g.rng.choice(UNKNOWNS)
        u = g.term(V.sort, 2, fa_within=V.pmss)
        theta = mk_point_subst(V, u, SIG)
        s = permute(Permutation.swap(Atom("nu", 7), Atom("nu", 8)), r)
        assert alpha_eq(apply_subst(theta, r), apply_subst(theta, s))


class TestText:
    @given(seeds)
    @settings(max_examples=150)
    def test_round_trip(self, seed):
        g = gen(seed)
        phi = canon(g.prop(3, quantifiers=True))
        assert parse_prop(show(phi), SIG) == phi
        r = canon(g.term(IOTA, 3))
        assert parse_term(show(r), SIG) == r

    def test_malformed(self):
        with pytest.raises(ParseError):
            parse_term("app(", SIG)

    def test_undeclared_unknown(self):
        with pytest.raises(ParseError, match="undeclared unknown"):
            parse_term("Q", SIG)


def test_conflicting_unknown_declarations():
    with pytest.raises((SortError, ParseError)):
        parse_signature(SIG_TEXT + "unknown X : iota#perm(+{nu#0},-{})\n")
    assert parse_signature(SIG_TEXT + "unknown X : iota\n").unknowns["X"] == X
