import pytest
from hypothesis import given, settings

from pnlkit import corpus
from pnlkit.atoms import PermissionSet, Permutation, atom
from pnlkit.gen import ATOMS4, IOTA, TermGen
from pnlkit.hol import (
    HArrow,
    HTuple,
    O,
    alpha_eq,
    atom_var,
    beta_key,
    check_hol,
    fv,
    mu,
    parse_hol,
    permute_atoms,
    subst,
    type_of,
)
from pnlkit.proof import Ax, Derivation, Sequent
from pnlkit.syntax import (
    AbsSort,
    BaseSort,
    Forall,
    NameSort,
    PermissionViolation,
    Pred,
    SortError,
    Tup,
    TupleSort,
    Unknown,
    alpha_eq as pnl_alpha_eq,
    apply_subst,
    canon as pnl_canon,
    check_prop,
    mk_point_subst,
    permute,
    sort_of,
    var,
)
from pnlkit.text import parse_prop, parse_signature, parse_term
from pnlkit.translate import (
    CaptureError,
    TranslationError,
    capture_check,
    capture_infer_minimal,
    capture_requirements,
    check_dlist,
    pi_guard_prop,
    pi_guard_signature,
    restrict_dlist,
    translate,
    translate_derivation,
    translate_prop,
    translate_signature,
    translate_sort,
    translate_term,
    translate_theory,
    witness_term,
)
from strategies import permutations_, rng, seeds

a, b, c = atom("nu#-1"), atom("nu#-2"), atom("nu#0")
SIG = parse_signature("""\
atomsort nu
basesort iota
termformer var : (nu) iota
termformer app : (iota, iota) iota
termformer lam : ([nu]iota) iota
propformer eq : (iota, iota)
propformer P : nu
unknown X : iota
unknown Y : iota#perm(+{nu#0},-{nu#-1})
""")
X, Y = SIG.unknowns["X"], SIG.unknowns["Y"]
ST = translate_signature(SIG)


def T(s):
    return parse_term(s, SIG)


def H(s):
    return parse_hol(s, ST.hol, {v.name: v for v in ST.hol.vars.values()})


class TestSorts:
    def test_examples(self):
        assert translate_sort(NameSort("nu")) == mu("nu")
        assert translate_sort(BaseSort("iota")) == mu("iota")
        assert translate_sort(AbsSort("nu", IOTA)) == HArrow(mu("nu"), mu("iota"))
        assert translate_sort(TupleSort((IOTA, NameSort("nu")))) == HTuple((mu("iota"), mu("nu")))
        assert translate_sort(TupleSort(())) == HTuple(())

    def test_former_constants(self):
        assert ST.hol.consts["g_lam"] == HArrow(HArrow(mu("nu"), mu("iota")), mu("iota"))
        assert ST.hol.consts["g_app"] == HArrow(HTuple((mu("iota"), mu("iota"))), mu("iota"))
        assert ST.hol.consts["g_eq"] == HArrow(HTuple((mu("iota"), mu("iota"))), O)


class TestRaisedUnknowns:
    def test_dlist_validation(self):
        assert check_dlist([a, c]) == (a, c)
        with pytest.raises(TranslationError):
            check_dlist([a, a])

    def test_restrict_to_permission(self):
        assert restrict_dlist((a, b, c), X.pmss) == (a, b)
        assert restrict_dlist((a, b, c), Y.pmss) == (b, c)

    def test_plain_suspension(self):
        v = ST.xd(X, (a,))
        assert v.name == "X@[nu#-1]"
        assert v.type == HArrow(mu("nu"), mu("iota"))
        assert str(translate_term(ST, (a,), T("X"))) == "X@[nu#-1] nu#-1"

    def test_swapped_suspension(self):
        out = translate_term(ST, (a,), T("((nu#-1 nu#-2))*X"))
        assert str(out) == "X@[nu#-1] nu#-2"

    def test_abstraction(self):
        out = translate_term(ST, (a, b), T("lam([nu#-2]app(Y, ((nu#-1 nu#-2))*X))"))
        env = {"XD": ST.xd(X, (a, b)), "YD": ST.xd(Y, (a, b))}
        expect = parse_hol("g_lam (\\nu#-2. g_app (YD nu#-2, XD nu#-2 nu#-1))", ST.hol, env)
        assert alpha_eq(out, expect)

    def test_atoms_outside_permissions_dropped(self):
        # nu#0 is not in pmss(X), so it is not an argument of X_D
        v = ST.xd(X, (a, c))
        assert v.type == HArrow(mu("nu"), mu("iota"))

    def test_witness_term(self):
        w = witness_term(ST, (a,), X, T("var(nu#-1)"))
        assert alpha_eq(w, H("\\nu#-1. g_var nu#-1"))


class TestCapture:
    def test_requirements(self):
        assert capture_requirements(T("X")) == frozenset()
        assert capture_requirements(T("((nu#-1 nu#-2))*X")) == {a, b}
        assert capture_requirements(T("lam([nu#-1]X)")) == {a}
        # nu#0 is up, so not in pmss(X)
        assert capture_requirements(T("lam([nu#0]X)")) == frozenset()
        assert capture_requirements(T("lam([nu#-1]Y)")) == frozenset()

    def test_check(self):
        t = T("lam([nu#-1]X)")
        assert capture_check((a,), t)
        assert not capture_check((), t)
        assert not capture_check((b,), t)

    def test_minimal_is_sorted(self):
        props = [T("((nu#-1 nu#-3))*X"), T("lam([nu#-2]X)")]
        assert capture_infer_minimal(props) == tuple(sorted({a, b, atom("nu#-3")}))

    def test_uncaptured_terms_collide(self):
        # without nu#-1 in D these two distinct terms translate alike
        r, s = T("lam([nu#-1]X)"), T("lam([nu#-2]X)")
        assert not pnl_alpha_eq(r, s)
        assert alpha_eq(translate_term(ST, (), r), translate_term(ST, (), s))
        D = capture_infer_minimal([r, s])
        assert not alpha_eq(translate_term(ST, D, r), translate_term(ST, D, s))


def _gen(seed):
    return TermGen(SIG, rng(seed), atoms=ATOMS4, unknowns=(X, Y))


class TestProperties:
    @given(seeds)
    @settings(max_examples=150, deadline=None)
    def test_typability(self, seed):
        g = _gen(seed)
        r = g.term(IOTA, 4)
        D = capture_infer_minimal([r])
        assert type_of(translate_term(ST, D, r), ST.hol) == translate_sort(sort_of(SIG, r))
        phi = g.prop(3, quantifiers=True)
        assert type_of(translate(ST, capture_infer_minimal([phi]), phi), ST.hol) == O

    @given(seeds, permutations_(max_size=4))
    @settings(max_examples=150, deadline=None)
    def test_equivariance(self, seed, pi):
        r = _gen(seed).term(IOTA, 4)
        D = tuple(sorted(set(ATOMS4) | set(pi.nontriv())))
        lhs = translate_term(ST, D, permute(pi, r))
        rhs = permute_atoms(pi, translate_term(ST, D, r))
        assert alpha_eq(lhs, rhs)

    @given(seeds)
    @settings(max_examples=150, deadline=None)
    def test_well_defined_on_alpha_classes(self, seed):
        # renaming a binder to a fresh atom gives alpha-equal PNL terms
        r = _gen(seed).term(IOTA, 4)
        s = pnl_canon(r)
        assert pnl_alpha_eq(r, s)
        D = capture_infer_minimal([r, s])
        assert alpha_eq(translate_term(ST, D, r), translate_term(ST, D, s))

    @given(seeds)
    @settings(max_examples=150, deadline=None)
    def test_substitution_commutes(self, seed):
        g = _gen(seed)
        r = g.term(IOTA, 4)
        s = g.term(IOTA, 3, fa_within=X.pmss)
        D = capture_infer_minimal([r, s])
        lhs = translate_term(ST, D, apply_subst(mk_point_subst(X, s, SIG), r))
        rhs = subst(translate_term(ST, D, r), ST.xd(X, D), witness_term(ST, D, X, s))
        assert beta_key(lhs) == beta_key(rhs)


class TestDerivations:
    def test_corpus(self):
        st = translate_signature(corpus.signature())
        for name, d in corpus.lambda_derivations().items():
            hd, D = translate_derivation(st, d)
            assert check_hol(hd, modulo_beta=True, sig=st.hol).ok, name
            assert D == tuple(sorted(D))

    def test_permutation_axiom_rejected(self):
        sig, d = corpus.perm_fixture()
        with pytest.raises(TranslationError, match="g_P a does not entail g_P b"):
            translate_derivation(translate_signature(sig), d)

    def test_identity_axiom_accepted(self):
        sig = corpus.signature("perm.pnl")
        p = parse_prop("P(nu#-1)", sig)
        d = Derivation(Sequent.of([p], [p]), Ax(Permutation()))
        hd, D = translate_derivation(translate_signature(sig), d)
        assert check_hol(hd).ok and D == ()

    def test_capture_error(self):
        st = translate_signature(corpus.signature())
        d = corpus.lambda_derivations()["beta_id.deriv"]
        with pytest.raises(CaptureError) as e:
            translate_derivation(st, d, D=())
        assert atom("nu#-1") in e.value.missing

    def test_theory(self):
        st = translate_signature(corpus.signature())
        hol, D = translate_theory(st)
        assert D == (atom("nu#-2"), atom("nu#-1"))
        assert set(hol.axioms) == set(corpus.signature().axioms)
        for t in hol.axioms.values():
            assert type_of(t, hol) == O

    def test_theory_capture_error(self):
        with pytest.raises(CaptureError):
            translate_theory(translate_signature(corpus.signature()), D=(atom("nu#-2"),))


class TestGuard:
    def test_signature(self):
        g = pi_guard_signature(SIG)
        assert "tau_pi" in g.base_sorts
        assert g.prop_formers["P"] == TupleSort((BaseSort("tau_pi"), NameSort("nu")))
        with pytest.raises(SortError):
            pi_guard_signature(g)

    def test_prop(self):
        Z = Unknown("Z", BaseSort("tau_pi"), PermissionSet())
        phi = parse_prop("P(nu#-1) => eq(X, X)", SIG)
        out = pi_guard_prop(phi, Z)
        assert out.left == Pred("P", Tup((var(Z), a)))
        assert out.right == Pred("eq", Tup((var(Z), T("(X, X)"))))
        check_prop(pi_guard_signature(SIG), out)

    def test_prop_needs_permission(self):
        Z = Unknown("Z", BaseSort("tau_pi"), PermissionSet(removes={a}))
        with pytest.raises(PermissionViolation):
            pi_guard_prop(parse_prop("P(nu#-1)", SIG), Z)

    def test_bound_guard_rejected(self):
        Z = Unknown("Z", IOTA, PermissionSet())
        with pytest.raises(TranslationError):
            pi_guard_prop(Forall(Z, parse_prop("P(nu#-1)", SIG)), Z)

    def test_translated_guard_types(self):
        g = pi_guard_signature(SIG)
        Z = Unknown("Z", BaseSort("tau_pi"), PermissionSet())
        phi = pi_guard_prop(parse_prop("P(nu#-1)", SIG), Z)
        st = translate_signature(g)
        assert type_of(translate_prop(st, (), phi), st.hol) == O
        assert atom_var(a) in fv(translate_prop(st, (), phi))
