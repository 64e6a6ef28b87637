import pytest
from hypothesis import given, settings

from pnlkit import corpus
from pnlkit.atoms import Permutation, atom
from pnlkit.gen import IOTA
from pnlkit.proof import (
    Ax,
    AxR,
    BotL,
    Derivation,
    DerivationError,
    ForallL,
    ForallR,
    Sequent,
    check_full,
    check_restricted,
    dump_derivation,
    fa_restriction_lint,
    load_derivation,
)
from pnlkit.syntax import BOT, Pred, Tup, Unknown, mk_point_subst, permute, permute_unknowns, unknown_swap, var
from pnlkit.text import parse_prop
from strategies import permutations_

LAMBDA = corpus.signature()
PERM = corpus.signature("perm.pnl")
a, b = atom("nu#-1"), atom("nu#-2")


def derive(sig, text):
    return load_derivation(sig, text)


def one_node(sig, left, right, rule):
    return Derivation(Sequent.of([parse_prop(p, sig) for p in left], [parse_prop(p, sig) for p in right]), rule)


class TestAxioms:
    def test_equivariant_axiom_full_only(self):
        d = one_node(PERM, ["P(nu#-1)"], ["P(nu#-2)"], Ax(Permutation.swap(a, b)))
        assert check_full(PERM, d).ok
        rep = check_restricted(PERM, d)
        assert not rep.ok
        assert "non-identity axiom permutation" in rep.failures()[0].message
        assert rep.failures()[0].path == "0"

    def test_identity_axiom(self):
        d = one_node(PERM, ["P(nu#-1)"], ["P(nu#-1)"], AxR())
        assert check_restricted(PERM, d).ok and check_full(PERM, d).ok

    def test_whole_proposition_is_permuted(self):
        for pi in (Permutation.swap(a, b), Permutation(), Permutation.swap(b, atom("nu#-3"))):
            d = one_node(PERM, ["Q(nu#-1, nu#-2)"], ["Q(nu#-1, nu#-1)"], Ax(pi))
            assert not check_full(PERM, d).ok

    def test_bot_left(self):
        d = Derivation(Sequent.of([BOT], []), BotL())
        assert check_full(PERM, d).ok and check_restricted(PERM, d).ok

    def test_bot_left_needs_bot(self):
        d = one_node(PERM, ["P(nu#-1)"], [], BotL())
        assert not check_full(PERM, d).ok


class TestQuantifiers:
    def test_eta_instance(self):
        d = derive(LAMBDA, corpus.read("eta_var.deriv"))
        assert check_restricted(LAMBDA, d).ok

    def test_witness_outside_permissions(self):
        text = """(derivation
          (sequent (left (axiom eta)) (right "eq(lam([nu#-1]app(var(nu#0), var(nu#-1))), var(nu#0))"))
          (forallL :X Z :witness "var(nu#0)" (ax)))"""
        rep = check_full(LAMBDA, derive(LAMBDA, text))
        assert not rep.ok
        assert "nu#0" in rep.failures()[0].message

    def test_eigen_unknown_must_be_fresh(self):
        phi = parse_prop("forall X:iota. eq(X, X)", LAMBDA)
        Y = Unknown("Y", IOTA)
        inst = Pred("eq", _pair(var(Y)))
        good = Derivation(Sequent.of([inst], [phi]), ForallR(Unknown("W", IOTA)),
                          (Derivation(Sequent.of([inst], [Pred("eq", _pair(var(Unknown("W", IOTA))))]), AxR()),))
        rep = check_full(LAMBDA, good)
        assert [n.path for n in rep.failures()] == ["0.0"]  # only the open leaf fails
        bad = Derivation(Sequent.of([inst], [phi]), ForallR(Y), (Derivation(Sequent.of([inst], [inst]), AxR()),))
        rep = check_full(LAMBDA, bad)
        assert not rep.ok
        assert "eigen-unknown Y is free" in rep.failures()[0].message


def _pair(t):
    return Tup((t, t))


class TestCorpus:
    @pytest.mark.parametrize("name", sorted(corpus.lambda_derivations()))
    def test_restricted_accepts(self, name):
        d = corpus.lambda_derivations()[name]
        assert check_restricted(LAMBDA, d).ok
        assert check_full(LAMBDA, d).ok

    @pytest.mark.parametrize("name", sorted(corpus.lambda_derivations()))
    def test_dump_load_round_trip(self, name):
        d = corpus.lambda_derivations()[name]
        again = load_derivation(LAMBDA, dump_derivation(d))
        assert again == d

    def test_corpus_size(self):
        assert len(corpus.lambda_derivations()) >= 10

    def test_bad_file(self):
        with pytest.raises(DerivationError):
            load_derivation(LAMBDA, "(derivation (sequent (left) (right)) (nope))")
        with pytest.raises(DerivationError):
            load_derivation(LAMBDA, "(derivation")


class TestLint:
    def test_single_axiom_node(self):
        assert fa_restriction_lint(one_node(PERM, ["P(nu#-1)"], ["P(nu#-1)"], AxR())).ok

    def test_corpus_witness_atoms_already_present(self):
        assert fa_restriction_lint(corpus.lambda_derivations()["eta_var.deriv"]).ok

    def test_fresh_witness_atom_is_already_permitted(self):
        # fa(r) lies in pmss(X), and pmss(X) is free in the quantified formula itself,
        # so a checked instantiation never adds free atoms
        text = """(derivation
          (sequent (left "forall X:iota. eq(X, X)" "eq(var(nu#-1), var(nu#-1))")
                   (right "eq(var(nu#-1), var(nu#-1))"))
          (forallL :witness "var(nu#-3)" (ax)))"""
        d = derive(LAMBDA, text)
        assert check_restricted(LAMBDA, d).ok
        assert fa_restriction_lint(d).ok

    def test_new_atom_in_unchecked_tree(self):
        text = """(derivation
          (sequent (left) (right "eq(var(nu#-1), var(nu#-1)) => eq(var(nu#-1), var(nu#-1))"))
          (impR (ax :seq (sequent (left "eq(var(nu#0), var(nu#0))") (right "eq(var(nu#0), var(nu#0))")))))"""
        d = derive(LAMBDA, text)
        assert not check_full(LAMBDA, d).ok
        lint = fa_restriction_lint(d)
        assert not lint.ok
        path, seq, w = lint.offending[0]
        assert path == "0.0" and w == atom("nu#0")


class TestInvariants:
    @pytest.mark.parametrize("name", sorted(corpus.lambda_derivations()))
    def test_restricted_implies_full(self, name):
        d = corpus.lambda_derivations()[name]
        if check_restricted(LAMBDA, d).ok:
            assert check_full(LAMBDA, d).ok

    @given(permutations_())
    @settings(max_examples=30, deadline=None)
    def test_verdict_stable_under_renaming(self, pi):
        cases = [(LAMBDA, d) for d in corpus.lambda_derivations().values()]
        cases.append(corpus.perm_fixture())
        cases.append((PERM, one_node(PERM, ["Q(nu#-1, nu#-2)"], ["Q(nu#-1, nu#-1)"], AxR())))
        for sig, d in cases:
            assert check_full(sig, _rename(d, pi)).ok == check_full(sig, d).ok

    @given(permutations_(max_size=4))
    @settings(max_examples=20, deadline=None)
    def test_verdict_stable_under_level_two_renaming(self, pi):
        checked = 0
        for d in corpus.lambda_derivations().values():
            eigen = [n.rule.unknown for _, n in d.nodes() if isinstance(n.rule, ForallR)]
            if not eigen:
                continue
            checked += 1
            W = eigen[0]
            fresh = Unknown(W.name + "_renamed", W.sort, W.pmss)
            renamed = _rename(d, pi, unknown_swap(W, fresh))
            assert renamed != d
            assert check_full(LAMBDA, renamed).ok
        assert checked

    @pytest.mark.parametrize("name", sorted(corpus.lambda_derivations()))
    def test_accepted_instantiations_are_valid_substitutions(self, name):
        d = corpus.lambda_derivations()[name]
        for _, node in d.nodes():
            if isinstance(node.rule, ForallL):
                mk_point_subst(node.rule.unknown, node.rule.witness, LAMBDA)


def _rename(d, pi, Pi=None):
    """Apply one atom permutation and one unknown bijection uniformly to every node."""
    Pi = Pi or {}

    def tr(p):
        return permute_unknowns(Pi, permute(pi, p))

    def go(n):
        seq = Sequent.of([tr(p) for p in n.conclusion.left], [tr(p) for p in n.conclusion.right])
        rule = n.rule
        # pi.(phi[X:=r]) = (pi.phi)[X:=r], so witnesses only see the level-2 part
        if isinstance(rule, Ax):
            rule = Ax(pi.compose(rule.pi).compose(pi.inverse()))
        elif isinstance(rule, ForallL):
            rule = ForallL(Pi.get(rule.unknown, rule.unknown), permute_unknowns(Pi, rule.witness))
        elif isinstance(rule, ForallR):
            rule = ForallR(Pi.get(rule.unknown, rule.unknown))
        return Derivation(seq, rule, tuple(go(c) for c in n.premises))

    return go(d)
