"""Command-line front end.

Exit codes: 0 when the checked property holds, 1 when it was checked and
fails, 2 for unreadable or ill-formed input.  File arguments may name a
bundled corpus file as ``corpus:NAME``.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import corpus
from .atoms import AtomError, atom
from .hol import (
    HolDerivationError,
    HolTypeError,
    check_hol,
    dump_hol_derivation,
    load_hol_derivation,
    parse_hol_signature,
    show as show_hol,
    show_hol_signature,
)
from .nomsem import (
    DenotationError,
    denote_prop,
    natural_map_fixtures,
    parse_interpretation,
    parse_valuation,
    parse_value,
)
from .proof import DerivationError, check_full, check_restricted, fa_restriction_lint, load_derivation
from .sexpr import SexprError
from .syntax import SortError, SubstError, alpha_eq, free_unknowns
from .text import ParseError, _declare, parse_prop, parse_signature, parse_term, show as show_pnl
from .translate import (
    CaptureError,
    TranslationError,
    capture_infer_minimal,
    declare_raised,
    show_dlist,
    translate,
    translate_derivation,
    translate_signature,
    translate_theory,
)

OK, FAILS, BAD_INPUT = 0, 1, 2

INPUT_ERRORS = (ParseError, SexprError, DerivationError, HolDerivationError, HolTypeError,
                SortError, SubstError, AtomError, DenotationError, OSError, UnicodeDecodeError)


class InputError(Exception):
    pass


def read_file(name: str) -> str:
    if name.startswith("corpus:"):
        try:
            return corpus.read(name[len("corpus:"):])
        except (FileNotFoundError, OSError) as e:
            raise InputError(f"no bundled file {name[len('corpus:'):]!r}") from e
    return Path(name).read_text()


def emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


def _color(ok: bool, word: str) -> str:
    if os.environ.get("PNLKIT_COLOR") == "1" and sys.stdout.isatty():
        return f"\033[{32 if ok else 31}m{word}\033[0m"
    return word


# ---------------------------------------------------------------------------
# commands


def cmd_alpha_eq(args) -> int:
    sig = load_signature(args)
    a, b = _parse_either(args.term_a, sig), _parse_either(args.term_b, sig)
    same = alpha_eq(a, b)
    emit(args, {"alpha_equivalent": same, "left": show_pnl(a), "right": show_pnl(b)},
         f"{_color(same, 'equivalent' if same else 'distinct')}: {show_pnl(a)}  vs  {show_pnl(b)}")
    return OK if same else FAILS


def load_signature(args):
    """The signature file plus any ``--unknown`` declarations from the command line."""
    sig = parse_signature(read_file(args.signature))
    for decl in getattr(args, "unknown", None) or []:
        _declare(sig, "unknown", decl)
    return sig


def _parse_either(text: str, sig):
    """A proposition if the text starts like one, a term otherwise."""
    m = re.match(r"\s*([A-Za-z_][\w']*)", text)
    head = m.group(1) if m else ""
    if head in sig.prop_formers or head in ("forall", "bot") or "=>" in text:
        return parse_prop(text, sig)
    return parse_term(text, sig)


def cmd_check(args) -> int:
    if args.hol:
        sig = parse_hol_signature(read_file(args.signature))
        d = load_hol_derivation(sig, read_file(args.derivation))
        report = check_hol(d, modulo_beta=args.modulo_beta, sig=sig)
        mode = "hol" + (" modulo beta" if args.modulo_beta else "")
    else:
        sig = parse_signature(read_file(args.signature))
        d = load_derivation(sig, read_file(args.derivation))
        report = (check_full if args.full else check_restricted)(sig, d)
        mode = "full" if args.full else "restricted"
    payload = {"mode": mode, **report.to_dict()}
    lines = [f"{mode}: {_color(report.ok, 'accepted' if report.ok else 'rejected')}"]
    lines += [f"  node {n.path} ({n.rule}): {n.message}" for n in report.failures()]
    if args.lint and not args.hol:
        lint = fa_restriction_lint(d)
        payload["lint"] = {"ok": lint.ok, "offending": [{"path": p, "sequent": str(q), "atom": str(a)}
                                                        for p, q, a in lint.offending]}
        lines.append("free-atom lint: " + ("clean" if lint.ok else "offending nodes"))
        lines += [f"  node {p}: {a} free in {q}" for p, q, a in lint.offending]
    emit(args, payload, "\n".join(lines))
    return OK if report.ok else FAILS


def _parse_dlist(text: str | None):
    if text is None or text == "auto":
        return None
    text = text.strip().strip("[]")
    return tuple(atom(a) for a in text.split(",") if a.strip())


def cmd_translate(args) -> int:
    sig = load_signature(args)
    st = translate_signature(sig)
    D = _parse_dlist(args.D)
    out_dir = Path(args.out) if args.out else None
    try:
        if args.input is None:
            hol, D = translate_theory(st, D)
            files = {"theory.hol": show_hol_signature(hol)}
            unknowns = frozenset().union(*(free_unknowns(p) for p in sig.axioms.values())) if sig.axioms else ()
            body = files["theory.hol"]
        elif args.derivation:
            d = load_derivation(sig, read_file(args.input))
            hd, D = translate_derivation(st, d, D)
            declare_raised(st, hd)
            report = check_hol(hd, modulo_beta=True, sig=st.hol)
            files = {"signature.hol": show_hol_signature(st.hol), "derivation.hderiv": dump_hol_derivation(hd)}
            unknowns = ()
            body = files["derivation.hderiv"]
            if not report.ok:
                raise TranslationError(f"translated derivation fails the HOL checker: {report}")
        else:
            t = _parse_either(args.input, sig)
            if D is None:
                D = capture_infer_minimal([t])
            need = capture_infer_minimal([t])
            missing = tuple(a for a in need if a not in D)
            if missing:
                raise CaptureError(show_pnl(t), missing, tuple(D))
            ht = translate(st, D, t)
            unknowns = free_unknowns(t)
            for X in unknowns:
                st.declare(X, D)
            files = {"term.hol": show_hol(ht) + "\n"}
            body = show_hol(ht)
    except CaptureError as e:
        emit(args, {"error": "capture", "message": str(e), "missing": [str(a) for a in e.missing]},
             f"capture typing failed: {e}")
        return FAILS
    except TranslationError as e:
        emit(args, {"error": "translation", "message": str(e)}, f"translation rejected: {e}")
        return FAILS
    symbols = st.symbol_map(unknowns, D)
    files["symbols.json"] = json.dumps(symbols, sort_keys=True, indent=2) + "\n"
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out_dir / name).write_text(text)
    emit(args, {"D": [str(a) for a in D], "output": body, "symbols": symbols,
                "files": sorted(files) if out_dir else []},
         f"D = {show_dlist(D)}\n{body}")
    return OK


def cmd_semantics(args) -> int:
    return args.semantics_func(args)


def cmd_sem_eval(args) -> int:
    sig = load_signature(args)
    interp = parse_interpretation(read_file(args.interpretation), sig)
    phi = parse_prop(args.prop, sig)
    s = parse_valuation(sig, args.val or [])
    witnesses = {}
    for item in args.witness or []:
        name, eq, vals = item.partition("=")
        if not eq:
            raise InputError(f"expected NAME=V1|V2|..., got {item!r}")
        witnesses[name.strip()] = [parse_value(v, sig) for v in vals.split("|")]
    value = denote_prop(interp, s, phi, witnesses)
    emit(args, {"prop": show_pnl(phi), "value": value}, f"{show_pnl(phi)} |-> {value}")
    return OK if value == 1 else FAILS


def cmd_sem_square(args) -> int:
    from .checks import square_test

    rep = square_test(args.count, args.forall, args.seed)
    lines = [f"square-test: {rep.total} propositions ({rep.quantified} quantified), "
             f"{len(rep.mismatches)} mismatches"]
    lines += [f"  {m['prop']}: pnl {m['pnl']}, hol {m['hol']}" for m in rep.mismatches]
    emit(args, rep.to_dict(), "\n".join(lines))
    return OK if rep.ok else FAILS


def cmd_sem_witnesses(args) -> int:
    results = natural_map_fixtures()
    lines = []
    for r in results:
        tag = "extra " if r.supplementary else ""
        lines.append(f"{_color(r.ok, 'AGREES' if r.ok else 'DIFFERS')} {tag}{r.name}: {r.claim}\n    {r.detail}")
    stated = [r for r in results if not r.supplementary]
    ok = all(r.ok for r in stated)
    emit(args, {"fixtures": [r.to_dict() for r in results], "ok": ok}, "\n".join(lines))
    return OK if ok else FAILS


def cmd_corpus(args) -> int:
    if args.name:
        print(corpus.read(args.name), end="")
    else:
        for n in corpus.names():
            print(n)
    return OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pnlkit", description="Permissive-nominal logic toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    def unknowns(sp):
        sp.add_argument("--unknown", action="append", metavar="'X : SORT#perm(+{..},-{..})'",
                        help="declare a free unknown (repeatable)")
        return sp

    a = unknowns(common(sub.add_parser("alpha-eq", help="decide alpha-equivalence of two terms or propositions")))
    a.add_argument("signature")
    a.add_argument("term_a")
    a.add_argument("term_b")
    a.set_defaults(func=cmd_alpha_eq)

    c = common(sub.add_parser("check", help="check a derivation"))
    mode = c.add_mutually_exclusive_group(required=True)
    mode.add_argument("--full", action="store_true", help="full PNL, equivariant axiom rule")
    mode.add_argument("--restricted", action="store_true", help="restricted PNL, identity axiom rule")
    mode.add_argument("--hol", action="store_true", help="HOL derivation over a HOL signature")
    c.add_argument("signature")
    c.add_argument("derivation")
    c.add_argument("--modulo-beta", action="store_true", help="compare HOL propositions up to beta")
    c.add_argument("--lint", action="store_true", help="also run the free-atom restriction lint")
    c.set_defaults(func=cmd_check)

    t = unknowns(common(sub.add_parser("translate", help="translate a theory, term, proposition or derivation to HOL")))
    t.add_argument("signature")
    t.add_argument("input", nargs="?", help="term or proposition text, or a derivation file with --derivation")
    t.add_argument("--derivation", action="store_true")
    t.add_argument("--D", default="auto", help="'auto' or a comma-separated atom list")
    t.add_argument("--out", help="directory for the HOL files and symbols.json")
    t.set_defaults(func=cmd_translate)

    s = sub.add_parser("semantics", help="nominal semantics")
    ssub = s.add_subparsers(dest="semantics_command", required=True)
    e = unknowns(common(ssub.add_parser("eval", help="evaluate a proposition in an interpretation")))
    e.add_argument("signature")
    e.add_argument("interpretation")
    e.add_argument("prop")
    e.add_argument("--val", action="append", metavar="X=VALUE")
    e.add_argument("--witness", action="append", metavar="X=V1|V2")
    e.set_defaults(func=cmd_semantics, semantics_func=cmd_sem_eval)
    q = common(ssub.add_parser("square-test", help="compare PNL and HOL denotations on random propositions"))
    q.add_argument("--count", type=int, default=200)
    q.add_argument("--forall", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_semantics, semantics_func=cmd_sem_square)
    w = common(ssub.add_parser("witnesses", help="run the natural-map witness fixtures"))
    w.set_defaults(func=cmd_semantics, semantics_func=cmd_sem_witnesses)

    k = sub.add_parser("corpus", help="list or print bundled files")
    k.add_argument("name", nargs="?")
    k.set_defaults(func=cmd_corpus, json=False)
    return p


def main(argv: list | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code else OK
    try:
        return args.func(args)
    except (InputError, *INPUT_ERRORS) as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
