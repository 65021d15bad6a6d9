"""orbitkit command line.

Exit status: 0 success or a positive answer, 1 a negative answer (reject,
not equivalent, non-empty, divergence), 2 usage or input errors, 3 when a
membership query gave up after too many configurations.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import automata, formats, oracle
from .automata import FraisseDFA
from .expr import ExprError, evaluate, parse_expr
from .fma import FMA, FMAError, dfa_to_det_fma, fma_accepts, fma_to_nfa, nfa_to_fma
from .nfa import InconclusiveError, NFAError, NominalNFA, nfa_member
from .nomset import NomSetError
from .symmetry import get_backend

OK, NEGATIVE, USAGE, INCONCLUSIVE = 0, 1, 2, 3


class CliError(Exception):
    pass


def _emit(args, report: dict, order: list[str] | None = None) -> None:
    if args.format == "json":
        print(json.dumps(report, sort_keys=True))
        return
    for key in order or report:
        if key not in report:
            continue
        val = report[key]
        if isinstance(val, list):
            for item in val:
                print(f"{key}: {item}")
        else:
            if isinstance(val, bool):
                val = "true" if val else "false"
            print(f"{key}: {val}")


def _load(path: str):
    try:
        return formats.load(path)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None
    except formats.FormatError as exc:
        raise CliError(f"{path}: {exc}") from None


def _need(obj, kind, what: str):
    if not isinstance(obj, kind):
        raise CliError(f"{what} needs a {kind.__name__} file")
    return obj


def _write(obj, out: str | None) -> None:
    text = formats.dump(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _word_text(backend, word) -> str:
    return '""' if not word else formats.format_word(backend, word)


def _letter_word(obj, text: str) -> list:
    if isinstance(obj, NominalNFA):
        return [obj.letter(label, vals) for label, vals in formats.parse_letters(obj.backend, text)]
    if isinstance(obj, FMA):
        out = []
        for label, vals in formats.parse_letters(get_backend("equality"), text):
            if label is None:
                if len(obj.labels) != 1:
                    raise CliError("letters must be labeled, e.g. a:5")
                label = obj.labels[0]
            if len(vals) != 1:
                raise CliError(f"letter {label}:{vals} must carry exactly one value")
            out.append((label, vals[0]))
        return out
    return formats.parse_word(obj.backend, text)


def _accepts(obj, word) -> bool:
    if isinstance(obj, FraisseDFA):
        return automata.run(obj, word)
    if isinstance(obj, NominalNFA):
        return nfa_member(obj, word)
    return fma_accepts(obj, word)


# -- commands ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    obj = _load(args.file)
    text = "" if args.word.strip() in ('""', "''") else args.word
    word = _letter_word(obj, text)
    report = {"result": None, "length": len(word)}
    if isinstance(obj, NominalNFA):
        stats = {}
        ok = nfa_member(obj, word, stats, cap=args.cap)
        report.update(stats)
    else:
        ok = _accepts(obj, word)
    report["result"] = "accept" if ok else "reject"
    _emit(args, report)
    return OK if ok else NEGATIVE


def _state_lines(d: FraisseDFA) -> list[str]:
    out = []
    for name, o in zip(d.names, d.orbits):
        line = f"{name} registers {o.size}"
        rel = formats.format_rel(d.backend, o.shape)
        if rel:
            line += f" rel {rel}"
        if o.sym.order > 1:
            line += f" sym {o.sym.generators_text()} order {o.sym.order}"
        out.append(line)
    return out


def cmd_minimize(args) -> int:
    d = _need(_load(args.file), FraisseDFA, "minimize")
    m = automata.minimize(d)
    _write(m, args.output)
    if args.output:
        _emit(args, {"orbits": len(m.orbits), "input_orbits": len(d.orbits), "state": _state_lines(m)},
              ["input_orbits", "orbits", "state"])
    return OK


def cmd_equiv(args) -> int:
    a = _need(_load(args.a), FraisseDFA, "equiv")
    b = _need(_load(args.b), FraisseDFA, "equiv")
    if a.backend is not b.backend:
        raise CliError("the two automata use different symmetries")
    same, word = automata.equivalent(a, b)
    report = {"equivalent": same}
    if not same:
        report["counterexample"] = _word_text(a.backend, word)
    _emit(args, report)
    return OK if same else NEGATIVE


def cmd_empty(args) -> int:
    d = _need(_load(args.file), FraisseDFA, "empty")
    empty, word = automata.emptiness(d)
    report = {"empty": empty}
    if not empty:
        report["witness"] = _word_text(d.backend, word)
    _emit(args, report)
    return OK if empty else NEGATIVE


def cmd_product(args) -> int:
    a = _need(_load(args.a), FraisseDFA, "product")
    b = _need(_load(args.b), FraisseDFA, "product")
    if a.backend is not b.backend:
        raise CliError("the two automata use different symmetries")
    p = automata.product_dfa(a, b, args.op)
    _write(p, args.output)
    if args.output:
        _emit(args, {"orbits": len(p.orbits)})
    return OK


def cmd_orbits(args) -> int:
    backend = get_backend(args.symmetry)
    s = evaluate(backend, args.expr)
    report = {"orbits": len(s.orbits), "orbit": [o.describe() for o in s.orbits]}
    if args.domain:
        dom = oracle.FiniteDomain.parse(backend, args.domain)
        res = oracle.orbit_count_bruteforce(parse_expr(args.expr), dom)
        report["bruteforce"] = res.count
        if res.warning:
            report["warning"] = res.warning
    _emit(args, report, ["orbits", "bruteforce", "warning", "orbit"])
    if args.domain and report["bruteforce"] != report["orbits"]:
        return NEGATIVE
    return OK


def cmd_annotations(args) -> int:
    d = _need(_load(args.file), FraisseDFA, "annotations")
    try:
        q = d.index(args.state)
    except (ValueError, automata.AutomatonError):
        raise CliError(f"unknown state {args.state!r}") from None
    o = d.orbits[q]
    lines = []
    for ann in d.annotations(q):
        t, w = d.trans[q][ann.key]
        desc = automata.describe_annotation(d.backend, o, ann)
        line = f"{desc} -> {d.names[t]} {list(w)}"
        if ann.local_sym.order > 1:
            line += f" local_sym {ann.local_sym.generators_text()}"
        lines.append(line)
    _emit(args, {"state": args.state, "count": len(lines), "annotation": lines})
    return OK


def cmd_fma2nfa(args) -> int:
    m = _need(_load(args.file), FMA, "fma2nfa")
    _write(fma_to_nfa(m), args.output)
    return OK


def cmd_nfa2fma(args) -> int:
    a = _need(_load(args.file), NominalNFA, "nfa2fma")
    _write(nfa_to_fma(a), args.output)
    return OK


def cmd_dfa2fma(args) -> int:
    d = _need(_load(args.file), FraisseDFA, "dfa2fma")
    _write(dfa_to_det_fma(d, args.label), args.output)
    return OK


def _backend_of(obj):
    return get_backend("equality") if isinstance(obj, FMA) else obj.backend


def cmd_oracle(args) -> int:
    obj = _load(args.file)
    dom = oracle.FiniteDomain.parse(_backend_of(obj), args.domain)
    classical = oracle.restrict(obj, dom)
    accepted = classical.language_upto(args.maxlen)
    other = None
    if args.against:
        other_obj = _load(args.against)
        if _backend_of(other_obj) is not dom.backend:
            raise CliError("the two automata use different symmetries")
        if _is_plain(obj) != _is_plain(other_obj):
            raise CliError("the two automata read different alphabets")
        other = {_letters_key(other_obj, w)
                 for w in oracle.restrict(other_obj, dom).language_upto(args.maxlen)}
    checked = divergences = 0
    first = None
    for w in oracle.words(classical.alphabet, args.maxlen):
        checked += 1
        verdict = _accepts(obj, list(w))
        expected = w in accepted
        bad = verdict != expected or (other is not None and (_letters_key(obj, w) in other) != expected)
        if bad:
            divergences += 1
            if first is None:
                first = w
    report = {
        "domain": " ".join(dom.backend.format_value(v) for v in dom.values),
        "maxlen": args.maxlen,
        "words": checked,
        "accepted": len(accepted),
        "divergences": divergences,
    }
    if other is not None:
        report["accepted_against"] = len(other)
    if first is not None:
        report["first_divergence"] = _format_letters(obj, first)
    _emit(args, report)
    return OK if divergences == 0 else NEGATIVE


def _is_plain(obj) -> bool:
    """Whether the letters are bare data values."""
    if isinstance(obj, FMA):
        return len(obj.labels) == 1
    if isinstance(obj, NominalNFA):
        return len(obj.alphabet.orbits) == 1 and obj.alphabet.orbits[0].size == 1
    return True


def _letters_key(obj, word) -> tuple:
    """Word in a form comparable across automaton kinds."""
    plain = _is_plain(obj)
    out = []
    for a in word:
        if isinstance(obj, FMA):
            out.append(a[1] if plain else (a[0], (a[1],)))
        elif isinstance(obj, NominalNFA):
            out.append(a.valuation[0] if plain else (obj.letter_names[a.orbit], a.valuation))
        else:
            out.append(a)
    return tuple(out)


def _format_letters(obj, word) -> str:
    if not word:
        return '""'
    if isinstance(obj, FraisseDFA):
        return formats.format_word(obj.backend, word)
    if isinstance(obj, FMA):
        return " ".join(f"{label}:{v}" for label, v in word)
    b = obj.backend
    return " ".join(
        f"{obj.letter_names[a.orbit]}:" + ",".join(b.format_value(v) for v in a.valuation) for a in word
    )


def cmd_validate(args) -> int:
    obj = _load(args.file)
    if isinstance(obj, FraisseDFA):
        report = {"kind": "dfa", "symmetry": obj.backend.name, "states": len(obj.orbits),
                  "annotations": sum(len(obj.annotations(q)) for q in range(len(obj.orbits)))}
    elif isinstance(obj, NominalNFA):
        report = {"kind": "nfa", "symmetry": obj.backend.name, "states": len(obj.states.orbits),
                  "letters": len(obj.alphabet.orbits), "transitions": len(obj.trans)}
    else:
        report = {"kind": "fma", "symmetry": "equality", "control": len(obj.control),
                  "registers": obj.registers, "transitions": len(obj.trans)}
    report["valid"] = True
    _emit(args, report)
    return OK


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orbitkit", description="Automata over data words with symmetries.")
    p.add_argument("--format", choices=("text", "json"), default="text", help="report format")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
        return sp

    sp = add("run", cmd_run, "run an automaton on a word")
    sp.add_argument("file")
    sp.add_argument("--word", required=True, help='space-separated letters; "" for the empty word')
    sp.add_argument("--cap", type=int, help="configuration cap for NFA membership (overrides ORBITKIT_NFA_CAP)")

    sp = add("minimize", cmd_minimize, "minimize a dfa")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("equiv", cmd_equiv, "language equivalence of two dfas")
    sp.add_argument("a")
    sp.add_argument("b")

    sp = add("empty", cmd_empty, "language emptiness of a dfa")
    sp.add_argument("file")

    sp = add("product", cmd_product, "boolean product of two dfas")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--op", choices=sorted(automata.COMBINERS), default="and")
    sp.add_argument("-o", "--output")

    sp = add("orbits", cmd_orbits, "orbits of a set expression")
    sp.add_argument("--expr", required=True)
    sp.add_argument("--symmetry", default="equality", choices=("equality", "order", "graph"))
    sp.add_argument("--domain", help="also count by brute force over these values")

    sp = add("annotations", cmd_annotations, "annotations of a dfa state")
    sp.add_argument("file")
    sp.add_argument("--state", required=True)

    for name, func, help_ in (
        ("fma2nfa", cmd_fma2nfa, "translate a finite memory automaton to an nfa"),
        ("nfa2fma", cmd_nfa2fma, "translate an equality nfa to a finite memory automaton"),
        ("dfa2fma", cmd_dfa2fma, "translate an equality dfa to a deterministic finite memory automaton"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("file")
        sp.add_argument("-o", "--output")
        if name == "dfa2fma":
            sp.add_argument("--label", default="a")

    sp = add("oracle", cmd_oracle, "compare with brute force over a finite domain")
    sp.add_argument("file")
    sp.add_argument("--domain", required=True, help='values, e.g. "0,1,2"')
    sp.add_argument("--maxlen", type=int, default=4)
    sp.add_argument("--against", help="second automaton expected to have the same language")

    sp = add("validate", cmd_validate, "parse and check an automaton file")
    sp.add_argument("file")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return INCONCLUSIVE
    except (CliError, formats.FormatError, ExprError, NomSetError, FMAError, NFAError,
            automata.AutomatonError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
