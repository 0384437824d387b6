"""Command line interface: batch file runner and interactive loop.

``spinel run file`` type-checks every goal in a source file, printing
human-readable reports or NDJSON (one object per goal) with ``--json``.
``spinel repl`` offers the same engine interactively.  Exit codes: 0
all goals succeed, 1 some goal fails with a diagnostic, 2 the input
does not parse, 3 an internal invariant or a declarative replay fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .infer import (
    Check,
    Diagnostic,
    DiagnosticKind,
    EngineInvariantError,
    Synthesize,
    infer,
    spine_infer,
)
from .matcher import match_first_order
from .oracle import verify_spec
from .parser import (
    Assume,
    ConDecl,
    Goal,
    ParseError,
    parse_assume,
    parse_con_decl,
    parse_goal,
    parse_program,
    pretty_term,
    pretty_type,
)
from .syntax import (
    App,
    Context,
    Exact,
    TypeExpr,
    Unknown,
    free_type_vars,
    is_meta_name,
    strip,
)

_HEADLINES = {
    DiagnosticKind.UNANNOTATED_LAMBDA: "cannot synthesize a type for an unannotated function",
    DiagnosticKind.UNSOLVED_META_VARIABLES: "cannot determine all type arguments",
    DiagnosticKind.APPLICAND_NOT_ARROW: "applicand is not a function",
    DiagnosticKind.APPLICAND_NOT_FORALL: "applicand is not polymorphic",
    DiagnosticKind.TYPE_MISMATCH: "type mismatch",
    DiagnosticKind.SOLUTION_CONFLICT: "conflicting requirements on a type argument",
    DiagnosticKind.EXPLICIT_ARG_CONFLICT: "explicit type argument conflicts with an inferred one",
    DiagnosticKind.UNBOUND_NAME: "unbound name",
}

_RED = "\x1b[31m"
_BOLD = "\x1b[1m"
_RESET = "\x1b[0m"


def _use_color() -> bool:
    env = os.environ.get("SPINEL_COLOR", "").lower()
    if env in ("1", "always", "on", "yes"):
        return True
    if env in ("0", "never", "off", "no"):
        return False
    return sys.stdout.isatty()


# ----------------------------------------------------- diagnostic output


def _field_labels(kind: DiagnosticKind) -> tuple[str, str]:
    if kind is DiagnosticKind.EXPLICIT_ARG_CONFLICT:
        return "inferred type argument", "explicit type argument"
    if kind in (DiagnosticKind.APPLICAND_NOT_ARROW, DiagnosticKind.APPLICAND_NOT_FORALL):
        return "expected type", "applicand type"
    return "expected type", "synthesized type"


def _meta_solutions(d: Diagnostic) -> list[tuple[str, TypeExpr]]:
    """Recover the individual meta-variable bindings behind a diagnostic
    by replaying its recorded matches."""
    if d.expected is None:
        return []
    relevant = {v for v in free_type_vars(d.expected) if is_meta_name(v)}
    pairs: list[tuple[str, TypeExpr]] = []
    seen: set[str] = set()
    for m in (d.contextual_match, d.synthetic_match):
        if m is None:
            continue
        metas = frozenset(v for v in free_type_vars(m.partial) if is_meta_name(v))
        if not metas:
            continue
        try:
            got = match_first_order(metas, m.partial, m.against)
        except ValueError:
            got = None
        if got is None:
            continue
        for name in sorted(got.domain()):
            if name in relevant and name not in seen:
                seen.add(name)
                pairs.append((name, got.type_of(name)))
    return pairs


def render_diagnostic(d: Diagnostic, color: bool = False) -> str:
    rn = d.display
    where = f" at {d.span.line}:{d.span.col}" if d.span is not None else ""
    head = f"error: {_HEADLINES[d.kind]}{where}"
    if color:
        head = f"{_RED}{head}{_RESET}"
    lines = [head]
    expected_label, synthesized_label = _field_labels(d.kind)

    def emit(label: str, text: str) -> None:
        shown = f"{_BOLD}{label}:{_RESET}" if color else f"{label}:"
        lines.append(f"  {shown} {text}")

    pairs = _meta_solutions(d)
    if d.expected is not None:
        emit(expected_label, pretty_type(d.expected, rn))
        for name, val in pairs:
            lines.append(f"    {rn.get(name, name)} := {pretty_type(val, rn)}")
        if d.resolved is not None and not pairs:
            emit("resolved expected type", pretty_type(d.resolved, rn))
    if d.synthesized is not None:
        emit(synthesized_label, pretty_type(d.synthesized, rn))
        if d.kind is DiagnosticKind.UNSOLVED_META_VARIABLES:
            metas = sorted(v for v in free_type_vars(d.synthesized) if is_meta_name(v))
            if metas:
                emit("unsolved", ", ".join(rn.get(m, m) for m in metas))
    if d.contextual_match is not None:
        m = d.contextual_match
        emit(
            "contextual match",
            f"{pretty_type(m.partial, rn)} := {pretty_type(m.against, rn)}",
        )
    if d.synthetic_match is not None:
        m = d.synthetic_match
        emit(
            f"synthetic match (argument {m.arg_index})",
            f"{pretty_type(m.partial, rn)} := {pretty_type(m.against, rn)}",
        )
    if d.detail is not None:
        emit("note", d.detail)
    return "\n".join(lines)


def diagnostic_json(d: Diagnostic) -> dict:
    rn = d.display
    out: dict = {"kind": d.kind.value, "message": _HEADLINES[d.kind]}
    if d.span is not None:
        out["span"] = d.span.to_json()
    if d.expected is not None:
        out["expected"] = pretty_type(d.expected, rn)
    if d.resolved is not None:
        out["resolved"] = pretty_type(d.resolved, rn)
    if d.synthesized is not None:
        out["synthesized"] = pretty_type(d.synthesized, rn)
    if d.contextual_match is not None:
        out["contextual_match"] = {
            "partial": pretty_type(d.contextual_match.partial, rn),
            "against": pretty_type(d.contextual_match.against, rn),
        }
    if d.synthetic_match is not None:
        out["synthetic_match"] = {
            "partial": pretty_type(d.synthetic_match.partial, rn),
            "against": pretty_type(d.synthetic_match.against, rn),
            "arg_index": d.synthetic_match.arg_index,
        }
    if d.detail is not None:
        out["detail"] = d.detail
    return out


# ------------------------------------------------------------ batch mode


def _spec_report(ctx: Context, expected: TypeExpr | None, term) -> tuple[bool, str, dict]:
    """Replay a solved application spine against the declarative rules."""
    if not isinstance(term, App):
        return True, "spec: skipped (not an application spine)", {"skipped": True}
    proto = Unknown() if expected is None else Exact(expected)
    try:
        out = spine_infer(ctx, proto, term)
    except (Diagnostic, EngineInvariantError) as exc:
        return False, f"spec: rejected: spine replay failed ({exc})", {"accepted": False}
    triple = (strip(out.deco), out.partial, out.solution)
    verdict = verify_spec(ctx, expected, term, triple)
    as_json = {"accepted": verdict.accepted, "trace": list(verdict.trace)}
    if verdict.accepted:
        return True, "spec: accepted (" + " ".join(verdict.trace) + ")", as_json
    as_json["reason"] = verdict.reason
    return False, f"spec: rejected: {verdict.reason}", as_json


def run_file(args: argparse.Namespace) -> int:
    try:
        with open(args.file, encoding="utf-8") as handle:
            src = handle.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        program = parse_program(src)
    except ParseError as exc:
        if args.json:
            print(json.dumps({"status": "parse-error", "line": exc.line, "col": exc.col, "message": exc.message}))
        else:
            print(f"parse error: {exc}", file=sys.stderr)
        return 2

    color = _use_color() and not args.json
    ctx = Context.empty()
    code = 0
    count = 0
    for decl in program:
        match decl:
            case ConDecl(name=name, arity=arity):
                ctx = ctx.with_con(name, arity)
                continue
            case Assume(name=name, ty=ty):
                ctx = ctx.with_term(name, ty)
                continue
            case Goal(term=term, expected=expected):
                count += 1
        mode = Synthesize() if expected is None else Check(expected)
        trace: list[str] | None = [] if args.trace else None
        record: dict = {
            "goal": count,
            "mode": "synth" if expected is None else "check",
            "term": pretty_term(term),
        }
        if expected is not None:
            record["expected"] = pretty_type(expected)
        header = f"[{count}] {record['mode']} {record['term']}"
        if expected is not None:
            header += f" : {record['expected']}"

        try:
            out = infer(ctx, mode, term, trace=trace)
        except Diagnostic as d:
            code = max(code, 1)
            if args.json:
                record.update(status="error", diagnostic=diagnostic_json(d))
                print(json.dumps(record))
            else:
                print(header)
                body = render_diagnostic(d, color)
                print("\n".join("    " + line for line in body.splitlines()))
                print()
            continue
        except EngineInvariantError as exc:
            code = 3
            if args.json:
                record.update(status="internal-error", message=str(exc))
                print(json.dumps(record))
            else:
                print(header)
                print(f"    internal error: {exc}")
                print()
            continue

        record.update(status="ok", type=pretty_type(out.ty))
        parts = [f"    type: {pretty_type(out.ty)}"]
        if args.elab:
            record["elaboration"] = pretty_term(out.elaboration)
            parts.append(f"    elaboration: {pretty_term(out.elaboration)}")
        if trace is not None:
            record["trace"] = list(trace)
            parts.append("    trace: " + " ".join(trace))
        if args.spec_verify:
            ok, text, as_json = _spec_report(ctx, expected, term)
            record["spec"] = as_json
            parts.append("    " + text)
            if not ok:
                code = 3
        if args.json:
            print(json.dumps(record))
        else:
            print(header)
            for part in parts:
                print(part)
            print()
    return code


# ------------------------------------------------------------- interactive

_REPL_HELP = """commands:
  :type Name [arity]    declare a type constructor
  :assume name : T      bind a name to a type
  :check t : T          check a term against a type
  :synth t              synthesize a type for a term
  :quit                 leave"""


def repl() -> int:
    color = _use_color()
    print("spinel interactive loop; :quit to leave, :help for commands")
    ctx = Context.empty()
    while True:
        try:
            line = input("spinel> ")
        except (EOFError, KeyboardInterrupt):
            print()
            return 0
        line = line.strip()
        if not line:
            continue
        cmd, _, rest = line.partition(" ")
        try:
            match cmd:
                case ":quit" | ":q":
                    return 0
                case ":help":
                    print(_REPL_HELP)
                case ":type":
                    name, arity = parse_con_decl(rest, ctx)
                    ctx = ctx.with_con(name, arity)
                    print(f"type {name}" + (f" {arity}" if arity else ""))
                case ":assume":
                    name, ty = parse_assume(rest, ctx)
                    ctx = ctx.with_term(name, ty)
                    print(f"{name} : {pretty_type(ty)}")
                case ":check":
                    term, expected = parse_goal(rest, ctx, with_type=True)
                    out = infer(ctx, Check(expected), term)
                    print(f"ok: {pretty_type(out.ty)}")
                    print(f"elaboration: {pretty_term(out.elaboration)}")
                case ":synth":
                    term, _ = parse_goal(rest, ctx, with_type=False)
                    out = infer(ctx, Synthesize(), term)
                    print(f"type: {pretty_type(out.ty)}")
                    print(f"elaboration: {pretty_term(out.elaboration)}")
                case _:
                    print(f"unknown command {cmd!r}; :help lists commands")
        except ParseError as exc:
            print(f"parse error: {exc}")
        except ValueError as exc:
            print(f"error: {exc}")
        except Diagnostic as d:
            print(render_diagnostic(d, color))
        except EngineInvariantError as exc:
            print(f"internal error: {exc}")


# ------------------------------------------------------------- entry point


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spinel",
        description="Spine-local type inference for System F",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="type-check every goal in a file")
    run.add_argument("file", help="source file of declarations and goals")
    run.add_argument("--elab", action="store_true", help="print elaborated terms")
    run.add_argument("--json", action="store_true", help="emit one JSON object per goal")
    run.add_argument("--trace", action="store_true", help="print the rule trace per goal")
    run.add_argument(
        "--spec-verify",
        action="store_true",
        help="replay every solved application spine against the declarative rules",
    )
    sub.add_parser("repl", help="interactive loop")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.command == "run":
        return run_file(args)
    return repl()


if __name__ == "__main__":
    sys.exit(main())
