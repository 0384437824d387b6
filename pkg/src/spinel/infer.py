"""Bidirectional type inference with spine-local meta-variables.

Maximal term applications are processed as whole spines: the head's
type is matched against a prototype built from the contextual type (or
from nothing, when synthesizing), quantifiers peel off as fresh
meta-variables, and each argument either checks against a known domain
or synthesizes and instantiates the metas the domain still mentions.
Meta-variables never leave the spine that minted them: synthesis
demands an empty solution, and checking demands that the contextual
type solved every meta the partial elaboration mentions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .matcher import MatchFailure, _match, match_first_order, rename_deco, subst_decorated
from .syntax import (
    App,
    Arrow,
    ArrowTo,
    Context,
    Contextual,
    DArrow,
    DForall,
    DecoratedType,
    Exact,
    Forall,
    Lam,
    NameSupply,
    Plain,
    Prototype,
    Solution,
    Span,
    Synthetic,
    TApp,
    TLam,
    TVar,
    Term,
    TypeExpr,
    Unknown,
    Var,
    alpha_equal,
    compose,
    free_type_vars,
    is_meta_name,
    is_well_formed,
    meta_vars_of_term,
    meta_vars_of_type,
    strip,
    subst_type,
    subst_type_args,
    substitute,
)

# ------------------------------------------------------------------ modes


@dataclass(frozen=True)
class Synthesize:
    """Infer a type with no contextual information."""


@dataclass(frozen=True)
class Check:
    """Check against a known, well-formed contextual type."""

    expected: TypeExpr


Mode = Synthesize | Check


@dataclass(frozen=True)
class InferOutcome:
    ty: TypeExpr
    elaboration: Term


@dataclass(frozen=True)
class SpineOutcome:
    deco: DecoratedType
    partial: Term
    solution: Solution


# ------------------------------------------------------------ diagnostics


class DiagnosticKind(Enum):
    UNANNOTATED_LAMBDA = "unannotated-lambda"
    UNSOLVED_META_VARIABLES = "unsolved-meta-variables"
    APPLICAND_NOT_ARROW = "applicand-not-arrow"
    APPLICAND_NOT_FORALL = "applicand-not-forall"
    TYPE_MISMATCH = "type-mismatch"
    SOLUTION_CONFLICT = "solution-conflict"
    EXPLICIT_ARG_CONFLICT = "explicit-arg-conflict"
    UNBOUND_NAME = "unbound-name"


@dataclass(frozen=True)
class ContextMatch:
    """The contextual match that produced the expected type's solution."""

    partial: TypeExpr
    against: TypeExpr


@dataclass(frozen=True)
class ArgMatch:
    """The synthetic match against an argument's synthesized type."""

    partial: TypeExpr
    against: TypeExpr
    arg_index: int


class Diagnostic(Exception):
    """A user-facing inference failure.

    ``expected`` may mention meta-variables; when the ambient solution
    resolves them, ``resolved`` holds the instantiated form.  ``display``
    maps reserved meta-variable names to their source-keyed rendering.
    """

    def __init__(
        self,
        kind: DiagnosticKind,
        *,
        span: Span | None = None,
        expected: TypeExpr | None = None,
        resolved: TypeExpr | None = None,
        synthesized: TypeExpr | None = None,
        contextual_match: ContextMatch | None = None,
        synthetic_match: ArgMatch | None = None,
        display: dict[str, str] | None = None,
        subject: Term | None = None,
        detail: str | None = None,
    ):
        super().__init__(kind.value)
        self.kind = kind
        self.span = span
        self.expected = expected
        self.resolved = resolved
        self.synthesized = synthesized
        self.contextual_match = contextual_match
        self.synthetic_match = synthetic_match
        self.display = display or {}
        self.subject = subject
        self.detail = detail


class EngineInvariantError(Exception):
    """An internal consistency check failed; this is an engine bug."""


# ------------------------------------------------------------- run state


class _Run:
    def __init__(self, trace: list[str] | None = None):
        self.supply = NameSupply()
        self.trace = trace

    def note(self, rule: str) -> None:
        if self.trace is not None:
            self.trace.append(rule)

    def diag(self, kind: DiagnosticKind, **fields) -> Diagnostic:
        d = Diagnostic(kind, **fields)
        self.refresh_display(d)
        return d

    def refresh_display(self, d: Diagnostic) -> None:
        metas: set[str] = set()
        for ty in (
            d.expected,
            d.resolved,
            d.synthesized,
            d.contextual_match.partial if d.contextual_match else None,
            d.synthetic_match.partial if d.synthetic_match else None,
        ):
            if ty is not None:
                metas |= {v for v in free_type_vars(ty) if is_meta_name(v)}
        d.display = self.supply.display_names(metas)


def _span(t: Term) -> Span | None:
    return getattr(t, "span", None)


# ---------------------------------------------------------- entry points


def infer(
    ctx: Context, mode: Mode, term: Term, trace: list[str] | None = None
) -> InferOutcome:
    """Infer or check a term, elaborating it to a fully annotated one.

    Raises Diagnostic on user-level failure and EngineInvariantError if
    an internal consistency check trips.
    """
    if isinstance(mode, Check) and not is_well_formed(ctx, mode.expected):
        raise ValueError("contextual type is not well-formed")
    return _infer(_Run(trace), ctx, mode, term)


def spine_infer(ctx: Context, proto: Prototype, term: Term) -> SpineOutcome:
    """Run the spine judgment directly (mainly for tests and audits)."""
    return _spine(_Run(), ctx, proto, term)


def apply_arg(
    ctx: Context,
    partial: Term,
    deco: DecoratedType,
    sol: Solution,
    arg: Term,
    arg_index: int,
) -> SpineOutcome:
    """Apply one term argument to a partially applied spine."""
    return _apply(_Run(), ctx, partial, deco, sol, arg, arg_index)


# ------------------------------------------------------------- inference


def _infer(run: _Run, ctx: Context, mode: Mode, term: Term) -> InferOutcome:
    match term:
        case Var(name=x):
            run.note("var")
            ty = ctx.lookup(x)
            if ty is None:
                raise run.diag(
                    DiagnosticKind.UNBOUND_NAME,
                    span=_span(term),
                    subject=term,
                    detail=f"unbound name {x!r}",
                )
            return _conclude(run, ctx, mode, term, ty, term)

        case Lam(bound=x, ann=None, body=body):
            match mode:
                case Check(expected=Arrow(dom=dom, cod=cod)):
                    run.note("lam-bare")
                    out = _infer(run, ctx.with_term(x, dom), Check(cod), body)
                    return InferOutcome(
                        Arrow(dom, out.ty), Lam(x, dom, out.elaboration, span=_span(term))
                    )
                case Check(expected=other):
                    raise run.diag(
                        DiagnosticKind.TYPE_MISMATCH,
                        span=_span(term),
                        expected=other,
                        subject=term,
                        detail="an unannotated function only checks against an arrow type",
                    )
                case _:
                    raise run.diag(
                        DiagnosticKind.UNANNOTATED_LAMBDA,
                        span=_span(term),
                        subject=term,
                        detail=f"no contextual type here, so binder {x!r} needs an annotation",
                    )

        case Lam(bound=x, ann=ann, body=body):
            run.note("lam")
            if not is_well_formed(ctx, ann):
                raise run.diag(
                    DiagnosticKind.UNBOUND_NAME,
                    span=_span(term),
                    subject=term,
                    detail=_illformed_detail(ctx, ann, f"annotation on {x!r}"),
                )
            match mode:
                case Check(expected=Arrow(dom=dom, cod=cod)) if alpha_equal(dom, ann):
                    out = _infer(run, ctx.with_term(x, ann), Check(cod), body)
                    ty = Arrow(ann, out.ty)
                case Check(expected=other):
                    raise run.diag(
                        DiagnosticKind.TYPE_MISMATCH,
                        span=_span(term),
                        expected=other,
                        synthesized=_try_synthesize(ctx, term),
                        subject=term,
                    )
                case _:
                    out = _infer(run, ctx.with_term(x, ann), Synthesize(), body)
                    ty = Arrow(ann, out.ty)
            return InferOutcome(ty, Lam(x, ann, out.elaboration, span=_span(term)))

        case TLam(bound=x, body=body):
            run.note("tylam")
            match mode:
                case Check(expected=Forall(bound=y, body=ebody)):
                    inner = Check(substitute({y: TVar(x)}, ebody))
                    out = _infer(run, ctx.with_type_var(x), inner, body)
                case Check(expected=other):
                    raise run.diag(
                        DiagnosticKind.TYPE_MISMATCH,
                        span=_span(term),
                        expected=other,
                        synthesized=_try_synthesize(ctx, term),
                        subject=term,
                    )
                case _:
                    out = _infer(run, ctx.with_type_var(x), Synthesize(), body)
            return InferOutcome(
                Forall(x, out.ty), TLam(x, out.elaboration, span=_span(term))
            )

        case TApp(fun=f, targ=s):
            run.note("tyapp")
            if not is_well_formed(ctx, s):
                raise run.diag(
                    DiagnosticKind.UNBOUND_NAME,
                    span=_span(term),
                    subject=term,
                    detail=_illformed_detail(ctx, s, "type argument"),
                )
            fout = _infer(run, ctx, Synthesize(), f)
            if not isinstance(fout.ty, Forall):
                raise run.diag(
                    DiagnosticKind.APPLICAND_NOT_FORALL,
                    span=_span(term),
                    synthesized=fout.ty,
                    subject=term,
                )
            ty = substitute({fout.ty.bound: s}, fout.ty.body)
            elab = TApp(fout.elaboration, s, span=_span(term))
            return _conclude(run, ctx, mode, term, ty, elab)

        case App():
            match mode:
                case Synthesize():
                    return _app_synthesize(run, ctx, term)
                case Check(expected=expected):
                    return _app_check(run, ctx, term, expected)

    raise TypeError(term)


def _conclude(
    run: _Run, ctx: Context, mode: Mode, term: Term, ty: TypeExpr, elab: Term
) -> InferOutcome:
    if isinstance(mode, Check) and not alpha_equal(ty, mode.expected):
        raise run.diag(
            DiagnosticKind.TYPE_MISMATCH,
            span=_span(term),
            expected=mode.expected,
            synthesized=ty,
            subject=term,
        )
    return InferOutcome(ty, elab)


def _try_synthesize(ctx: Context, term: Term) -> TypeExpr | None:
    try:
        return _infer(_Run(), ctx, Synthesize(), term).ty
    except Diagnostic:
        return None


def _illformed_detail(ctx: Context, ty: TypeExpr, what: str) -> str:
    loose = sorted(free_type_vars(ty) - ctx.dtv)
    if loose:
        return f"{what} mentions unbound type variable {loose[0]!r}"
    return f"{what} uses a constructor at the wrong arity"


# --------------------------------------------- maximal application spines


def _app_synthesize(run: _Run, ctx: Context, term: App) -> InferOutcome:
    run.note("app-synth")
    out = _spine(run, ctx, Unknown(), term)
    ty = strip(out.deco)
    if __debug__ and not meta_vars_of_type(ctx, ty) <= meta_vars_of_term(ctx, out.partial):
        raise EngineInvariantError("spine type mentions metas the elaboration lost")
    if not out.solution.is_identity:
        raise EngineInvariantError("synthesis produced contextual bindings")
    if meta_vars_of_term(ctx, out.partial):
        raise run.diag(
            DiagnosticKind.UNSOLVED_META_VARIABLES,
            span=_span(term),
            synthesized=ty,
            subject=term,
        )
    if not isinstance(out.deco, Plain):
        raise EngineInvariantError("synthesis finished on a decorated result")
    return InferOutcome(ty, out.partial)


def _app_check(run: _Run, ctx: Context, term: App, expected: TypeExpr) -> InferOutcome:
    run.note("app-check")
    out = _spine(run, ctx, Exact(expected), term)
    mv_partial = meta_vars_of_term(ctx, out.partial)
    if mv_partial != out.solution.domain():
        raise run.diag(
            DiagnosticKind.UNSOLVED_META_VARIABLES,
            span=_span(term),
            expected=expected,
            synthesized=subst_type(out.solution, strip(out.deco)),
            subject=term,
        )
    final = subst_type(out.solution, strip(out.deco))
    if not alpha_equal(final, expected):
        raise EngineInvariantError("checked spine type does not restore the contextual type")
    elab = subst_type_args(out.solution.types(), out.partial)
    if __debug__ and meta_vars_of_term(ctx, elab):
        raise EngineInvariantError("checked elaboration still mentions meta-variables")
    return InferOutcome(expected, elab)


def _term_arg_count(t: Term) -> int:
    n = 0
    while isinstance(t, (App, TApp)):
        if isinstance(t, App):
            n += 1
        t = t.fun
    return n


def _spine(run: _Run, ctx: Context, proto: Prototype, term: Term) -> SpineOutcome:
    match term:
        case App(fun=f, arg=a):
            run.note("spine-arg")
            inner = _spine(run, ctx, ArrowTo(proto), f)
            return _apply(
                run,
                ctx,
                inner.partial,
                inner.deco,
                inner.solution,
                a,
                _term_arg_count(f) + 1,
            )
        case TApp(fun=f, targ=s):
            run.note("spine-tyarg")
            if not isinstance(proto, ArrowTo):
                raise EngineInvariantError("type argument reached a spine without a pending arrow")
            if not is_well_formed(ctx, s):
                raise run.diag(
                    DiagnosticKind.UNBOUND_NAME,
                    span=_span(term),
                    subject=term,
                    detail=_illformed_detail(ctx, s, "type argument"),
                )
            inner = _spine(run, ctx, proto, f)
            return _take_type_arg(run, ctx, inner, s, term)
        case _:
            run.note("spine-head")
            if not isinstance(proto, ArrowTo):
                raise EngineInvariantError("spine heads are only matched against arrow prototypes")
            out = _infer(run, ctx, Synthesize(), term)
            matched = _match(frozenset(), out.ty, proto, run.supply)
            if isinstance(matched, MatchFailure):
                raise _head_failure(run, term, out.ty, matched)
            if not matched.solution.is_identity:
                raise EngineInvariantError("head match solved variables it was not given")
            return SpineOutcome(matched.decorated, out.elaboration, Solution.identity())


def _head_failure(run: _Run, head: Term, head_ty: TypeExpr, failure: MatchFailure) -> Diagnostic:
    if failure.arity_overrun:
        return run.diag(
            DiagnosticKind.APPLICAND_NOT_ARROW,
            span=_span(head),
            synthesized=head_ty,
            subject=head,
        )
    against = failure.proto.ty if isinstance(failure.proto, Exact) else None
    return run.diag(
        DiagnosticKind.TYPE_MISMATCH,
        span=_span(head),
        expected=against,
        synthesized=failure.ty,
        contextual_match=ContextMatch(failure.ty, against) if against is not None else None,
        subject=head,
    )


def _take_type_arg(
    run: _Run, ctx: Context, inner: SpineOutcome, s: TypeExpr, term: Term
) -> SpineOutcome:
    match inner.deco:
        case DForall(bound=x, deco=r, body=body, deco_origin=org):
            if r is not None and not alpha_equal(r, s):
                raise run.diag(
                    DiagnosticKind.EXPLICIT_ARG_CONFLICT,
                    span=_span(term),
                    expected=r,
                    synthesized=s,
                    contextual_match=ContextMatch(org.partial, org.against) if org else None,
                    subject=term,
                )
            replaced = subst_decorated({x: s}, body, run.supply)
            if replaced is None:
                raise run.diag(
                    DiagnosticKind.SOLUTION_CONFLICT,
                    span=_span(term),
                    synthesized=s,
                    subject=term,
                    detail="explicit type argument cannot reveal the arrows this spine needs",
                )
            return SpineOutcome(replaced, TApp(inner.partial, s, span=_span(term)), inner.solution)
        case other:
            raise run.diag(
                DiagnosticKind.APPLICAND_NOT_FORALL,
                span=_span(term),
                synthesized=subst_type(inner.solution, strip(other)),
                subject=term,
            )


def _apply(
    run: _Run,
    ctx: Context,
    partial: Term,
    deco: DecoratedType,
    sol: Solution,
    arg: Term,
    arg_index: int,
) -> SpineOutcome:
    match deco:
        case DForall(bound=x, deco=r, body=body, deco_origin=org):
            run.note("peel")
            meta = run.supply.fresh_meta(x)
            opened = rename_deco({x: meta}, body)
            if r is not None:
                if org is not None:
                    origin = Contextual(substitute({x: TVar(meta)}, org.partial), org.against)
                else:
                    origin = Contextual(TVar(meta), r)
                sol = compose(sol, meta, r, origin)
            return _apply(
                run,
                ctx,
                TApp(partial, TVar(meta)),
                opened,
                sol,
                arg,
                arg_index,
            )
        case DArrow(dom=dom, cod=cod):
            return _consume_arrow(run, ctx, partial, dom, cod, sol, arg, arg_index)
        case Plain(ty=Arrow(dom=dom, cod=cod)):
            return _consume_arrow(run, ctx, partial, dom, Plain(cod), sol, arg, arg_index)
        case other:
            raise run.diag(
                DiagnosticKind.APPLICAND_NOT_ARROW,
                span=_span(arg),
                synthesized=subst_type(sol, strip(other)),
                subject=arg,
            )


def _consume_arrow(
    run: _Run,
    ctx: Context,
    partial: Term,
    dom: TypeExpr,
    cod: DecoratedType,
    sol: Solution,
    arg: Term,
    arg_index: int,
) -> SpineOutcome:
    expected = subst_type(sol, dom)
    unsolved = meta_vars_of_type(ctx, expected)
    if not unsolved:
        run.note("arg-check")
        try:
            out = _infer(run, ctx, Check(expected), arg)
        except Diagnostic as d:
            _attach_solution_origin(run, d, ctx, dom, expected, sol, arg)
            raise
        return SpineOutcome(cod, App(partial, out.elaboration), sol)

    run.note("arg-synth")
    try:
        out = _infer(run, ctx, Synthesize(), arg)
    except Diagnostic as d:
        if d.subject is arg and d.expected is None:
            d.expected = expected
            run.refresh_display(d)
        raise
    inst = match_first_order(
        unsolved, expected, out.ty, origin=Synthetic(arg_index, out.ty)
    )
    if inst is None:
        raise run.diag(
            DiagnosticKind.TYPE_MISMATCH,
            span=_span(arg),
            expected=expected,
            synthesized=out.ty,
            synthetic_match=ArgMatch(expected, out.ty, arg_index),
            subject=arg,
        )
    replaced = subst_decorated(inst, cod, run.supply)
    if replaced is None:
        raise run.diag(
            DiagnosticKind.SOLUTION_CONFLICT,
            span=_span(arg),
            expected=expected,
            synthesized=out.ty,
            synthetic_match=ArgMatch(expected, out.ty, arg_index),
            subject=arg,
            detail="the synthesized instantiation cannot reveal the arrows this spine needs",
        )
    instantiated = subst_type_args(inst.types(), partial)
    return SpineOutcome(replaced, App(instantiated, out.elaboration), sol)


def _attach_solution_origin(
    run: _Run,
    d: Diagnostic,
    ctx: Context,
    dom: TypeExpr,
    expected: TypeExpr,
    sol: Solution,
    arg: Term,
) -> None:
    """Point a failed argument check back at the match that fixed its domain."""
    if d.subject is not arg:
        return
    solved = [v for v in free_type_vars(dom) if v in sol]
    if not solved:
        return
    d.expected = dom
    d.resolved = expected
    for v in solved:
        origin = sol.binding(v).origin
        if isinstance(origin, Contextual) and d.contextual_match is None:
            d.contextual_match = ContextMatch(origin.partial, origin.against)
        elif isinstance(origin, Synthetic) and d.synthetic_match is None:
            d.synthetic_match = ArgMatch(dom, origin.arg_type, origin.arg_index)
    run.refresh_display(d)
