"""Executable declarative rules and test corpora.

``verify_spec`` replays the declarative spine rules deterministically
against a claimed (type, partial elaboration, solution) triple, using
the solution to resolve the one nondeterministic choice (guess or
decline at each quantifier).  ``search_spec`` enumerates derivations
outright over a finite candidate pool.  Both type sub-terms with the
bidirectional rules but keep their own spine bookkeeping and their own
instantiation solver, so they stay an independent route from the
prototype-matching engine they audit.

The module also hosts the erasure enumerator, the conditions under
which synthesis is complete for an erasure, and the deterministic
corpus generators the property suites run on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .infer import Check, Diagnostic, Synthesize, infer, spine_infer
from .syntax import (
    App,
    Arrow,
    Con,
    Context,
    Contextual,
    Forall,
    Lam,
    Solution,
    TApp,
    TLam,
    TVar,
    Term,
    TermBind,
    TypeExpr,
    Unknown,
    Var,
    alpha_equal,
    alpha_equal_term,
    canon_term,
    canon_type,
    compose,
    free_type_vars,
    is_well_formed,
    meta_vars_of_term,
    meta_vars_of_type,
    spine_parts,
    subst_type,
    subst_type_args,
    substitute,
)

Triple = tuple[TypeExpr, Term, Solution]


@dataclass(frozen=True)
class SpecVerdict:
    accepted: bool
    trace: tuple[str, ...]
    reason: str | None = None


def _is_type(item) -> bool:
    return isinstance(item, (TVar, Arrow, Forall, Con))


# ------------------------------------------------- instantiation solving


def _solve_instantiation(
    metas: frozenset[str] | set[str], pattern: TypeExpr, target: TypeExpr
) -> dict[str, TypeExpr] | None:
    """Unique substitution over ``metas`` equating pattern with target.

    Deliberately separate from the matcher module: the oracle must not
    lean on the machinery it is auditing.
    """
    out: dict[str, TypeExpr] = {}

    def go(p, t, envp, envt, depth) -> bool:
        match p:
            case TVar(name=x):
                if x in envp:
                    return isinstance(t, TVar) and envt.get(t.name) == envp[x]
                if x in metas:
                    if free_type_vars(t) & set(envt):
                        return False
                    if x in out:
                        return alpha_equal(out[x], t)
                    out[x] = t
                    return True
                return isinstance(t, TVar) and t.name == x and t.name not in envt
            case Arrow(dom=d, cod=c):
                return (
                    isinstance(t, Arrow)
                    and go(d, t.dom, envp, envt, depth)
                    and go(c, t.cod, envp, envt, depth)
                )
            case Forall(bound=x, body=b):
                return isinstance(t, Forall) and go(
                    b, t.body, {**envp, x: depth}, {**envt, t.bound: depth}, depth + 1
                )
            case Con(con=c, args=args):
                return (
                    isinstance(t, Con)
                    and t.con == c
                    and len(t.args) == len(args)
                    and all(go(a, b, envp, envt, depth) for a, b in zip(args, t.args))
                )
        raise TypeError(p)

    return out if go(pattern, target, {}, {}, 0) else None


# ---------------------------------------------------------- verification


def verify_spec(
    ctx: Context, ctx_ty: TypeExpr | None, term: Term, claimed: Triple
) -> SpecVerdict:
    """Deterministically replay the declarative rules against a claim.

    At each quantifier the claimed partial elaboration names the type
    argument: a meta-variable bound by the claimed solution means
    "guess that binding", an unbound meta-variable means "decline", and
    a concrete type means "decline now, solve it from a later argument".
    """
    if not isinstance(term, App):
        raise ValueError("only term applications have spine derivations")
    claimed_ty, claimed_partial, claimed_sol = claimed
    trace: list[str] = []

    def reject(reason: str) -> SpecVerdict:
        return SpecVerdict(False, tuple(trace), reason)

    head, items = spine_parts(term)
    phead, pitems = spine_parts(claimed_partial)
    try:
        hout = infer(ctx, Synthesize(), head)
    except Diagnostic as d:
        return reject(f"head does not synthesize: {d.kind.value}")
    trace.append("PHead")
    if not alpha_equal_term(hout.elaboration, phead):
        return reject("claimed head elaboration differs")

    ty = hout.ty
    sol = Solution.identity()
    replay: list[tuple[str, object]] = []
    fresh = itertools.count()
    pi = 0

    def take_claimed_type() -> TypeExpr | None:
        nonlocal pi
        if pi < len(pitems) and _is_type(pitems[pi]):
            out = pitems[pi]
            pi += 1
            return out
        return None

    for item in items:
        if _is_type(item):
            trace.append("PTApp")
            if not isinstance(ty, Forall):
                return reject("explicit type argument but no quantifier to consume")
            got = take_claimed_type()
            if got is None or not alpha_equal(got, item):
                return reject("claimed elaboration drops or alters an explicit type argument")
            ty = substitute({ty.bound: item}, ty.body)
            replay.append(("ty", item))
            continue

        trace.append("PApp")
        while isinstance(ty, Forall):
            trace.append("PForall")
            got = take_claimed_type()
            if got is None:
                return reject("claimed elaboration is missing an inserted type argument")
            if isinstance(got, TVar) and got.name not in ctx.dtv:
                meta = got.name
                if meta in claimed_sol:
                    try:
                        sol = compose(sol, meta, claimed_sol.type_of(meta), claimed_sol.binding(meta).origin)
                    except ValueError:
                        return reject("claimed solution reuses a meta-variable name")
                # an unbound meta-variable stands for declining the guess
            else:
                meta = f"?v{next(fresh)}"  # solved later by a synthesizing argument
            ty = substitute({ty.bound: TVar(meta)}, ty.body)
            replay.append(("ty", TVar(meta)))
        if not isinstance(ty, Arrow):
            return reject("argument applied but the type reveals no arrow")

        dom = subst_type(sol, ty.dom)
        unsolved = meta_vars_of_type(ctx, dom)
        if not unsolved:
            trace.append("PChk")
            try:
                aout = infer(ctx, Check(dom), item)
            except Diagnostic as d:
                return reject(f"argument does not check: {d.kind.value}")
            ty = ty.cod
        else:
            trace.append("PSyn")
            try:
                aout = infer(ctx, Synthesize(), item)
            except Diagnostic as d:
                return reject(f"argument does not synthesize: {d.kind.value}")
            inst = _solve_instantiation(unsolved, dom, aout.ty)
            if inst is None:
                return reject("argument type is not an instance of the expected domain")
            ty = substitute(inst, ty.cod)
            replay = [
                ("ty", substitute(inst, entry)) if tag == "ty" else (tag, entry)
                for tag, entry in replay
            ]
        if pi >= len(pitems) or _is_type(pitems[pi]):
            return reject("claimed elaboration is missing a term argument")
        if not alpha_equal_term(pitems[pi], aout.elaboration):
            return reject("claimed argument elaboration differs")
        replay.append(("tm", aout.elaboration))
        pi += 1

    if pi != len(pitems):
        return reject("claimed elaboration has extra spine entries")

    rebuilt: Term = hout.elaboration
    for tag, entry in replay:
        rebuilt = TApp(rebuilt, entry) if tag == "ty" else App(rebuilt, entry)

    trace.append("shim")
    if meta_vars_of_type(ctx, ty) != sol.domain():
        return reject("type meta-variables do not line up with the solution domain")
    if not alpha_equal(ty, claimed_ty):
        return reject("claimed type differs from the replayed type")
    if not alpha_equal_term(rebuilt, claimed_partial):
        return reject("claimed partial elaboration differs from the replayed one")
    if not sol.equivalent(claimed_sol):
        return reject("claimed solution differs from the replayed one")

    if ctx_ty is None:
        if not sol.is_identity:
            return reject("synthesis must not keep contextual bindings")
        if meta_vars_of_term(ctx, rebuilt):
            return reject("synthesis left unsolved meta-variables in the elaboration")
    else:
        if meta_vars_of_term(ctx, rebuilt) != sol.domain():
            return reject("checking left meta-variables the solution does not cover")
        if not alpha_equal(subst_type(sol, ty), ctx_ty):
            return reject("solved type does not restore the contextual type")
    return SpecVerdict(True, tuple(trace))


# --------------------------------------------------------------- search


def subtypes(ty: TypeExpr) -> Iterator[TypeExpr]:
    yield ty
    match ty:
        case Arrow(dom=d, cod=c):
            yield from subtypes(d)
            yield from subtypes(c)
        case Forall(body=b):
            yield from subtypes(b)
        case Con(args=args):
            for a in args:
                yield from subtypes(a)


def default_candidates(ctx: Context, ctx_ty: TypeExpr | None, term: Term) -> list[TypeExpr]:
    """Finite guess pool: sub-types of the contextual type, of context
    bindings, and of whatever the spine's arguments synthesize."""
    pool: list[TypeExpr] = []
    if ctx_ty is not None:
        pool.extend(subtypes(ctx_ty))
    for entry in ctx.entries:
        if isinstance(entry, TermBind):
            pool.extend(subtypes(entry.ty))
    _, items = spine_parts(term)
    for item in items:
        if not _is_type(item):
            try:
                pool.extend(subtypes(infer(ctx, Synthesize(), item).ty))
            except Diagnostic:
                pass
    out: list[TypeExpr] = []
    seen: set[str] = set()
    for ty in pool:
        if not is_well_formed(ctx, ty):
            continue
        key = canon_type(ty)
        if key not in seen:
            seen.add(key)
            out.append(ty)
    return out


def search_spec(
    ctx: Context,
    ctx_ty: TypeExpr | None,
    term: Term,
    candidates: list[TypeExpr] | None = None,
) -> list[Triple]:
    """Enumerate every declarative spine derivation over the guess pool.

    Returns raw derivation triples, before the shim and mode side
    conditions; ``passes_side_conditions`` filters them.
    """
    if not isinstance(term, App):
        raise ValueError("only term applications have spine derivations")
    if candidates is None:
        candidates = default_candidates(ctx, ctx_ty, term)
    head, items = spine_parts(term)
    try:
        hout = infer(ctx, Synthesize(), head)
    except Diagnostic:
        return []
    fresh = itertools.count()

    def walk(i: int, ty, partial, sol) -> Iterator[Triple]:
        if i == len(items):
            yield ty, partial, sol
            return
        item = items[i]
        if _is_type(item):
            if isinstance(ty, Forall) and is_well_formed(ctx, item):
                yield from walk(
                    i + 1,
                    substitute({ty.bound: item}, ty.body),
                    TApp(partial, item),
                    sol,
                )
            return
        yield from apply(i, ty, partial, sol, item)

    def apply(i: int, ty, partial, sol, arg) -> Iterator[Triple]:
        if isinstance(ty, Forall):
            meta = f"?g{next(fresh)}"
            opened = substitute({ty.bound: TVar(meta)}, ty.body)
            applied = TApp(partial, TVar(meta))
            yield from apply(i, opened, applied, sol, arg)
            for cand in candidates:
                guessed = compose(sol, meta, cand, Contextual(TVar(meta), cand))
                yield from apply(i, opened, applied, guessed, arg)
            return
        if not isinstance(ty, Arrow):
            return
        dom = subst_type(sol, ty.dom)
        unsolved = meta_vars_of_type(ctx, dom)
        if not unsolved:
            try:
                aout = infer(ctx, Check(dom), arg)
            except Diagnostic:
                return
            yield from walk(i + 1, ty.cod, App(partial, aout.elaboration), sol)
        else:
            try:
                aout = infer(ctx, Synthesize(), arg)
            except Diagnostic:
                return
            inst = _solve_instantiation(unsolved, dom, aout.ty)
            if inst is None:
                return
            yield from walk(
                i + 1,
                substitute(inst, ty.cod),
                App(subst_type_args(inst, partial), aout.elaboration),
                sol,
            )

    out: list[Triple] = []
    seen: set = set()
    for triple in walk(0, hout.ty, hout.elaboration, Solution.identity()):
        key = canonical_triple_key(triple)
        if key not in seen:
            seen.add(key)
            out.append(triple)
    return out


def passes_side_conditions(ctx: Context, ctx_ty: TypeExpr | None, triple: Triple) -> bool:
    """The shim plus the synthesis/checking discharge conditions."""
    ty, partial, sol = triple
    if meta_vars_of_type(ctx, ty) != sol.domain():
        return False
    if ctx_ty is None:
        return sol.is_identity and not meta_vars_of_term(ctx, partial)
    return meta_vars_of_term(ctx, partial) == sol.domain() and alpha_equal(
        subst_type(sol, ty), ctx_ty
    )


def canonical_triple_key(triple: Triple):
    """Hashable key identifying triples up to meta-variable renaming."""
    ty, partial, sol = triple
    order: list[str] = []

    def note(name: str) -> None:
        if name.startswith("?") and name not in order:
            order.append(name)

    def scan_term(t: Term) -> None:
        match t:
            case App(fun=f):
                scan_term(f)
            case TApp(fun=f, targ=s):
                scan_term(f)
                for v in sorted(free_type_vars(s)):
                    note(v)
            case _:
                pass

    scan_term(partial)
    for v in sorted(free_type_vars(ty)):
        note(v)
    for v in sorted(sol.domain()):
        note(v)
    rename = {name: TVar(f"?c{i}") for i, name in enumerate(order)}
    renamed_sol = tuple(
        sorted(
            (rename[k].name if k in rename else k, canon_type(substitute(rename, b.ty)))
            for k, b in sol.bindings.items()
        )
    )
    return (
        canon_type(substitute(rename, ty)),
        canon_term(subst_type_args(rename, partial)),
        renamed_sol,
    )


def triples_equivalent(a: Triple, b: Triple) -> bool:
    return canonical_triple_key(a) == canonical_triple_key(b)


# -------------------------------------------------------------- erasures


def enumerate_erasures(term: Term) -> list[Term]:
    """All external terms that erase annotations/type arguments of ``term``.

    Lambda annotations erase pointwise; a type argument erases only
    together with every type argument to its right in the same
    applicand chain.  The term itself is always included.
    """

    def norm(t: Term) -> list[Term]:
        match t:
            case Var():
                return [t]
            case Lam(bound=x, ann=ann, body=b):
                out = []
                for body in norm(b):
                    out.append(Lam(x, ann, body))
                    if ann is not None:
                        out.append(Lam(x, None, body))
                return out
            case TLam(bound=x, body=b):
                return [TLam(x, body) for body in norm(b)]
            case App(fun=f, arg=a):
                return [
                    App(fun, arg) for fun in norm_applicand(f) for arg in norm(a)
                ]
            case TApp(fun=f, targ=s):
                return [TApp(fun, s) for fun in norm(f)]
        raise TypeError(t)

    def norm_applicand(t: Term) -> list[Term]:
        if isinstance(t, TApp):
            return norm_applicand(t.fun) + [TApp(fun, t.targ) for fun in norm(t.fun)]
        return norm(t)

    out: list[Term] = []
    seen: set[str] = set()
    for t in norm(term):
        key = canon_term(t)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


# ----------------------------------------- completeness side conditions


def _partial_synth(ctx: Context, term: Term) -> tuple[TypeExpr, Term] | None:
    """Declarative spine synthesis with every guess declined."""
    head, items = spine_parts(term)
    try:
        hout = infer(ctx, Synthesize(), head)
    except Diagnostic:
        return None
    ty, partial = hout.ty, hout.elaboration
    fresh = itertools.count()
    for item in items:
        if _is_type(item):
            if not isinstance(ty, Forall) or not is_well_formed(ctx, item):
                return None
            ty = substitute({ty.bound: item}, ty.body)
            partial = TApp(partial, item)
            continue
        while isinstance(ty, Forall):
            meta = f"?p{next(fresh)}"
            ty = substitute({ty.bound: TVar(meta)}, ty.body)
            partial = TApp(partial, TVar(meta))
        if not isinstance(ty, Arrow):
            return None
        unsolved = meta_vars_of_type(ctx, ty.dom)
        if not unsolved:
            try:
                aout = infer(ctx, Check(ty.dom), item)
            except Diagnostic:
                return None
            partial = App(partial, aout.elaboration)
            ty = ty.cod
        else:
            try:
                aout = infer(ctx, Synthesize(), item)
            except Diagnostic:
                return None
            inst = _solve_instantiation(unsolved, ty.dom, aout.ty)
            if inst is None:
                return None
            partial = App(subst_type_args(inst, partial), aout.elaboration)
            ty = substitute(inst, ty.cod)
    return ty, partial


def _reveals_arrow_under_quantifiers(ty: TypeExpr) -> bool:
    while isinstance(ty, Forall):
        ty = ty.body
    return isinstance(ty, Arrow)


def check_weak_completeness_conditions(ctx: Context, internal: Term, erased: Term) -> bool:
    """Sufficient conditions for synthesis to recover ``internal`` from
    its erasure ``erased``: annotations survive, no maximal application
    is left with unsolved meta-variables, and every applicand's partial
    type reveals the structure its arguments need."""

    def walk(ctx: Context, e: Term, t: Term, applicand: bool) -> bool:
        match e:
            case Var():
                return True
            case Lam(bound=x, ann=ann, body=eb):
                if not isinstance(t, Lam) or t.ann is None:
                    return False
                return walk(ctx.with_term(x, ann), eb, t.body, False)
            case TLam(bound=x, body=eb):
                if not isinstance(t, TLam):
                    return False
                return walk(ctx.with_type_var(x), eb, t.body, False)
            case App(fun=e1, arg=e2):
                if not isinstance(t, App):
                    return False
                if not applicand:
                    try:
                        out = spine_infer(ctx, Unknown(), t)
                    except Diagnostic:
                        out = None
                    if out is not None and meta_vars_of_term(ctx, out.partial):
                        return False
                ps = _partial_synth(ctx, t.fun)
                if ps is not None and not _reveals_arrow_under_quantifiers(ps[0]):
                    return False
                return walk(ctx, e1, t.fun, True) and walk(ctx, e2, t.arg, False)
            case TApp(fun=e1, targ=s):
                if isinstance(t, TApp) and alpha_equal(t.targ, s):
                    ps = _partial_synth(ctx, t.fun)
                    if ps is not None and not isinstance(ps[0], Forall):
                        return False
                    return walk(ctx, e1, t.fun, True)
                return walk(ctx, e1, t, True)
        raise TypeError(e)

    return walk(ctx, internal, erased, False)


# ------------------------------------------------------ corpus generation

STANDARD_SIGNATURE: Mapping[str, int] = {"Nat": 0, "B": 0, "Pair": 2, "Sum": 2}


def standard_context() -> Context:
    """The small well-known context the corpora and examples run in."""
    nat = Con("Nat")
    b = Con("B")
    ctx = Context.empty(STANDARD_SIGNATURE)
    x, y = TVar("X"), TVar("Y")
    ctx = ctx.with_term("z", nat)
    ctx = ctx.with_term("suc", Arrow(nat, nat))
    ctx = ctx.with_term("tt", b)
    ctx = ctx.with_term("ident", Forall("X", Arrow(x, x)))
    ctx = ctx.with_term(
        "pair", Forall("X", Forall("Y", Arrow(x, Arrow(y, Con("Pair", (x, y))))))
    )
    ctx = ctx.with_term(
        "right", Forall("X", Forall("Y", Arrow(y, Con("Sum", (x, y)))))
    )
    ctx = ctx.with_term(
        "rapp", Forall("X", Forall("Y", Arrow(x, Arrow(Arrow(x, y), y))))
    )
    ctx = ctx.with_term("bot", Forall("X", x))
    return ctx


def type_size(ty: TypeExpr) -> int:
    match ty:
        case TVar():
            return 1
        case Arrow(dom=d, cod=c):
            return 1 + type_size(d) + type_size(c)
        case Forall(body=b):
            return 1 + type_size(b)
        case Con(args=args):
            return 1 + sum(type_size(a) for a in args)
    raise TypeError(ty)


def term_size(t: Term) -> int:
    match t:
        case Var():
            return 1
        case Lam(ann=ann, body=b):
            return 1 + (type_size(ann) if ann is not None else 0) + term_size(b)
        case TLam(body=b):
            return 1 + term_size(b)
        case App(fun=f, arg=a):
            return 1 + term_size(f) + term_size(a)
        case TApp(fun=f, targ=s):
            return 1 + term_size(f) + type_size(s)
    raise TypeError(t)


DEFAULT_TYPE_POOL: tuple[TypeExpr, ...] = (
    Con("Nat"),
    Con("B"),
    Arrow(Con("Nat"), Con("Nat")),
    Forall("X", Arrow(TVar("X"), TVar("X"))),
)


def enumerate_internal_terms(
    ctx: Context,
    max_size: int,
    type_pool: tuple[TypeExpr, ...] = DEFAULT_TYPE_POOL,
) -> list[tuple[Term, TypeExpr]]:
    """Every well-typed internal term of the given size or less.

    Deterministic bottom-up enumeration; binder names are minted from
    the context depth so no term shadows anything.
    """
    memo: dict[tuple, list[tuple[Term, TypeExpr]]] = {}

    def terms(ctx: Context, size: int) -> list[tuple[Term, TypeExpr]]:
        key = (ctx.entries, size)
        if key in memo:
            return memo[key]
        out: list[tuple[Term, TypeExpr]] = []
        if size >= 1:
            for entry in ctx.entries:
                if isinstance(entry, TermBind):
                    out.append((Var(entry.name), entry.ty))
        if size >= 2:
            depth = len(ctx.entries)
            tv = f"X{depth}"
            for body, bty in terms(ctx.with_type_var(tv), size - 1):
                out.append((TLam(tv, body), Forall(tv, bty)))
            for ann in type_pool:
                budget = size - 1 - type_size(ann)
                if budget < 1 or not is_well_formed(ctx, ann):
                    continue
                name = f"x{depth}"
                for body, bty in terms(ctx.with_term(name, ann), budget):
                    out.append((Lam(name, ann, body), Arrow(ann, bty)))
            for fsize in range(1, size - 1):
                for fun, fty in terms(ctx, fsize):
                    if isinstance(fty, Forall):
                        for targ in type_pool:
                            if type_size(targ) <= size - 1 - fsize and is_well_formed(
                                ctx, targ
                            ):
                                out.append(
                                    (
                                        TApp(fun, targ),
                                        substitute({fty.bound: targ}, fty.body),
                                    )
                                )
                    if isinstance(fty, Arrow):
                        want = canon_type(fty.dom)
                        for arg, aty in terms(ctx, size - 1 - fsize):
                            if canon_type(aty) == want:
                                out.append((App(fun, arg), fty.cod))
        memo[key] = out
        return out

    collected: list[tuple[Term, TypeExpr]] = []
    seen: set[str] = set()
    for s in range(1, max_size + 1):
        for term, ty in terms(ctx, s):
            if term_size(term) == s:
                key = canon_term(term)
                if key not in seen:
                    seen.add(key)
                    collected.append((term, ty))
    return collected


def enumerate_matcher_types(max_size: int, metas: tuple[str, ...] = ("M",)) -> list[TypeExpr]:
    """Types over one rigid variable, the metas, and a two-constructor
    signature, for exhaustive matcher audits."""
    base: list[TypeExpr] = [TVar("R"), Con("Nat")] + [TVar(m) for m in metas]
    by_size: dict[int, list[TypeExpr]] = {1: list(base)}

    def of(size: int) -> list[TypeExpr]:
        if size in by_size:
            return by_size[size]
        out: list[TypeExpr] = []
        for lsize in range(1, size - 1):
            for dom in of(lsize):
                for cod in of(size - 1 - lsize):
                    out.append(Arrow(dom, cod))
                    out.append(Con("Pair", (dom, cod)))
        for body in of(size - 1):
            out.append(Forall("A", substitute({"R": TVar("A")}, body)))
        by_size[size] = out
        return out

    collected: list[TypeExpr] = []
    seen: set[str] = set()
    for s in range(1, max_size + 1):
        for ty in of(s):
            key = canon_type(ty)
            if key not in seen:
                seen.add(key)
                collected.append(ty)
    return collected
