"""Core syntax for a System F elaborator with spine-local type inference.

Defines types, terms, typing contexts, prototypes (partially known
contextual types), decorated types (the shapes produced by prototype
matching), and solutions (meta-variable instantiations tagged with the
evidence that produced them), plus the structural operations the rest
of the package builds on: free variables, well-formedness, alpha
equality, capture-avoiding substitution, and meta-variable accounting.

Meta-variables are ordinary type variables drawn from a reserved
namespace (``?X0``, ``?X1``, ...) that the surface parser cannot
produce, so a type variable is a meta-variable exactly when it is not
declared in the ambient context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union


# ---------------------------------------------------------------- spans


@dataclass(frozen=True)
class Span:
    """Source extent as 1-based (line, col) .. (end_line, end_col)."""

    line: int
    col: int
    end_line: int
    end_col: int

    def to_json(self) -> dict:
        return {
            "line": self.line,
            "col": self.col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


def _span_field():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TVar:
    """Type variable reference (possibly a meta-variable)."""

    name: str
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Arrow:
    dom: TypeExpr
    cod: TypeExpr
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Forall:
    bound: str
    body: TypeExpr
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Con:
    """Saturated application of a declared type constructor."""

    con: str
    args: tuple[TypeExpr, ...] = ()
    span: Span | None = _span_field()


TypeExpr = Union[TVar, Arrow, Forall, Con]


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Lam:
    """Term abstraction; ``ann`` is None for a bare (unannotated) binder."""

    bound: str
    ann: TypeExpr | None
    body: Term
    span: Span | None = _span_field()


@dataclass(frozen=True)
class TLam:
    bound: str
    body: Term
    span: Span | None = _span_field()


@dataclass(frozen=True)
class App:
    fun: Term
    arg: Term
    span: Span | None = _span_field()


@dataclass(frozen=True)
class TApp:
    fun: Term
    targ: TypeExpr
    span: Span | None = _span_field()


Term = Union[Var, Lam, TLam, App, TApp]


def is_application(t: Term) -> bool:
    return isinstance(t, App)


def spine_parts(t: Term) -> tuple[Term, list[Term | TypeExpr]]:
    """Split an application spine into its head and argument list.

    Type arguments appear in the list as TypeExpr, term arguments as
    Term, both in application order (leftmost first).
    """
    items: list[Term | TypeExpr] = []
    while True:
        match t:
            case App(fun=f, arg=a):
                items.append(a)
                t = f
            case TApp(fun=f, targ=s):
                items.append(s)
                t = f
            case _:
                items.reverse()
                return t, items


# ------------------------------------------------------------- contexts


@dataclass(frozen=True)
class TyVarDecl:
    name: str


@dataclass(frozen=True)
class TermBind:
    name: str
    ty: TypeExpr


class Context:
    """Ordered typing context plus a constructor signature.

    Immutable: the ``with_*`` methods return extended copies.  Declared
    names must be distinct; extension raises ValueError on shadowing or
    on binding a term to an ill-formed type.
    """

    __slots__ = ("entries", "signature", "_dtv", "_types", "_names")

    def __init__(
        self,
        entries: tuple[TyVarDecl | TermBind, ...] = (),
        signature: Mapping[str, int] | None = None,
    ):
        self.entries = entries
        self.signature = dict(signature) if signature else {}
        dtv: set[str] = set()
        types: dict[str, TypeExpr] = {}
        for entry in entries:
            name = entry.name
            if name in dtv or name in types:
                raise ValueError(f"duplicate declaration of {name!r}")
            if isinstance(entry, TyVarDecl):
                dtv.add(name)
            else:
                types[name] = entry.ty
        self._dtv = frozenset(dtv)
        self._types = types
        self._names = frozenset(types) | self._dtv
        for entry in entries:
            if isinstance(entry, TermBind) and not is_well_formed(self, entry.ty):
                raise ValueError(f"type bound to {entry.name!r} is not well-formed")

    @classmethod
    def empty(cls, signature: Mapping[str, int] | None = None) -> Context:
        return cls((), signature)

    def with_type_var(self, name: str) -> Context:
        if name in self._names:
            raise ValueError(f"duplicate declaration of {name!r}")
        return Context(self.entries + (TyVarDecl(name),), self.signature)

    def with_term(self, name: str, ty: TypeExpr) -> Context:
        if name in self._names:
            raise ValueError(f"duplicate declaration of {name!r}")
        if not is_well_formed(self, ty):
            raise ValueError(f"type bound to {name!r} is not well-formed")
        return Context(self.entries + (TermBind(name, ty),), self.signature)

    def with_con(self, name: str, arity: int) -> Context:
        if name in self.signature:
            raise ValueError(f"duplicate constructor {name!r}")
        sig = dict(self.signature)
        sig[name] = arity
        return Context(self.entries, sig)

    def lookup(self, name: str) -> TypeExpr | None:
        return self._types.get(name)

    def arity(self, con: str) -> int | None:
        return self.signature.get(con)

    @property
    def dtv(self) -> frozenset[str]:
        return self._dtv

    @property
    def names(self) -> frozenset[str]:
        return self._names

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Context)
            and self.entries == other.entries
            and self.signature == other.signature
        )

    def __repr__(self) -> str:
        return f"Context({self.entries!r}, {self.signature!r})"


def declared_type_vars(ctx: Context) -> frozenset[str]:
    """Type variables declared by the context, in scope for terms under it."""
    return ctx.dtv


# ------------------------------------------------------------ prototypes


@dataclass(frozen=True)
class Unknown:
    """No contextual information: the fully unknown prototype."""


@dataclass(frozen=True)
class Exact:
    ty: TypeExpr


@dataclass(frozen=True)
class ArrowTo:
    """An arrow with unknown domain whose codomain is ``rest``."""

    rest: Prototype


Prototype = Union[Unknown, Exact, ArrowTo]


def proto_arity(p: Prototype) -> int:
    n = 0
    while isinstance(p, ArrowTo):
        n += 1
        p = p.rest
    return n


def proto_free_vars(p: Prototype) -> frozenset[str]:
    match p:
        case Unknown():
            return frozenset()
        case Exact(ty=t):
            return free_type_vars(t)
        case ArrowTo(rest=r):
            return proto_free_vars(r)
    raise TypeError(p)


# ------------------------------------------------------------ provenance


@dataclass(frozen=True)
class Contextual:
    """Solved by matching ``partial`` against the contextual type ``against``."""

    partial: TypeExpr
    against: TypeExpr


@dataclass(frozen=True)
class Synthetic:
    """Solved against the synthesized type of argument ``arg_index`` (1-based)."""

    arg_index: int
    arg_type: TypeExpr


@dataclass(frozen=True)
class Explicit:
    """Supplied directly as an explicit type argument."""


Provenance = Union[Contextual, Synthetic, Explicit]


@dataclass(frozen=True)
class Binding:
    ty: TypeExpr
    origin: Provenance


class Solution:
    """Finite map from meta-variable names to bindings.

    Immutable by discipline; ``compose`` returns an extended copy.
    """

    __slots__ = ("bindings",)

    def __init__(self, bindings: Mapping[str, Binding] | None = None):
        self.bindings = dict(bindings) if bindings else {}

    @classmethod
    def identity(cls) -> Solution:
        return cls()

    def __contains__(self, name: str) -> bool:
        return name in self.bindings

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self) -> Iterator[str]:
        return iter(self.bindings)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Solution) and self.bindings == other.bindings

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v.ty!r}" for k, v in self.bindings.items())
        return f"Solution({{{inner}}})"

    @property
    def is_identity(self) -> bool:
        return not self.bindings

    def domain(self) -> frozenset[str]:
        return frozenset(self.bindings)

    def type_of(self, name: str) -> TypeExpr | None:
        b = self.bindings.get(name)
        return b.ty if b else None

    def binding(self, name: str) -> Binding | None:
        return self.bindings.get(name)

    def types(self) -> dict[str, TypeExpr]:
        return {k: v.ty for k, v in self.bindings.items()}

    def without(self, name: str) -> Solution:
        if name not in self.bindings:
            return self
        rest = dict(self.bindings)
        del rest[name]
        return Solution(rest)

    def restrict(self, names) -> Solution:
        return Solution({k: v for k, v in self.bindings.items() if k in names})

    def equivalent(self, other: Solution) -> bool:
        """Same domain and alpha-equal solved types (provenance ignored)."""
        if self.domain() != other.domain():
            return False
        return all(
            alpha_equal(b.ty, other.bindings[k].ty) for k, b in self.bindings.items()
        )


def compose(sol: Solution, name: str, ty: TypeExpr, origin: Provenance) -> Solution:
    """Extend a solution with one more binding; the name must be new."""
    if name in sol:
        raise ValueError(f"solution already binds {name!r}")
    merged = dict(sol.bindings)
    merged[name] = Binding(ty, origin)
    return Solution(merged)


# -------------------------------------------------------- decorated types


@dataclass(frozen=True)
class Plain:
    """An undecorated type: no contextual information was usable."""

    ty: TypeExpr


@dataclass(frozen=True)
class DArrow:
    dom: TypeExpr
    cod: DecoratedType


@dataclass(frozen=True)
class DForall:
    """Quantifier with an optional contextual instantiation recorded for it.

    ``deco_origin`` remembers the match that produced an informative
    decoration; it is diagnostic metadata and takes no part in equality.
    """

    bound: str
    deco: TypeExpr | None
    body: DecoratedType
    deco_origin: Contextual | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Stuck:
    """A meta-variable that must later reveal the arrows ``proto`` demands."""

    meta: str
    proto: Prototype  # always of ArrowTo shape


DecoratedType = Union[Plain, DArrow, DForall, Stuck]


def strip(w: DecoratedType) -> TypeExpr:
    """Forget decorations, recovering the underlying (partial) type."""
    match w:
        case Plain(ty=t):
            return t
        case DArrow(dom=d, cod=c):
            return Arrow(d, strip(c))
        case DForall(bound=x, body=b):
            return Forall(x, strip(b))
        case Stuck(meta=m):
            return TVar(m)
    raise TypeError(w)


def deco_arity(w: DecoratedType) -> int:
    """Number of argument positions the decoration spells out."""
    n = 0
    while isinstance(w, DArrow):
        n += 1
        w = w.cod
    return n


# ------------------------------------------------------- free variables


def free_type_vars(ty: TypeExpr) -> frozenset[str]:
    match ty:
        case TVar(name=x):
            return frozenset((x,))
        case Arrow(dom=d, cod=c):
            return free_type_vars(d) | free_type_vars(c)
        case Forall(bound=x, body=b):
            return free_type_vars(b) - {x}
        case Con(args=args):
            out: frozenset[str] = frozenset()
            for a in args:
                out |= free_type_vars(a)
            return out
    raise TypeError(ty)


def is_well_formed(ctx: Context, ty: TypeExpr, extra: frozenset[str] = frozenset()) -> bool:
    """True iff every variable is declared and constructor arities match."""
    match ty:
        case TVar(name=x):
            return x in ctx.dtv or x in extra
        case Arrow(dom=d, cod=c):
            return is_well_formed(ctx, d, extra) and is_well_formed(ctx, c, extra)
        case Forall(bound=x, body=b):
            return is_well_formed(ctx, b, extra | {x})
        case Con(con=c, args=args):
            if ctx.arity(c) != len(args):
                return False
            return all(is_well_formed(ctx, a, extra) for a in args)
    raise TypeError(ty)


def meta_vars_of_type(ctx: Context, ty: TypeExpr) -> frozenset[str]:
    """Free variables of the type that the context does not declare."""
    return free_type_vars(ty) - ctx.dtv


def meta_vars_of_term(ctx: Context, t: Term) -> frozenset[str]:
    """Meta-variables of a partial elaboration.

    Only type-argument positions along the applicand chain may hold
    meta-variables; anything else there must be well-formed.
    """
    match t:
        case App(fun=f):
            return meta_vars_of_term(ctx, f)
        case TApp(fun=f, targ=TVar(name=x)) if x not in ctx.dtv:
            return meta_vars_of_term(ctx, f) | {x}
        case TApp(fun=f, targ=s):
            if not is_well_formed(ctx, s):
                raise ValueError("type argument is neither a meta-variable nor well-formed")
            return meta_vars_of_term(ctx, f)
        case _:
            return frozenset()


# --------------------------------------------------------- alpha equality


def _alpha_ty(
    a: TypeExpr,
    b: TypeExpr,
    enva: Mapping[str, int],
    envb: Mapping[str, int],
    depth: int,
) -> bool:
    match a, b:
        case TVar(name=x), TVar(name=y):
            ia, ib = enva.get(x), envb.get(y)
            if ia is None and ib is None:
                return x == y
            return ia == ib
        case Arrow(dom=d1, cod=c1), Arrow(dom=d2, cod=c2):
            return _alpha_ty(d1, d2, enva, envb, depth) and _alpha_ty(
                c1, c2, enva, envb, depth
            )
        case Forall(bound=x, body=b1), Forall(bound=y, body=b2):
            return _alpha_ty(
                b1, b2, {**enva, x: depth}, {**envb, y: depth}, depth + 1
            )
        case Con(con=c1, args=a1), Con(con=c2, args=a2):
            return (
                c1 == c2
                and len(a1) == len(a2)
                and all(_alpha_ty(p, q, enva, envb, depth) for p, q in zip(a1, a2))
            )
    return False


def alpha_equal(a: TypeExpr, b: TypeExpr) -> bool:
    """Equality of types up to renaming of bound variables."""
    return _alpha_ty(a, b, {}, {}, 0)


def alpha_equal_term(a: Term, b: Term) -> bool:
    """Equality of terms up to renaming of bound term and type variables."""

    def go(a, b, enva, envb, depth):
        match a, b:
            case Var(name=x), Var(name=y):
                ia, ib = enva.get(x), envb.get(y)
                return x == y if ia is None and ib is None else ia == ib
            case Lam(bound=x, ann=s1, body=b1), Lam(bound=y, ann=s2, body=b2):
                if (s1 is None) != (s2 is None):
                    return False
                if s1 is not None and not _alpha_ty(s1, s2, enva, envb, depth):
                    return False
                return go(b1, b2, {**enva, x: depth}, {**envb, y: depth}, depth + 1)
            case TLam(bound=x, body=b1), TLam(bound=y, body=b2):
                return go(b1, b2, {**enva, x: depth}, {**envb, y: depth}, depth + 1)
            case App(fun=f1, arg=a1), App(fun=f2, arg=a2):
                return go(f1, f2, enva, envb, depth) and go(a1, a2, enva, envb, depth)
            case TApp(fun=f1, targ=s1), TApp(fun=f2, targ=s2):
                return go(f1, f2, enva, envb, depth) and _alpha_ty(
                    s1, s2, enva, envb, depth
                )
        return False

    return go(a, b, {}, {}, 0)


def _proto_alpha(p: Prototype, q: Prototype, enva, envb, depth) -> bool:
    match p, q:
        case Unknown(), Unknown():
            return True
        case Exact(ty=s), Exact(ty=t):
            return _alpha_ty(s, t, enva, envb, depth)
        case ArrowTo(rest=r1), ArrowTo(rest=r2):
            return _proto_alpha(r1, r2, enva, envb, depth)
    return False


def alpha_equal_deco(a: DecoratedType, b: DecoratedType) -> bool:
    """Equality of decorated types up to renaming of quantifier binders."""

    def go(a, b, enva, envb, depth):
        match a, b:
            case Plain(ty=s), Plain(ty=t):
                return _alpha_ty(s, t, enva, envb, depth)
            case DArrow(dom=d1, cod=c1), DArrow(dom=d2, cod=c2):
                return _alpha_ty(d1, d2, enva, envb, depth) and go(
                    c1, c2, enva, envb, depth
                )
            case DForall(bound=x, deco=r1, body=b1), DForall(bound=y, deco=r2, body=b2):
                if (r1 is None) != (r2 is None):
                    return False
                if r1 is not None and not _alpha_ty(r1, r2, enva, envb, depth):
                    return False
                return go(b1, b2, {**enva, x: depth}, {**envb, y: depth}, depth + 1)
            case Stuck(meta=m1, proto=p1), Stuck(meta=m2, proto=p2):
                ia, ib = enva.get(m1), envb.get(m2)
                heads = m1 == m2 if ia is None and ib is None else ia == ib
                return heads and _proto_alpha(p1, p2, enva, envb, depth)
        return False

    return go(a, b, {}, {}, 0)


# ----------------------------------------------------------- substitution


def _fresh_against(base: str, avoid: set[str] | frozenset[str]) -> str:
    name = base
    while name in avoid:
        name += "'"
    return name


def substitute(mapping: Mapping[str, TypeExpr], ty: TypeExpr) -> TypeExpr:
    """Simultaneous capture-avoiding substitution of types for variables."""
    if not mapping:
        return ty
    match ty:
        case TVar(name=x):
            return mapping.get(x, ty)
        case Arrow(dom=d, cod=c):
            return Arrow(substitute(mapping, d), substitute(mapping, c))
        case Con(con=c, args=args):
            return Con(c, tuple(substitute(mapping, a) for a in args))
        case Forall(bound=x, body=b):
            inner = {k: v for k, v in mapping.items() if k != x}
            if not inner:
                return ty
            clash = set()
            for v in inner.values():
                clash |= free_type_vars(v)
            if x in clash:
                fresh = _fresh_against(x, clash | free_type_vars(b) | set(inner))
                b = substitute({x: TVar(fresh)}, b)
                x = fresh
            return Forall(x, substitute(inner, b))
    raise TypeError(ty)


def subst_type(sol: Solution, ty: TypeExpr) -> TypeExpr:
    """Apply a solution to a type."""
    return substitute(sol.types(), ty)


def subst_type_args(mapping: Mapping[str, TypeExpr], t: Term) -> Term:
    """Substitute into the type-argument positions of an applicand chain.

    Partial elaborations keep their meta-variables only there, so this
    is the whole of applying a solution to a term.
    """
    if not mapping:
        return t
    match t:
        case App(fun=f, arg=a, span=sp):
            return App(subst_type_args(mapping, f), a, span=sp)
        case TApp(fun=f, targ=s, span=sp):
            return TApp(subst_type_args(mapping, f), substitute(mapping, s), span=sp)
        case _:
            return t


# ------------------------------------------------------ term predicates


def is_internal_term(t: Term) -> bool:
    """True iff every term binder carries an annotation."""
    match t:
        case Var():
            return True
        case Lam(ann=a, body=b):
            return a is not None and is_internal_term(b)
        case TLam(body=b):
            return is_internal_term(b)
        case App(fun=f, arg=a):
            return is_internal_term(f) and is_internal_term(a)
        case TApp(fun=f):
            return is_internal_term(f)
    raise TypeError(t)


def _types_grounded(ctx: Context, t: Term) -> bool:
    match t:
        case Var():
            return True
        case Lam(bound=x, ann=a, body=b):
            if a is None or not is_well_formed(ctx, a):
                return False
            return _types_grounded(ctx.with_term(x, a), b)
        case TLam(bound=x, body=b):
            return _types_grounded(ctx.with_type_var(x), b)
        case App(fun=f, arg=a):
            return _types_grounded(ctx, f) and _types_grounded(ctx, a)
        case TApp(fun=f, targ=s):
            return is_well_formed(ctx, s) and _types_grounded(ctx, f)
    raise TypeError(t)


def is_partial_elaboration(ctx: Context, t: Term) -> bool:
    """True iff binders are annotated and meta-variables sit only in the
    type-argument positions of the outer applicand chain."""
    match t:
        case App(fun=f, arg=a):
            return is_partial_elaboration(ctx, f) and _types_grounded(ctx, a)
        case TApp(fun=f, targ=TVar(name=x)) if x not in ctx.dtv:
            return is_partial_elaboration(ctx, f)
        case TApp(fun=f, targ=s):
            return is_well_formed(ctx, s) and is_partial_elaboration(ctx, f)
        case _:
            return _types_grounded(ctx, t)


# -------------------------------------------------------- canonical keys


def canon_type(ty: TypeExpr) -> str:
    """Serialization that identifies alpha-equivalent types."""

    def go(ty, env, depth):
        match ty:
            case TVar(name=x):
                return f"@{env[x]}" if x in env else f"v:{x}"
            case Arrow(dom=d, cod=c):
                return f"({go(d, env, depth)}->{go(c, env, depth)})"
            case Forall(bound=x, body=b):
                return f"(all.{go(b, {**env, x: depth}, depth + 1)})"
            case Con(con=c, args=args):
                inner = ",".join(go(a, env, depth) for a in args)
                return f"{c}[{inner}]"
        raise TypeError(ty)

    return go(ty, {}, 0)


def canon_term(t: Term) -> str:
    """Serialization that identifies alpha-equivalent terms."""

    def go(t, env, depth):
        match t:
            case Var(name=x):
                return f"@{env[x]}" if x in env else f"v:{x}"
            case Lam(bound=x, ann=a, body=b):
                ann = canon_in_env(a, env, depth) if a is not None else "_"
                return f"(lam:{ann}.{go(b, {**env, x: depth}, depth + 1)})"
            case TLam(bound=x, body=b):
                return f"(tlam.{go(b, {**env, x: depth}, depth + 1)})"
            case App(fun=f, arg=a):
                return f"({go(f, env, depth)} {go(a, env, depth)})"
            case TApp(fun=f, targ=s):
                return f"({go(f, env, depth)} [{canon_in_env(s, env, depth)}])"
        raise TypeError(t)

    def canon_in_env(ty, env, depth):
        def ty_go(ty, tenv, d):
            match ty:
                case TVar(name=x):
                    return f"@{tenv[x]}" if x in tenv else f"v:{x}"
                case Arrow(dom=dm, cod=c):
                    return f"({ty_go(dm, tenv, d)}->{ty_go(c, tenv, d)})"
                case Forall(bound=x, body=b):
                    return f"(all.{ty_go(b, {**tenv, x: d}, d + 1)})"
                case Con(con=c, args=args):
                    return f"{c}[{','.join(ty_go(a, tenv, d) for a in args)}]"
            raise TypeError(ty)

        return ty_go(ty, env, depth)

    return go(t, {}, 0)


# ------------------------------------------------------------ fresh names

_META_RE = re.compile(r"\?(.+?)\d*$")


def is_meta_name(name: str) -> bool:
    return name.startswith("?")


class NameSupply:
    """Monotone source of reserved meta-variable names for one run.

    Remembers the source binder each name was minted for, so that
    diagnostics can show ``?X`` for a meta that instantiates a
    quantifier named ``X``.
    """

    def __init__(self) -> None:
        self._next = 0
        self._source: dict[str, str] = {}

    def fresh_meta(self, source: str) -> str:
        base = self.source_of(source)
        name = f"?{base}{self._next}"
        self._next += 1
        self._source[name] = base
        return name

    def source_of(self, name: str) -> str:
        if name in self._source:
            return self._source[name]
        m = _META_RE.match(name)
        return m.group(1) if m else name

    def display_names(self, names) -> dict[str, str]:
        """Shortest unambiguous ``?source`` rendering for each meta name."""
        ordered = sorted(set(names))
        by_source: dict[str, list[str]] = {}
        for n in ordered:
            by_source.setdefault(self.source_of(n), []).append(n)
        out: dict[str, str] = {}
        for src, group in by_source.items():
            if len(group) == 1:
                out[group[0]] = f"?{src}"
            else:
                for i, n in enumerate(group, start=1):
                    out[n] = f"?{src}{i}"
        return out
