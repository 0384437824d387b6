"""Shared test helpers: a standard context and parser-backed builders."""

from __future__ import annotations

from spinel import parse_term, parse_type, standard_context

CTX = standard_context()


def ty(src, ctx=None):
    """Parse a type in the standard context."""
    return parse_type(src, ctx if ctx is not None else CTX)


def tm(src, ctx=None):
    """Parse a term in the standard context."""
    return parse_term(src, ctx if ctx is not None else CTX)
