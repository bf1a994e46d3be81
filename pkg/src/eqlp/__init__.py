"""Logic programming with equations and existential quantifiers in queries.

Answers are existentially quantified systems of equations in solved form,
computed by a generalized SLD-resolution and checked against a bottom-up
fixpoint semantics.
"""
from .terms import (
    And, App, Atom, AtomQ, Clause, Eq, Exists, FALSE, FreshNames, Program,
    TRUE, Var, atom_count, free_vars, is_variant, rename_clause, replace_free,
)
from .parser import parse_program, parse_query, print_query

__all__ = [
    "And", "App", "Atom", "AtomQ", "Clause", "Eq", "Exists", "FALSE",
    "FreshNames", "Program", "TRUE", "Var", "atom_count", "free_vars",
    "is_variant", "parse_program", "parse_query", "print_query",
    "rename_clause", "replace_free",
]
