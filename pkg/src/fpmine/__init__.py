"""Detect functional-programming structures in JavaScript/TypeScript code and
mine their prevalence, evolution, bug-fix removals and comment sizes."""

__version__ = "0.1.0"
