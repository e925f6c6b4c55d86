"""Executable algebraic probability and information theory over finite
abelian C*-algebras."""

__version__ = "0.1.0"
