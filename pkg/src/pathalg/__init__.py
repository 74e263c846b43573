"""Exact-arithmetic engine for deformations of quiver path algebras."""

__version__ = "0.1.0"
