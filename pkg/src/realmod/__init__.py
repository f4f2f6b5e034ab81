"""Realizability models over partial combinatory algebras, Heyting-valued modal
semantics on top of them, and a workbench that checks witnesses and refuters."""

__version__ = "0.1.0"
