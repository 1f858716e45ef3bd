"""Desk-scale Quantum CONGEST simulator.

Parallel-query quantum algorithms (``pqalg``) are compiled onto a
round-synchronous network (``congest``) by the framework in ``bridge``;
``nonoracle`` covers amplitude amplification and phase/amplitude estimation
that do not fit the query mould, and ``apps`` assembles the graph problems.
"""

__version__ = "0.1.0"
