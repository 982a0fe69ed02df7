"""Coordinate models of Grassmann and flag varieties, closed-form critical
point enumerators for trace optimization problems over them, and a
total-degree homotopy continuation solver that certifies the counts."""

__version__ = "0.1.0"
