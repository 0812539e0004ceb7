"""Combinatorial machinery for adjoining roots to free groups.

Free-group words, graphs and Stallings folding, two-covered graphs of spaces
with their simplifying moves, cylinders, splitting, union-of-trees
bookkeeping and builders from group-theoretic data.
"""

__version__ = "0.1.0"
