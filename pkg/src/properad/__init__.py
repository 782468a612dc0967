"""Exact symbolic engine for properadic homotopical calculus over the rationals.

All arithmetic is exact (fractions.Fraction); every identity the engine
verifies is checked as a zero-tolerance equality.
"""

__version__ = "0.1.0"
