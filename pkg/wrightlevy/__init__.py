"""
wrightlevy - Wright functions, Levy exponential functionals and self-similar CBI laws.
"""

__version__ = "0.1.0"
