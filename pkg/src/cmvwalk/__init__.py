"""Extended CMV matrices, quantum walks on the line, and their transport exponents."""

__version__ = "0.1.0"
