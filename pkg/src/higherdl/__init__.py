"""Higher Deligne-Lusztig representations of GL_n(F_q[pi]/pi^r) at desk scale."""

__version__ = "0.1.0"
