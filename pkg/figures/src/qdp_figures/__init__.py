"""Figure rendering for the qdp toolkit's file outputs."""

from .render import render
from .spec import FigureSpec, SpecError

__version__ = "0.1.0"
__all__ = ["FigureSpec", "SpecError", "render"]
