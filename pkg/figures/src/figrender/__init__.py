"""CSV-to-figure renderer for the intrinsic-constraint study.

Nine recipes (fig1..fig9) map the engine's CSV outputs to plots.  The
renderer is read-only over its inputs and holds no numerical logic beyond
axis transforms; re-rendering identical CSVs yields identical bytes.
"""

__version__ = "0.1.0"

from .recipes import RECIPES, FigureRecipe, render
