"""Publication-style figures from kinetic run directories.

Pure consumer of the run-directory file contract (manifest.json plus
fixed-column CSVs): nothing in here touches the simulation code, and
rendering never writes into the run directories it reads.
"""

from .figures import KINDS, FigureSpec, render
from .readers import MissingColumn, read_columns

__all__ = ["FigureSpec", "render", "KINDS", "MissingColumn", "read_columns"]
