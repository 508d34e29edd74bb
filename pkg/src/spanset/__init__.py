"""Span sets of Brownian paths and random walks."""
__version__ = "0.1.0"

from .intervals import IntervalSet
from .paths import LatticePath, PiecewiseLinearPath, SampledPath, gen_gaussian_path, gen_srw, to_pl
from .spans import SpanSet, eps_span_grid, span_lattice, span_pl_1d
from .metric import hausdorff_distance

__all__ = ["IntervalSet", "LatticePath", "PiecewiseLinearPath", "SampledPath", "SpanSet", "eps_span_grid",
           "gen_gaussian_path", "gen_srw", "hausdorff_distance", "span_lattice", "span_pl_1d", "to_pl",
           "__version__"]
