"""bubblecut: discrete 2-D Riemannian geometry engine.

Computes phi-bubbles by exact constrained min-cut on Cauchy-Crofton
weighted grids and runs the constructive schedules (shrinking/growing
bubbles, minimal separators, staircase splicing, smoothing) to either
certify a strictly mean-curvature-convex function on a compact domain or
exhibit an approximately minimal residual curve.
"""

from .grid import (CYLINDER, PLANE, TORUS, CriticalPoint, MetricGrid, Region,
                   ScalarField, cell_area)
from .distance import (accessible_set, dilate, distance_transform, erode,
                       signed_distance)
from .curvature import critical_points, curvature_at, level_mean_curvature
from .cutgraph import CutGraph, build_cut_graph, perimeter, weighted_area
from .mincut import (CutProblem, CutSolution, bubble_boundary_curvature,
                     minimize_phi_area)
from .bubbles import (BubbleSchedule, BubbleTrace, Verdict, classify_end,
                      grow_bubbles, minimal_separator, shrink_bubbles,
                      torus_systoles, trichotomy)
from .convexify import (ConvexityReport, StaircaseSpec, bend, certify_trace,
                        corner_smooth, mollify, morse_regularize, staircase,
                        verify_mean_convex)
from .metrics import generate_metric
from .io import RunConfig

__version__ = "0.1.0"
