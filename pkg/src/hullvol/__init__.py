"""Volume estimation of a convex body from Poisson point process samples."""

__version__ = "0.1.0"

from .geometry import (Box, ConvexBody, Ellipsoid, Polytope, barycentre, body_from_dict,
                       bounding_box, contains, dilate, load_body, symdiff_volume, volume)
from .hull import HullSummary, PointCloud, classify_points, convex_hull
from .ppp import PppConfig, sample_poisson, sample_ppp, sample_uniform
from .streams import RngStream
from .estimators import (Estimate, dilated_hull, final, gayraud, naive_count, naive_hull,
                         oracle, plugin, pseudo)

__all__ = [
    "Box", "ConvexBody", "Ellipsoid", "Polytope", "barycentre", "body_from_dict",
    "bounding_box", "contains", "dilate", "load_body", "symdiff_volume", "volume",
    "HullSummary", "PointCloud", "classify_points", "convex_hull",
    "PppConfig", "sample_poisson", "sample_ppp", "sample_uniform", "RngStream",
    "Estimate", "dilated_hull", "final", "gayraud", "naive_count", "naive_hull", "oracle",
    "plugin", "pseudo",
]
