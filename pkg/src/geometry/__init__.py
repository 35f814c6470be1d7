from .footprint import CarParams, Footprint, footprint
from .collision import ObstacleSet, GeometryInputError, convex_overlap, is_admissible
from .mask import AdmissibilityMask, build_mask
