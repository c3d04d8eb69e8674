"""Numerical laboratory for radial and orthogonal projections of compactly
supported measures: discretised measures, equal-area sphere partitions,
projection operators, Riesz and Fourier energies, identity comparisons,
and vantage-point scans."""

__version__ = "0.1.0"

from .measures import (
    AffineMap,
    DiscreteMeasure,
    GridDensity,
    GridSpec,
    Mollifier,
    from_points,
    ifs_sample,
    mollify,
    support_distance,
)
from .sphere import (
    SphereDensity,
    SphereGrid,
    cap_sums,
    lp_norm_sphere,
    lp_norm_weighted,
    make_sphere_grid,
)
from .project import (
    Direction,
    DirectionDensity,
    HistogramSpec,
    WeightedMeasure,
    density_formula_rhs,
    orth_project,
    radial_project,
    weight_riesz,
)
from .energy import (
    EnergyReport,
    fourier_sobolev,
    frostman_exponent,
    frostman_holder_check,
    kaufman_integral,
    riesz_energy,
    riesz_energy_grid,
    unit_cell_riesz,
)
from .identity import (
    IdentityReport,
    MollificationStudy,
    identity_lhs,
    identity_report,
    identity_rhs,
    mollification_limit_study,
)
from .scan import (
    BoxDimension,
    ScanParams,
    ScanReport,
    admissible_p,
    box_dimension,
    extract_bad_set,
    scan_centres,
)

__all__ = [name for name in dir() if not name.startswith("_")]
