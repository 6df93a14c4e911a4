"""Thermodynamic formalism on full shifts: pressure, equilibrium states,
rotation sets, localized entropy and zero-temperature limits."""

__version__ = "0.1.0"

from .symbolic import (  # noqa: E402
    CapacityError,
    PeriodicOrbit,
    PotentialTable,
    Word,
    enumerate_periodic_orbits,
    enumerate_words,
    necklace_count,
    orbit_measure_weights,
    periodic_orbit_rv,
)
from .transfer import (  # noqa: E402
    AnnealingTrace,
    MarkovMeasure,
    ScalarPotential,
    TransferConvergenceError,
    TransferSolution,
    anneal,
    measure_entropy,
    measure_integral,
    pressure,
    solve_transfer,
)
from .maximizing import (  # noqa: E402
    MaxMeanResult,
    WeightedDeBruijn,
    critical_entropy,
    max_cycle_mean,
    support_value,
)
from .geometry import (  # noqa: E402
    DirectionSet,
    EntropySearch,
    Face2,
    OutsideInteriorError,
    Polygon2,
    convex_hull_2d,
    direction_set_of_vertex,
    face_of_direction,
    localized_entropy,
    rotation_polytope_periodic,
)
from .annealing import (  # noqa: E402
    AnnealOptions,
    GroundStateReport,
    closed_classes,
    face_entropy_sup,
    ground_state,
    verify_face_limit,
)
from .files import read_potential, write_potential  # noqa: E402
