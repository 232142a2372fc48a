"""Compile traffic splits into small longest-prefix-match rule tables."""

from .approx import (
    ApproxResult,
    ClosestSearch,
    bounded_error_linf,
    bounded_error_one_sided,
    closest,
    closest_many,
    closest_real,
    normalize_to_width,
)
from .lifting import Lifting, LiftingInstance, excess, lift_cap01, lift_cap123, lift_one_sided
from .partition import (
    DistanceKind,
    Partition,
    RealPartition,
    bitlex_less,
    distance,
    format_partition,
    parse_partition,
    sample_ordered_partition,
)
from .sequences import (
    Transaction,
    TransactionSequence,
    bit_matcher,
    complexity,
    induced_partition,
    niagara,
    truncate_to_widest,
)
from .tcam import (
    PrefixRule,
    TcamTable,
    enumerate_induced,
    format_table,
    parse_table,
    sequence_to_table,
    table_induced_partition,
)

__version__ = "0.1.0"
