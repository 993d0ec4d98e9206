"""Exact interval exchange maps, Rauzy-Veech induction and bounded-type conditions."""

from .conditions import (
    AuditReport,
    ConditionError,
    ConditionProfile,
    DeltaWitness,
    RecurrenceWitness,
    WitnessError,
    audit_run,
    chained_delta_witness,
    find_prop32_witnesses,
    small_gap_scan,
    profile_A,
    profile_D,
    profile_U,
    profile_Z,
    prop31_witness,
    prop32_witness,
)
from .families import (
    LengthCone,
    PathProgram,
    WordError,
    bar_first_return,
    bar_map,
    compile_winner_word,
    cone_lengths,
    example1_program,
    example2_bound,
    example2_program,
    example2_row,
    example2_step,
    golden_rotation,
    realize,
)
from .iem import (
    CriticalSet,
    Iem,
    IemError,
    PermPair,
    apply,
    apply_inverse,
    apply_n,
    delta,
    discontinuity_set,
    induced_map,
    recurrence_min,
    same_map,
    validate_admissible,
)
from .induction import (
    BlockTimes,
    InductionPrecisionError,
    InductionRun,
    KeaneViolation,
    cocycle_block,
    drive_path,
    heights,
    mmy_times,
    rv_run,
    rv_step,
    zorich_times,
)
from .numerics import (
    Ball,
    BackendMismatch,
    Ordering,
    PrecisionExhausted,
    QuadElem,
    compare,
    format_scalar,
    golden,
    parse_scalar,
    to_ball,
)
from .rauzy import (
    Arrow,
    ArrowKind,
    CocycleMatrix,
    Path,
    RauzyDiagram,
    build_diagram,
    matrix_norm,
    path_matrix,
    rauzy_move,
)

__version__ = "0.1.0"
