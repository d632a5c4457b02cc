"""Multi-objective particle swarm optimisation with neighbourhood local search
for least-cost, most-resilient pipe network design."""
from .archive import Archive, EmptyArchiveError, HypergridConfig, cell_of, default_hypergrid
from .core import (
    FEASIBLE,
    Feasibility,
    InsertOutcome,
    InsertResult,
    NDSet,
    ObjectivePair,
    Solution,
    constrained_dominates,
    dominates,
    update_nd_set,
)
from .hydraulics import (
    DisconnectedNetwork,
    HydraulicsError,
    HydraulicState,
    Network,
    NonConvergence,
    headloss_hw,
    solve_batch,
    solve_steady_state,
)
from .localsearch import (
    LS_OFF,
    LSConfig,
    ULSReport,
    VisitedTrie,
    ls_due,
    neighbors,
    repeated_local_search,
    unit_local_search,
)
from .mopso import (
    MutationSchedule,
    RunStats,
    SwarmConfig,
    mutation_probability,
    run_many,
    run_single,
)
from .netio import read_network, write_network
from .pfcompare import (
    TABLE_COLUMNS,
    InputNotND,
    PFComparison,
    combine,
    compare,
    front_from_points,
    read_pf_csv,
    write_pf_csv,
)
from .problems import (
    EvalCounter,
    KitaProblem,
    SearchSpaceTooLarge,
    WDSProblem,
    enumerate_bruteforce,
    load_network,
    reduced_tln,
    resilience_index,
)

__version__ = "0.1.0"
