"""Walrasian equilibrium prices and mechanism axioms for unit-demand markets.

Preferences may carry income effects; every computation is exact over the
rationals.
"""

from ._rational import Rat, fmt, q
from .axioms import (
    AxiomReport,
    DeviationPool,
    check_all,
    check_domination,
    check_ete,
    check_ir,
    check_no_envy,
    check_no_subsidy,
    check_no_wastage,
    check_pareto_efficient,
    check_strategy_proof,
    compare_revenue,
    replay_witness,
)
from .equilibrium import (
    ComputationLimit,
    EquilibriumResult,
    OracleFailure,
    SolverFailure,
    grid_oracle_max_prices,
    grid_oracle_min_prices,
    max_walrasian_prices,
    min_walrasian_prices,
    select_zmin_allocation,
    solver_mode,
)
from .generate import generate_market
from .harness import Scenario, RunRecord, emit_report, run_batch, run_scenario
from .market import (
    Certificate,
    Market,
    PriceVector,
    certify_equilibrium,
    demand_connected_sequence,
    demand_set,
    find_overdemanded,
    find_weakly_underdemanded,
    is_walrasian_equilibrium,
)
from .mechanisms import (
    Mechanism,
    MechanismOutcome,
    dictator_then_mwep,
    get_mechanism,
    max_wep,
    mwep,
    mwep_with_fee,
    mwep_with_subsidy,
    no_sale,
    vcg_quasilinear,
)
from .preferences import (
    NULL,
    ClassicalPreference,
    Comparison,
    IndifferenceMap,
    compare,
    make_favoring,
    make_piecewise,
    make_quasilinear,
    make_rich_witness,
    make_step1_preference,
    valuation_at,
)
from .prooflab import (
    build_step1_sequence,
    compute_v_bar,
    d_threshold,
    d_value,
    enumerate_iric,
    replay_outline,
)

__version__ = "0.1.0"
