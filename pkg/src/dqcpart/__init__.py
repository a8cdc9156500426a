"""Temporal-hypergraph partitioning of quantum circuits across multiple QPUs."""
from ._backend import backend_name
from .circuit import CP, Gate, LayeredCircuit, U, schedule_layers
from .cost import (
                   Assignment,
                   CostTable,
                   GainState,
                   apply_move,
                   build_cost_table,
                   edge_cost,
                   gain,
                   init_edge_states,
                   make_static_assignment,
                   total_cost,
)
from .errors import (
                   CapacityViolation,
                   DQCError,
                   InsufficientCapacity,
                   InvalidLayer,
                   MalformedProgram,
                   MultipleQuantumRegisters,
                   NonUnitaryAngle,
                   TooManyWires,
                   UnsupportedGate,
)
from .extraction import (
                   DistributedCircuit,
                   decompose_primitives,
                   ebit_conservation_check,
                   extract,
                   report,
)
from .fm import best_move, exploratory_pass, fm_pass, run_fm
from .generators import gen_cp_fraction, gen_qaoa, gen_qft, gen_qv
from .grouping import Diag, diagonality, greedy_grouping
from .hypergraph import NodeRef, TemporalHypergraph, build_temporal_graph
from .multilevel import (
                   Hierarchy,
                   coarsen_blocks,
                   coarsen_recursive,
                   coarsen_window,
                   contract_time,
                   multilevel_partition,
                   project_assignment,
)
from .qasm import parse_qasm
from .transpile import transpile_to_ucp
from .verify import Distribution, check_equivalence, simulate, tvd

__version__ = "0.1.0"

__all__ = [
                   "CP",
                   "Assignment",
                   "CapacityViolation",
                   "CostTable",
                   "DQCError",
                   "Diag",
                   "DistributedCircuit",
                   "Distribution",
                   "GainState",
                   "Gate",
                   "Hierarchy",
                   "InsufficientCapacity",
                   "InvalidLayer",
                   "LayeredCircuit",
                   "MalformedProgram",
                   "MultipleQuantumRegisters",
                   "NodeRef",
                   "NonUnitaryAngle",
                   "TemporalHypergraph",
                   "TooManyWires",
                   "U",
                   "UnsupportedGate",
                   "apply_move",
                   "backend_name",
                   "best_move",
                   "build_cost_table",
                   "build_temporal_graph",
                   "check_equivalence",
                   "coarsen_blocks",
                   "coarsen_recursive",
                   "coarsen_window",
                   "contract_time",
                   "decompose_primitives",
                   "diagonality",
                   "ebit_conservation_check",
                   "edge_cost",
                   "exploratory_pass",
                   "extract",
                   "fm_pass",
                   "gain",
                   "gen_cp_fraction",
                   "gen_qaoa",
                   "gen_qft",
                   "gen_qv",
                   "greedy_grouping",
                   "init_edge_states",
                   "make_static_assignment",
                   "multilevel_partition",
                   "parse_qasm",
                   "project_assignment",
                   "report",
                   "run_fm",
                   "schedule_layers",
                   "simulate",
                   "total_cost",
                   "transpile_to_ucp",
                   "tvd",
]
