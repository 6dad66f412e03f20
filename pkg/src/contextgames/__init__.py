"""Noncontextuality bounds, exact feasibility checks and communication games for qubits."""
from .algebra import (BlochVector, QubitDensity, QubitObservable, TwoQubitOperator,
                      TwoQubitState, bell_operator, expectation, hermitian_eigh,
                      maximally_entangled_state, observable_from_bloch, projector_of,
                      tensor_product)
from .bounds import (BoundReport, StrategyPolytope, UncBoundCertificate, bound_report,
                     constrained_bound, delta_quantum, delta_unc_bound, local_bound,
                     preset_strategy, quantum_seesaw, quantum_value_at)
from .errors import ContextGamesError
from .games import (BellExpression, GameReport, GameSpec, QuantumStrategy, bell_of_game,
                    classify_window, success_from_bell, success_probability)
from .ontology import (FeasibilityVerdict, build_assignment_space, born_rule_residual,
                       measurement_feasibility, preparation_feasibility)
from .scenarios import (OperationalEquivalence, OperationalScenario, builtin_scenario,
                        catalog_names, scenario_from_json, scenario_to_json,
                        verify_equivalences)

__all__ = [name for name in dir() if not name.startswith("_")]
