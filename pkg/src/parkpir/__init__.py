"""parkpir: private parking-spot retrieval over a replicated ledger.

Subpackages cover the prime-field / Reed-Solomon layer, the multi-server
private retrieval protocol, randomizable anonymous credentials over a
pairing group, the fixed-leader ledger, and an end-to-end scenario harness
with privacy and overhead analytics.
"""

from .field import DEFAULT_MODULUS, ERASED, EvalPoints, Poly, PrimeField
from .pir import PirParams, retrieval_rate, retrieve_cell
from .sim import ScenarioConfig, ScenarioResult, run_scenario

__all__ = [
    "DEFAULT_MODULUS",
    "ERASED",
    "EvalPoints",
    "PirParams",
    "Poly",
    "PrimeField",
    "ScenarioConfig",
    "ScenarioResult",
    "retrieval_rate",
    "retrieve_cell",
    "run_scenario",
]
