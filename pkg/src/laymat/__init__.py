"""Post-routing qubit layout selection driven by device calibration data.

Typical use::

    from laymat import load_circuit, load_device, best_layout, remap

    circuit = load_circuit(open("routed.qasm").read())
    device = load_device(open("device.json").read())
    best = best_layout(circuit, device)
    physical = remap(circuit, best.layout, device.coupling_map.num_qubits)
"""

from .calibration import (
    CalibrationError,
    CalibrationSnapshot,
    ErrorMap,
    GateProperties,
    LookupMiss,
    QubitProperties,
    dump_calibration,
    error_map,
    idle_error,
    load_calibration,
    synth_calibration,
)
from .circuit import (
    CircuitError,
    CircuitParseError,
    GateRegistry,
    Instruction,
    QuantumCircuit,
    from_gates,
    load_circuit,
    parse_circuit,
    serialize_circuit,
)
from .interaction import InteractionGraph, build_interaction_graph
from .scoring import (
    ScoredLayout,
    rank_layouts,
    recoverable_fraction,
    register_cost,
    score_default,
    score_with_idle,
)
from .selector import (
    DeviceCandidate,
    NoEmbeddingError,
    SelectionReport,
    best_layout,
    device_to_json,
    load_device,
    ranked_layouts,
    remap,
    select_device,
)
from .subiso import Layout, SearchBudget, SearchResult, find_embeddings, verify_layout
from .topology import CouplingMap, TopologyError, heavy_hex, line, load_coupling_map, nairobi

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
