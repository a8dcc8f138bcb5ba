"""Sequential partial measurements on a two-qubit singlet.

Exact density-matrix evaluation of coherent (meter-coupled) and incoherent
measurement strategies, adaptive meter-basis optimization, finite-shot
emulation with state tomography, and a command-line front end.
"""

__version__ = "0.1.0"

from .entanglement import concurrence, negativity, spin_flip
from .measurement import (
    MeasurementKit,
    PbsImperfection,
    apply_kit,
    knowledge_of_kit,
    kraus_pair,
    meter_states,
    singlet_state,
    waveplate_to_strength,
    werner_state,
)
from .qcore import conjugate_map, hermitian_eigensystem, partial_trace, tensor_product
from .strategies import (
    accumulation_curve,
    adaptive_coherent_pair,
    adaptive_sequence,
    incoherent_sequence,
    independent_coherent_pair,
    optimize_adaptive_pair,
    single_coherent,
    zeno_residuals,
)

__all__ = [
    "MeasurementKit",
    "PbsImperfection",
    "accumulation_curve",
    "adaptive_coherent_pair",
    "adaptive_sequence",
    "apply_kit",
    "concurrence",
    "conjugate_map",
    "hermitian_eigensystem",
    "incoherent_sequence",
    "independent_coherent_pair",
    "knowledge_of_kit",
    "kraus_pair",
    "meter_states",
    "negativity",
    "optimize_adaptive_pair",
    "partial_trace",
    "single_coherent",
    "singlet_state",
    "spin_flip",
    "tensor_product",
    "waveplate_to_strength",
    "werner_state",
    "zeno_residuals",
]
