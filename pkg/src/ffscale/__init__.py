"""
ffscale: rescale the time axis of quantum dynamics.

Given a reference Hamiltonian path ``H_ref(s)`` on ``[0, T_ref]`` and a
rescaling map ``s(t)``, build the generator ``H_FF(t)`` whose evolution shows,
at wall time ``t``, the same energy-eigenstate populations the reference
dynamics shows at reference time ``s(t)``.
"""

from .assembler import (
    FFAssembly,
    PhaseAccumulator,
    assemble_direct,
    assemble_from_frame,
    assemble_series,
    nad_term,
)
from .errors import (
    AmbiguousTracking,
    ConfigError,
    DegenerateSpectrum,
    DomainError,
    EigenNotConverged,
    FFScaleError,
    NumericError,
    SeriesNotConverged,
)
from .linalg import exp_unitary, hermitian_eig
from .propagate import StateTrajectory, evolve, infidelity, populations_in_frame, rk4_oracle
from .schedule import RescalingSchedule
from .spectral import (
    CoefficientSchedule,
    ReferenceHamiltonian,
    SpectralFrame,
    cd_term,
    dh_ds,
    frame_at,
    hamiltonian_at,
)

__version__ = "0.1.0"
