"""Real powers of black-box unitaries by coherent phase estimation.

Quick start::

    from fracpow import BlackBox, AncillaConfig, power_apply, fixtures
    f = fixtures.dyadic(4, m=2, seed=1)
    res = power_apply(BlackBox(f), state, 0.5, AncillaConfig(2, 1))
"""
from . import fixtures
from .blackbox import BlackBox, CapabilityError, KitaevControlled, QueryLedger, kitaev_controlled
from .gsearch import (
    FlagOracle,
    SearchRun,
    entangled_search,
    estimate_subspace_dim,
    magnification_experiment,
    search_iterate,
)
from .phasest import AncillaConfig, estimate_majority, estimate_standard, uncompute_estimation
from .power import (
    GapReport,
    PowerRequest,
    RunResult,
    fractional_apply,
    function_apply,
    gap_check,
    inverse_free_apply,
    measure_error,
    power_apply,
)
from .qcore import (
    ResourceLimitError,
    SpectralFixture,
    StateVector,
    haar_state,
    haar_unitary,
    pure_trace_distance,
    rng_from_seed,
    spectral_power,
)
from .ratspec import (
    PremiseError,
    PrimeSpectrumFixture,
    convergents,
    exact_power_apply,
    primorial,
    recover_eigenphase,
)
from .records import ExperimentRecord

__version__ = "0.1.0"
