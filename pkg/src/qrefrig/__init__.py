"""Autonomous quantum absorption refrigerators with correlated heat transfer.

Three models share a hot bath, a cold bath and a work reservoir:

* ``qri``: a qutrit coupled to each bath by independent one-photon transitions;
* ``qrc``: a qutrit whose hot-cold exchange is one correlated two-photon jump;
* ``qrcn``: a four-level system whose work reservoir is itself a pair of baths,
  acting as a synthetic (possibly negative) temperature bath.

Mean heat currents and their fluctuations come from full counting statistics
of the vectorized Lindblad generator, and are cross-checked against closed
forms and a time-propagation oracle.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    BathSpec,
    CoolingWindow,
    RateSet,
    RefrigeratorSpec,
    SpecError,
    Variant,
    bose_occupation,
    cooling_window,
    effective_pair_temperature,
    rate_set,
    synthetic_inverse_temperature,
)
from .liouvillian import (  # noqa: E402
    GeneratorMatrix,
    JumpChannel,
    generator,
    hamiltonian,
    jump_channels,
    steady_state,
    tilted_generator,
)
from .fcs import (  # noqa: E402
    FluxStatistics,
    char_poly_coefficients,
    flux_statistics_closed_form,
    flux_statistics_fcs,
)
from .oracle import oracle_flux_statistics, propagate_tilted  # noqa: E402
from .metrics import (  # noqa: E402
    ComparisonReport,
    PerformanceReport,
    compare_qrc_qri,
    compare_qrcn_qrc,
    cooling_ability_bound,
    performance_report,
    sweep,
)
