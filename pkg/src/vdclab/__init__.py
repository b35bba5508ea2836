"""vdclab: exact character-basis orbits on the torus, Cesaro correlation
profiles, spectral classification of sequences, and recurrence experiments."""

from .fixedpoint import FormalPhase, Irrational
from .hilbert import CharIndex, CharVector, char_combine, char_inner, char_mul
from .systems import (
    AffineSystem,
    invariant_projection,
    orbit_vectors,
    pushforward,
    system_power,
)
from .sequences import (
    FloorPowerSequence,
    IntegerSequence,
    PolynomialSequence,
    RkSpec,
    TableSequence,
    diff_profile,
    rk_enumerate,
    seq_eval,
    star_discrepancy,
    weyl_sum,
)
from .correlate import (
    CorrelationProfile,
    Schedule,
    averaged_norm,
    box_measure,
    cesaro_correlation,
    interval_measure_exact,
    product_average,
)
from .spectral import (
    SpectralEstimate,
    Thresholds,
    atom_scan,
    classify,
    cross_spectrum_polarization,
    fejer_density,
    l2_tail,
    wiener_statistic,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
