"""Exact densities of the integer sets represented by quadratic forms."""

from .density import (
    GlobalDensityReport,
    ResidueSieve,
    delta_loc_truncated,
    density,
    density_isotropic_binary_closed_form,
    locally_represented,
    residue_sieve,
    support_primes,
    theorem_checks,
)
from .enumeration import (
    ExceptionSet,
    RepresentedSet,
    empirical_density,
    exceptional_set,
    represented_set_positive,
    represents_isotropic_binary,
)
from .forms import (
    QuadraticForm,
    Signature,
    binary_Delta,
    diagonalize_over_Q,
    discriminant,
    gauss_reduce_isotropic_binary,
    hasse_invariant,
    is_isotropic_local,
    is_isotropic_over_Q,
    is_primitive,
    make_form,
    parse_form,
    primitive_part,
    signature,
    witt_invariant,
)
from .inverse import (
    GreedyProductPlan,
    attainable_local_density_set,
    globalization_feasible,
    greedy_interval_product,
    v2_density_construction,
)
from .local import (
    INF,
    RepresentationTable,
    is_adc_local,
    is_locally_universal,
    local_density,
    local_density_bruteforce,
    nondyadic_table_fastpath,
    qp_represents_class,
    representation_table,
    truncated_local_density,
    zp_represents,
)
from .numtheory import (
    REAL,
    PValuation,
    SquareClassSystem,
    hilbert_symbol,
    legendre_symbol,
    square_class_of,
    valuation,
)

__version__ = "0.1.0"
