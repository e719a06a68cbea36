"""Generalized split-step quantum walks on finite windows.

Canonical forms ``U_{p,r,theta,kappa}``, unitary (gauge) equivalence, chiral
symmetry certificates and time evolution for band-1 unitaries whose
off-diagonal 2x2 blocks have rank at most one.
"""

from .builders import (
    GaugeTransform,
    KitagawaParams,
    Profile,
    SSQWParams,
    SuzukiParams,
    apply_gauge,
    build_canonical,
    build_kitagawa,
    build_suzuki,
    canonical_factors,
    random_admissible_walk,
    random_gauge,
    random_params,
    random_suzuki,
    suzuki_factors,
)
from .canonical import CanonicalForm, CanonicalSegment, canonicalize, canonicalize_segment, reanchor
from .chiral import (
    ChiralCertificate,
    chiral_certificate,
    chiral_factorize,
    chiral_search,
    suzuki_reduce,
    verify_chiral,
)
from .dynamics import Distribution, distribution, evolve, grow_params, moments, trajectory
from .equivalence import EquivalenceVerdict, decide_equivalence, phase_propagation_oracle, window_spectrum
from .errors import *  # noqa: F401,F403
from .io import parse_walk_file, parse_walk_text
from .operator import (
    RankProfile,
    StateVector,
    WalkOperator,
    adjoint,
    apply,
    check_unitary,
    compose,
    operator_distance,
    rank_profile,
)
from .structure import AdmissibilityReport, LocalBases, check_admissibility, local_bases, reconstruct

__version__ = "0.1.0"
