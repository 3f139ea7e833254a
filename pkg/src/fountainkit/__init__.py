"""fountainkit: rateless fountain codes with varying per-step distributions.

Exact rank-evolution analysis over the subspace lattice of F_2^k (small k),
optimal next-distribution design, LT and staircase encoders with BP/GE
decoding, and reproducible erasure-channel overhead experiments.
"""

__version__ = "0.1.0"

from .codec import (
    BpDecoder,
    CorruptStreamError,
    EncodedSymbol,
    GeDecoder,
    InputBlock,
    StreamEncoder,
    cprime_encoder,
    lt_encoder,
)
from .distributions import (
    DegreeDistribution,
    DegreeInduced,
    ErasedDistribution,
    ExplicitDistribution,
    PdsSpec,
    PointMass,
    StaircaseColumn,
    VectorDistribution,
    cprime_pds,
    degree_to_vector_distribution,
    erasure_transform,
    ideal_soliton,
    lt_pds,
    pds_from_json,
    robust_soliton,
    uniform_distribution,
)
from .fountain_matrix import (
    DesignResult,
    FountainMatrix,
    FountainProduct,
    GammaProfile,
    alpha,
    beta,
    bound_increment,
    block_norm,
    fountain_block,
    fountain_matrix,
    fountain_product,
    gamma_profile,
    greedy_design,
    identity_product,
    next_increment,
    optimal_support,
    verify_block_identities,
)
from .gf2 import Gf2Matrix, Gf2Vector, column_space_key, in_span, rank, rref, vec_add
from .lattice import LatticeCapError, Subspace, SubspaceLattice, enumerate_subspaces
from .simulator import (
    OverheadRecord,
    OverheadStats,
    SimConfig,
    mc_rank_distribution,
    run_experiment,
    run_trial,
    verify_design_optimality,
)
