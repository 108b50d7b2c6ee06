"""Nonnegative matrix factorization algorithms with provable guarantees.

Separable factorization (exact and noise tolerant), simplicial and general
exact factorization by verified search, approximate factorization by net
enumeration, hyperplane partition enumeration and instance generators.
"""

__version__ = "0.1.0"

from .approx import (ApproxConfig, ApproxResult, approx_nmf, normalize_factor_pair,
                     solve_column_qp, split_w)
from .errors import *  # noqa: F401,F403
from .exact import (ChainConfig, ExactResult, ProperChainSystem, SimplicialSystem,
                    Status, VerificationReport, build_proper_chain,
                    build_proper_chain_system, build_simplicial_system,
                    solve_general_nmf, solve_sf, verify_factorization)
from .factorization import Factorization
from .instances import (Gadget2D, IntermediateSimplexInstance, PlantedInstance,
                        build_gadget_2d, build_intermediate_simplex, gen_noisy_product,
                        gen_planted_product,
                        gen_separable, verify_completeness)
from .linalg import (SvdTruncation, normalize_rows_l1, numeric_rank, pseudoinverse,
                     rank_truncate, truncated_svd)
from .matrix_io import parse_matrix_csv, write_matrix_csv
from .oracle import in_cone, l1_dist_to_hull
from .partitions import (HyperplaneSeparation, PartitionSpec,
                         enumerate_hyperplane_partitions, enumerate_simplicial_partitions,
                         hyperplane_separation)
from .robust import RobustParams, RobustResult, derive_params, solve_separable_robust
from .separable import SeparableResult, find_loners, solve_separable
