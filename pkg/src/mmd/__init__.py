"""Finite abelian simulator for coupled measurement: groups and their duals,
Kac-Takesaki couplings, instruments, amplification cascades, crossed products
and symmetry-breaking sector bundles.
"""
from .errors import *  # noqa: F401,F403
from .groups import (DualGroup, FiniteAbelianGroup, abelian_groups_up_to, character_value,
                     fourier, fourier_matrix, haar_mean, inverse_fourier, make_group, translate)
from .operators import (SpectralMeasure, UnitaryRep, apply_on_legs, character_rep, dm, embed,
                        ket, partial_trace, quasi_equivalent, random_density, random_rep,
                        random_state, random_unitary, rep_multiplicities, rep_power, rep_tensor,
                        snag_decompose, tensor, trivial_rep)
from .algebra import (MatrixStarAlgebra, Sector, SectorDecomposition, block_algebra, center,
                      commutant, diagonal_algebra, full_algebra, generate, intersect, intertwiners,
                      is_factor, is_masa, same_subspace, scalars, sector_decompose, span,
                      subspace_distance, tensor_algebra)
from .kt import (CouplingOperator, KTOperator, coupling_uw, coupling_v, fourier_coupling, kt_v,
                 kt_w, modified_pentagon_residual, pentagon_residual, regular_rep,
                 spectral_coupling, verify_relations)
from .instrument import (POVM, Instrument, NaimarkDilation, make_instrument, naimark_dilate,
                         posterior, povm_effects, probability, trine_povm)
from .amplifier import (Branch, CascadeConfig, CascadeState, amplify, analytic_branches,
                        branch_decompose, consensus_offdiagonal, heisenberg_chain,
                        heisenberg_chain_nested, recover, roundtrip_fidelity)
from .crossed import (CrossedProduct, alpha_w_equivalence, build_heisenberg, build_schrodinger,
                      convolution_rep, convolve, coupled_center, crossed_report)
from .ssb import (SectorBundle, SubgroupSpec, all_subgroups, annihilator, quotient,
                  sector_bundle, subgroup)

__version__ = "0.1.0"
