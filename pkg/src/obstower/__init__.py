"""Lifting obstructions for finite group homomorphisms.

Everything is exact: groups come with full multiplication tables,
modules are finite abelian with explicit action matrices, and all
cohomology is computed over Z/p**E with integer linear algebra (no
floats anywhere).  The headline operations:

* ``obstruction`` / ``lift_classes`` -- does a homomorphism lift
  through an abelian extension, and along which torsor of classes;
* ``tower_from_lcs`` / ``run_tower`` -- iterate that question up a
  lower-central-series tower, level by level;
* ``adelic_cohomology`` / ``compact_support`` / ``les_check`` /
  ``reciprocity_obstruction`` -- a toy local-global layer whose
  compact-support cone detects genuinely global obstructions;
* ``witt_rank`` / ``hall_basis`` / ... -- graded bookkeeping for the
  free-Lie side (see ``obstower.liegraded``);
* simplicial constructions with exact verification (see
  ``obstower.simplicial``).

The CLI (``python -m obstower`` or the ``obstower`` script) wraps the
above in deterministic JSON reports.
"""

from .errors import (DegreeTooLarge, IncompatibleLocalData, MixedTargets,
                     NotAbelian, NotAbelianKernel, NotACocycle, NotNormal,
                     ObstowerError, RamificationMismatch,
                     SearchBudgetExceeded, SeriesStabilized,
                     TargetMismatch, TruncationInsufficient,
                     ValidationError)
from .groups import (FiniteGroup, GroupHom, Subgroup, commutator_subgroup,
                     enumerate_homs, find_isomorphism, homs_mod_conjugacy,
                     is_isomorphic, lower_central_series, normal_closure,
                     quotient_group)
from .catalog import (abelian, by_name, cyclic, dihedral, klein_four,
                      quaternion8, symmetric)
from .modules import (GModule, abelian_decomposition, conjugation_module,
                      module_from_gen_action, pullback_module,
                      trivial_module)
from .cohomology import (Cochain, CohomologyClass, CohomologyGroup,
                         DEGREE_LIMIT, bar_complex, clear_cache,
                         cochain_from_function, cohomology, diff_matrix,
                         is_coboundary, pullback_class, pullback_cochain,
                         solve_coboundary)
from .extensions import (ExtensionDatum, are_equivalent, covering_homs,
                         equivalence_map, extension_class, extension_datum,
                         extension_from_cocycle, homomorphic_sections,
                         section_derivation, semidirect_product,
                         split_extension, torsor_action)
from .tower import (E1Page, LiftReport, Tower, TowerStep, brute_force_lifts,
                    e1_page, lift_classes, obstruction, run_tower,
                    tower_from_lcs)
from .localglobal import (AdelicCohomology, CompactSupportClass,
                          CompactSupportGroup, ExactnessReport,
                          LocalGlobalSystem, Place, ReciprocityReport,
                          adelic_cohomology, compact_support, les_check,
                          reciprocity_obstruction, reciprocity_tower)
from .liegraded import (GradedSpace, HallBasisElement, LsReport,
                        colie_weights, hall_basis, ls_weight_report,
                        magnus_graded, modular_h1, witt_product_check,
                        witt_rank)
from .simplicial import (TruncatedBisimplicialSet,
                         TruncatedSimplicialGroup,
                         TruncatedSimplicialSet, codiagonal,
                         constant_simplicial_group, diag,
                         diag_vs_codiag, dold_kan, edge_group_order,
                         homology, moore_homotopy, nerve, pi0_group,
                         pi0_sset, random_bisimplicial, wbar,
                         wbar_group)
from .fibration import (FibrationReport, constant_fibration,
                        fibration_data, truncate_simplicial_group)

__version__ = "0.1.0"
