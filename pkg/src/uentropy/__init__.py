"""Uniform entropy on finite dynamical systems.

Entourage algebra, separated/spanning and cover entropy, shadowing
certificates, expansivity and entropy points, all computed exactly on
finite carriers where the solvers allow it.
"""

from .errors import (ConfigError, DomainMismatchError, MissingMetricError, NotFoundError,
                     PreconditionError, PropertyViolation, UEntropyError)
from .uniform import (Carrier, Entourage, UniformityBase, bowen_relation, compose,
                      cross_section, dynamic_pullback, half_scale, power, transpose,
                      validate_uniformity_base)
from .systems import (FiniteSystem, Metric, ScaleGrid, build_zoo_system, cat, contraction,
                      default_base, default_grid, disjoint_union, doubling,
                      first_symbol_entourage, full_shift, identity, list_systems,
                      metric_entourage, metric_entourage_family, parse_system_spec,
                      rotation, tent)
from .spanning import (EntropyEstimate, ExtremalSetResult, check_monotonicity, count_table,
                       greedy_net, growth_rate, max_separated, min_spanning, net_entropy,
                       uniform_entropy)
from .covers import (Cover, cover_entropy, join, lebesgue_entourage,
                     min_subcover_cardinality, preimage_cover, refinement_check,
                     uniform_cover, uniform_cover_entropy)
from .shadowing import (EntropyCertificate, PseudoOrbit, chain_recurrent_pairs,
                        entropy_certificate, find_shadowing_points, shadowing_modulus,
                        verify_pseudo_orbit)
from .expansivity import (contraction_check, expansivity_entropy_check,
                          expansivity_search, gamma_set, generator_check,
                          generator_horizon, sensitivity_set)
from .entpoints import (check_conjugacy_image, check_forward_invariant,
                        check_full_entropy_on_ent, entropy_point_set,
                        intersection_witness, local_entropy)

__version__ = "0.1.0"
