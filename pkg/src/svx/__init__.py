"""Deterministic and common randomness extraction from adversarial dice sources."""

from .core import (Distribution, ExtractorTable, JointSourceSpec, RandomizedStrategy, SourceSpec,
                   StrategyTree, enumerate_strings, sample_sequence, validate_spec)
from .extractor import (MartingaleConfig, PsiWitness, Verdict, bias_bracket, check_restricted_necessary,
                        extract_bit, extract_bits, find_psi, verdict)
from .adversary import (AlphaBeta, GEpsilonCert, PhiSet, alpha_beta, build_g_certificate, check_g_dominates,
                        optimal_strategy, phi_set, tilt_adversary)
from .binary_sv import (base_delta, dominates_curve_point, domination_frontier, f_delta_curve, left_prefix_table,
                        verify_basedelta_lemma, verify_prefix_optimality)
from .distributed import (CommonPart, FCertificate, build_f_certificate, common_extract, common_part,
                          compute_delta_constants, conditional_maximal_correlation, derandomize,
                          distributed_triples, distributed_verdict, induced_common_spec,
                          maximal_correlation, perturb_spec, witsenhausen_certificate)

__version__ = "0.1.0"
