"""Desk-scale computation of the ends of coarse spaces.

Spaces are lazily generated locally finite graphs; balls are enumerated on
demand, K-components outside balls give end counts and thread systems, and
the epsilon-equivalence of coarse sequences is decided with certificates
that can be re-checked independently.
"""
from .coarse import BoundedRegion, Entourage, Window, compose, inverse, is_bounded, is_controlled
from .components import (ComponentPartition, EndProfile, ThreadSystem, chain_between,
                         component_threads, end_profile, find_chain, k_components, local_class)
from .epsilon import (EpsCertificate, EpsRefutation, concatenate, epsilon_equivalent,
                      epsilon_search_K, load, verify)
from .errors import EmptyDomainError, EndsLabError, InconclusiveError, InputError, ResourceError
from .maps import CoarseMap, are_close, check_coarse, end_map, induced_end_map
from .sequences import CoarseSequence, is_subsequence, validate_coarse
from .spaces import (BranchingTree, CombTree, FreeGroup, IntegerGrid, IntegerLine, OffsetSpace,
                     Subdivision, WordTree, ball, parse_descriptor, sphere)
from .witness import Witness, build_witness, verify_witness

__version__ = "0.1.0"
