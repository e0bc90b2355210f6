"""Deciding perfect matchings in dense k-uniform hypergraphs.

Exact oracles, an exact rational LP for fractional matchings, reachability
and vertex partitions, robust edge-lattices with coset groups, solubility
search, absorbing structures and the end-to-end decision pipeline.
"""

__version__ = "0.1.0"

from .core import ContractFailure, Partition, PartitionNotCertified, PipelineParams, SupplyExhausted
from .hypergraph import (
    Hypergraph,
    degree,
    is_matching,
    is_perfect_matching,
    max_matching,
    min_l_degree,
    parse_text,
    perfect_matching_oracle,
    to_text,
)
from .pipeline import Certificate, Decision, cross_validate, decide, verify_certificate

__all__ = [
    "Certificate",
    "ContractFailure",
    "Decision",
    "Hypergraph",
    "Partition",
    "PartitionNotCertified",
    "PipelineParams",
    "SupplyExhausted",
    "cross_validate",
    "decide",
    "degree",
    "is_matching",
    "is_perfect_matching",
    "max_matching",
    "min_l_degree",
    "parse_text",
    "perfect_matching_oracle",
    "to_text",
    "verify_certificate",
]
