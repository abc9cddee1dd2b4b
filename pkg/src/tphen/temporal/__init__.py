"""Instant and interval algebra."""

from .kernels import BACKEND
from .ops import (
    RELATIONS,
    coalesce,
    coalesce_union,
    complement,
    end_instants,
    instant_and,
    instant_not,
    instant_or,
    intersection,
    maximal_range,
    range_triples,
    rel_allen,
    rel_before,
    start_instants,
)
from .types import (
    INF,
    IllegalOperandKind,
    IncompleteInterval,
    InstantSet,
    IntervalSet,
    RangeTriple,
)

__all__ = [
    "BACKEND",
    "INF",
    "RELATIONS",
    "IllegalOperandKind",
    "IncompleteInterval",
    "InstantSet",
    "IntervalSet",
    "RangeTriple",
    "coalesce",
    "coalesce_union",
    "complement",
    "end_instants",
    "instant_and",
    "instant_not",
    "instant_or",
    "intersection",
    "maximal_range",
    "range_triples",
    "rel_allen",
    "rel_before",
    "start_instants",
]
