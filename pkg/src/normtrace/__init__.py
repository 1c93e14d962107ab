"""Exact norm-trace counts and Kloosterman-type sums over finite semi-simple algebras."""

from .errors import CapExceeded, FieldMismatch, NumericalIntegrityError, SpecError
from .gf import FieldElement, FiniteField, construct_field, relative_norm, relative_trace, tower
from .ssalg import AlgebraSpec, load_spec, parse_element, parse_spec, trace_norm
from .counts import count_norm_trace, count_norm_zero, count_trace_units
from .sums import kloosterman_B, product_trace_K
from .verify import emit_report, standard_instances

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec",
    "CapExceeded",
    "FieldElement",
    "FieldMismatch",
    "FiniteField",
    "NumericalIntegrityError",
    "SpecError",
    "construct_field",
    "count_norm_trace",
    "count_norm_zero",
    "count_trace_units",
    "emit_report",
    "kloosterman_B",
    "load_spec",
    "parse_element",
    "parse_spec",
    "product_trace_K",
    "relative_norm",
    "relative_trace",
    "standard_instances",
    "tower",
]
