"""Constraint models over bounded-length strings, flattened to integers and solved."""

from .flatten_base import FlattenError
from .flatten_int import DEFAULT_MAX_LEN, flatten_int
from .flatten_str import flatten_str
from .model import Model, char_index, char_of, validate
from .parser import ParseError, load_model, parse_data, parse_model

__all__ = [
    "DEFAULT_MAX_LEN", "FlattenError", "Model", "ParseError", "char_index", "char_of",
    "flatten_int", "flatten_str", "load_model", "parse_data", "parse_model", "validate",
]

__version__ = "0.1.0"
