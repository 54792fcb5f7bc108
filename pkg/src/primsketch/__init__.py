"""Sketch abstraction with a fixed vocabulary of parametric primitives."""

from .affine import PrimitiveRecord, TransformParams, apply_record, compose, reconstruct
from .budget import BudgetReport, count_messages, kept_count, truncate
from .distance_field import Field, Grid, dt_loss, field
from .fitter import FitConfig, FitResult, fit_all, fit_primitive
from .matcher import Compatibility, PrimitiveSketch, abstract_sketch, compatibility, select
from .primitives import default_primitives, primitive_map
from .sketch_model import (VOCABULARY, DegenerateStrokeError, Primitive, Sketch, SketchParseError,
                           Stroke, normalize_stroke, parse_ndjson, parse_stroke3)
from .sw_baseline import sw_abstract

__version__ = "0.1.0"
