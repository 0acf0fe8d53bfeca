"""Generalized autoregressive binary panels: simulation, likelihood, aggregation."""

import json

from ._core import *  # noqa: F401,F403
from ._core import ModelSpec, NumericalError

__all__ = ["spec", "ModelSpec", "NumericalError"]


def spec(doc):
    """Build a ModelSpec from a dict or JSON string in the model-file format."""
    if isinstance(doc, dict):
        doc = json.dumps(doc)
    return ModelSpec.from_json(doc)
