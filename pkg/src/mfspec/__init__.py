"""Multifractal analysis of self-similar measures with overlaps on [0, 1]."""
from .errors import *  # noqa: F401,F403
from .measure import (
    MeasureTriple,
    ScaledMatrix,
    WeightSystem,
    Word,
    all_words,
    concat,
    measures,
    reflect,
    transfer_matrix,
    validate,
    word_product,
)
from .presets import Preset, check_expectations, preset

__version__ = "0.1.0"
