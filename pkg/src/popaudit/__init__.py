"""Popularity-bias amplification audit for collaborative-filtering recommenders."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .core import (DatasetError, IdMap, InteractionDataset, SparseMatrix, build_matrix,
                   genre_distribution)

__all__ = ["BACKEND", "DatasetError", "IdMap", "InteractionDataset", "SparseMatrix",
           "build_matrix", "genre_distribution", "__version__"]
