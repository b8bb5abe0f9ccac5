"""Similarity-graph construction, human annotation workflow, and clustering
evaluation for non-categorical 3D shape collections."""

__version__ = "0.1.0"
