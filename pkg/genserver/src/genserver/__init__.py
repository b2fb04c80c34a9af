"""Reference generation backend.

Serves the same two-endpoint JSON protocol the pipeline's client speaks:
POST /generate returning {"candidates": [...]} and GET /health. Runs either
a deterministic rule-based stub (no model assets) or a wrapped seq2seq
checkpoint.
"""

__version__ = "0.1.0"
