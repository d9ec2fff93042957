"""paraqa: paraphrase quality metrics, dataset linting, and
paraphrase-assisted QA simulation for question corpora.

The package splits into loading (corpus), linting (errscan), metrics
(metrics, embeddings), paraphrase sources (paragen), the template
parser and recovery experiment (alist), experiment aggregation
(harness) and the annotation backend (annosvc).
"""

from __future__ import annotations

from .errors import ParaqaError, UnknownUid

__version__ = "0.1.0"

__all__ = ["ParaqaError", "UnknownUid", "__version__"]
