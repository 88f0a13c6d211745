"""Causal DAG identification workbench: parsing, d-separation, adjustment,
instrument checks, implications and linear-Gaussian simulation."""

import os as _os

# Wheels ship the corpus next to the package; source builds use the tree.
_bundled = _os.path.join(_os.path.dirname(__file__), "corpus")
if _os.path.isdir(_bundled) and not _os.environ.get("EGP_CORPUS_DIR"):
    _os.environ["EGP_CORPUS_DIR"] = _bundled

from ._core import (  # noqa: E402
    Error,
    Graph,
    ParseError,
    analyze,
    backdoor_admissible,
    d_separated,
    default_corpus_dir,
    enumerate_paths,
    factorize,
    implied_independencies,
    iv_check,
    minimal_adjustment_sets,
    parse,
    replay_corpus,
    sample,
    serialize,
    true_effect,
)

__all__ = [
    "Error",
    "Graph",
    "ParseError",
    "analyze",
    "backdoor_admissible",
    "d_separated",
    "default_corpus_dir",
    "enumerate_paths",
    "factorize",
    "implied_independencies",
    "iv_check",
    "minimal_adjustment_sets",
    "parse",
    "replay_corpus",
    "sample",
    "serialize",
    "true_effect",
]
