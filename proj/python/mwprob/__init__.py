"""Probability rules for many-worlds theories.

States and transforms are plain dicts in the same layout as the CLI's JSON
files (see docs/formats.md).
"""

import json
from fractions import Fraction

from . import _core
from ._core import Error, hoeffding_floor, naive_count_measure, run_cli

__all__ = [
    "Error",
    "validate",
    "probabilities",
    "apply",
    "check_axiom3",
    "solve_flow",
    "derive",
    "derive_rational",
    "lemma1",
    "lemma2",
    "counterexample",
    "typical_measure",
    "naive_count_measure",
    "hoeffding_floor",
    "run_cli",
]


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def validate(state, transform=None):
    return json.loads(_core.validate(_dump(state), None if transform is None else _dump(transform)))


def probabilities(state, rule=None):
    """Map of world label to probability."""
    out = json.loads(_core.probabilities(_dump(state), rule))
    return {e["world"]: e["p"] for e in out["probabilities"]}


def apply(transform, state):
    return json.loads(_core.apply(_dump(transform), _dump(state)))


def check_axiom3(state, transform, rule=None):
    return json.loads(_core.check_axiom3(_dump(state), _dump(transform), rule))


def solve_flow(state, transform, rule=None):
    return json.loads(_core.solve_flow(_dump(state), _dump(transform), rule))


def derive(state, k, resolution, pinch=True):
    return json.loads(_core.derive(_dump(state), k, resolution, pinch))


def derive_rational(counts, resolution):
    return {w: Fraction(n, d) for w, n, d in _core.derive_rational(list(counts), resolution)}


def lemma1(state, n, m):
    return json.loads(_core.lemma_procedure(_dump(state), 1, n, m))


def lemma2(state, l, k):
    return json.loads(_core.lemma_procedure(_dump(state), 2, l, k))


def counterexample():
    return json.loads(_core.counterexample())


def typical_measure(q, n, eps, theory="quantum"):
    return _core.typical_measure(theory, q, n, eps)
