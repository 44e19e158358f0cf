"""Aggregate pytest-bdd step definitions for the behavioural suites."""

from .estimator_statistics import *  # noqa: F403
from .gradient_spectrum import *  # noqa: F403
from .mechanical_invariants import *  # noqa: F403
from .optimizer_benchmarks import *  # noqa: F403
from .spectral_tracking import *  # noqa: F403

# Re-export all imported step definitions so ``from tests.steps import *``
# makes them available to scenario modules during collection.
__all__: list[str] = [
    name for name in globals() if not name.startswith("_") and name != "annotations"
]
