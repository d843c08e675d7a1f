"""Nested-loop statistics and disk weights for conformal loop ensembles on Liouville quantum gravity disks.

Modules: ``specfun`` (special-function identities), ``params`` (model and
weight parameters), ``radius`` (conformal-radius law and nesting renewal),
``levy`` (stable pairs and the marked process), ``excursion`` (stable
excursion functionals), ``partition`` (disk weights and their recursion),
``experiments`` and ``cli`` (named runs of every check).

Set ``LQGNEST_NO_NUMBA=1`` before import to use the pure-numpy kernels.
"""

__version__ = "0.1.0"

from ._accel import backend  # noqa: E402
from .params import ModelParams, SigmaFamily  # noqa: E402

__all__ = ["__version__", "backend", "ModelParams", "SigmaFamily"]
