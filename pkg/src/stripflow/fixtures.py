"""Tiny hand-checkable operators used by the oracle tests and the CLI.

The three-node fixture has one interior node coupled to two strip nodes
with unit measures. Its weights are pinned directly (the nominal kernel
spec attached to it is never evaluated), so every derived quantity can
be computed by hand.
"""

import numpy as np

from .geometry import INTERIOR, STRIP, DomainBox, Grid
from .kernels import EXCLUDE_STRIP_STRIP, _operator_from_dense, tent_kernel


def toy3_grid():
    """Node 0 interior, nodes 1 and 2 strip; all measures equal to one."""
    domain = DomainBox(dim=1, lo=np.array([0.0]), hi=np.array([3.0]))
    return Grid(
        domain=domain,
        h=1.0,
        r=0.5,
        nodes=np.array([[1.5], [0.5], [2.5]]),
        klass=np.array([INTERIOR, STRIP, STRIP], dtype=np.uint8),
        mu=np.ones(3),
        bdist=np.array([1.5, 0.5, 0.5]),
        counts=(3,),
    )


def toy3(w1=1.0, w2=1.0, edge_mode=EXCLUDE_STRIP_STRIP):
    """Three-node operator with pinned weights.

    w1 and w2 are the interior-to-strip weights; the strip-strip weight is
    one (it only participates in full edge mode). Defaults give unit
    weights everywhere.
    """
    grid = toy3_grid()
    jmat = np.array([
        [0.0, w1, w2],
        [w1, 0.0, 1.0],
        [w2, 1.0, 0.0],
    ])
    return _operator_from_dense(grid, tent_kernel(4.0, 1), jmat, edge_mode)
