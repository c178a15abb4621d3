import numpy as np
import pytest

import stripflow as sf

BOX1 = sf.DomainBox(1, (0.0,), (1.0,))
BOX2 = sf.DomainBox(2, (0.0, 0.0), (1.0, 1.0))


def make_op(h, r, kernel, edge_mode=sf.EXCLUDE_STRIP_STRIP, dim=1,
            allow_empty=False):
    box = BOX1 if dim == 1 else BOX2
    grid = sf.build_grid(box, h, r, allow_empty_interior=allow_empty)
    return sf.assemble(grid, kernel, edge_mode)


@pytest.fixture(scope="session")
def toy3_op():
    return sf.toy3()


@pytest.fixture(scope="session")
def toy3_full_op():
    return sf.toy3(edge_mode=sf.FULL)


@pytest.fixture(scope="session")
def toy3_asym_op():
    return sf.toy3(w1=2.0, w2=1.0)


# small 1D workhorse: 16 nodes, 8 strip, 8 interior
@pytest.fixture(scope="session")
def op16():
    return make_op(1.0 / 16.0, 0.25, sf.tent_kernel(0.5, 1))


@pytest.fixture(scope="session")
def op16_full():
    return make_op(1.0 / 16.0, 0.25, sf.tent_kernel(0.5, 1), edge_mode=sf.FULL)


@pytest.fixture(scope="session")
def sing16():
    def build(p):
        return make_op(1.0 / 16.0, 0.25, sf.singular_kernel(0.5, p, 1))
    return build


# 2D: 8x8 nodes, boundary ring strip
@pytest.fixture(scope="session")
def op2d():
    return make_op(1.0 / 8.0, 0.125, sf.tent_kernel(0.25, 2), dim=2)


# acceptance-scale 1D grids, h = 1/64
@pytest.fixture(scope="session")
def op64():
    return make_op(1.0 / 64.0, 0.125, sf.tent_kernel(0.25, 1))


@pytest.fixture(scope="session")
def op64_full():
    return make_op(1.0 / 64.0, 0.125, sf.tent_kernel(0.25, 1), edge_mode=sf.FULL)


@pytest.fixture(scope="session")
def sing64():
    def build(p):
        return make_op(1.0 / 64.0, 0.125, sf.singular_kernel(0.5, p, 1))
    return build


@pytest.fixture(scope="session")
def op64_rr():
    return make_op(1.0 / 64.0, 0.25, sf.tent_kernel(0.25, 1))


def random_strip_field(op, rng, scale=1.0):
    return sf.StripField(scale * rng.standard_normal(op.n_strip), op.grid)
