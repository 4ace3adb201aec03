import numpy as np
import pytest

import gausstab as gs


class Case:
    """Mesh with geometry and lazily assembled operators."""

    def __init__(self, mesh):
        self.mesh = mesh
        self.geom = gs.compute_geometry(mesh)
        self.weight = gs.gaussian_weight()
        self._assembly = None

    @property
    def assembly(self):
        if self._assembly is None:
            self._assembly = gs.assemble(self.mesh, self.geom, self.weight)
        return self._assembly


@pytest.fixture(scope="session")
def weight():
    return gs.gaussian_weight()


@pytest.fixture(scope="session")
def sphere4():
    return Case(gs.generate(gs.SurfaceSpec(kind="sphere", resolution=4)))


@pytest.fixture(scope="session")
def sphere5():
    return Case(gs.generate(gs.SurfaceSpec(kind="sphere", resolution=5)))


@pytest.fixture(scope="session")
def disk5():
    return Case(gs.generate(gs.SurfaceSpec(kind="plane_disk", resolution=5, trunc=8.0)))


@pytest.fixture(scope="session")
def cylinder5():
    return Case(
        gs.generate(gs.SurfaceSpec(kind="cylinder", resolution=5, half_height=12.0))
    )


def random_smooth_field(mesh, rng, taper=None):
    """Low-degree ambient polynomial sampled at the vertices."""
    x = mesh.vertices
    d = x.shape[1]
    vals = (
        rng.uniform(0.5, 1.5)
        + x @ rng.uniform(-0.3, 0.3, d)
        + np.einsum("vi,ij,vj->v", x, rng.uniform(-0.1, 0.1, (d, d)), x)
    )
    return vals if taper is None else vals * taper
