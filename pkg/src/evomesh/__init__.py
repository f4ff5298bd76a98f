"""evomesh: self-intersection removal, topology-adaptive mesh evolution,
and surface morphing for oriented triangle meshes."""

__version__ = "0.1.0"

from .mesh import SurfaceMesh
from .io import load_mesh, save_mesh
from .errors import (
    EvomeshError, MeshFormatError, MeshTopologyError, GeometryError,
    BoundaryCaseError, PerturbationRetryError, WindingDegeneracyError,
    EvolveError,
)

__all__ = [
    "SurfaceMesh", "load_mesh", "save_mesh",
    "EvomeshError", "MeshFormatError", "MeshTopologyError", "GeometryError",
    "BoundaryCaseError", "PerturbationRetryError", "WindingDegeneracyError",
    "EvolveError",
    "__version__",
]
