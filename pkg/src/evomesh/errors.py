"""Exception hierarchy."""


class EvomeshError(Exception):
    """Base class for all library errors."""

    category = "error"


class MeshFormatError(EvomeshError):
    """Malformed or unsupported mesh file."""

    category = "format"


class MeshTopologyError(EvomeshError):
    """Input connectivity is not usable (e.g. an edge with >2 faces)."""

    category = "topology"


class GeometryError(EvomeshError):
    """Degenerate geometry where a non-degenerate element is required."""

    category = "geometry"


class BoundaryCaseError(EvomeshError):
    """A narrow-phase or re-triangulation degeneracy that perturbation must resolve."""

    category = "boundary-case"

    def __init__(self, detail, message=""):
        self.detail = detail
        super().__init__(message or f"boundary case: {detail}")


class PerturbationRetryError(EvomeshError):
    """Perturb-and-retry budget exhausted without escaping boundary cases."""

    category = "retries-exhausted"

    def __init__(self, attempts, detail):
        self.attempts = attempts
        self.detail = detail
        super().__init__(
            f"boundary case '{detail}' persisted after {attempts} perturbation attempts")


class WindingDegeneracyError(EvomeshError):
    """Too many consecutive degenerate rays for one winding query."""

    category = "winding-degeneracy"


class EvolveError(EvomeshError):
    """Mesh evolution failure (non-finite velocity, invariant breach)."""

    category = "evolve"
