"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` used by the CLI error
record.
"""


class RoughWallError(Exception):
    code = "error"

    def __init__(self, message="", **context):
        super().__init__(message)
        self.context = context

    def record(self):
        rec = {"error": self.code, "message": str(self)}
        rec.update({k: v for k, v in self.context.items() if v is not None})
        return rec


class MeshError(RoughWallError):
    code = "mesh_error"


class BoundaryConditionError(RoughWallError):
    code = "boundary_condition_error"


class GaugeError(RoughWallError):
    code = "gauge_error"


class SingularSystem(RoughWallError):
    code = "singular_system"


class NewtonDivergence(RoughWallError):
    code = "newton_divergence"


class PointOutsideMesh(RoughWallError):
    code = "point_outside_mesh"


class SegmentOutsideMesh(RoughWallError):
    code = "segment_outside_mesh"


class KernelNotNormalized(RoughWallError):
    code = "kernel_not_normalized"


class TruncationTooLow(RoughWallError):
    code = "truncation_too_low"


class InsufficientSamples(RoughWallError):
    code = "insufficient_samples"


class SingularConstraintSystem(RoughWallError):
    code = "singular_constraint_system"


class DegenerateShear(RoughWallError):
    code = "degenerate_shear"


class EmptySamples(RoughWallError):
    code = "empty_samples"


class NonMonotoneSites(RoughWallError):
    code = "non_monotone_sites"


class NonPositiveSlip(RoughWallError):
    code = "non_positive_slip"


class MaxIterationsExceeded(RoughWallError):
    code = "max_iterations_exceeded"


class GridMismatch(RoughWallError):
    code = "grid_mismatch"


class NoReattachment(RoughWallError):
    code = "no_reattachment"


class ConfigError(RoughWallError):
    code = "config_error"
