"""Exception hierarchy shared by every stage."""


class AaneArchError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class DegenerateGrid(AaneArchError, ValueError):
    code = "degenerate_grid"


class ZeroCases(AaneArchError, ValueError):
    code = "zero_cases"


class AsymmetricMatrix(AaneArchError, ValueError):
    code = "asymmetric_matrix"


class ZeroBaseline(AaneArchError, ValueError):
    code = "zero_baseline"


class UnknownNode(AaneArchError, KeyError):
    code = "unknown_node"

    def __str__(self):
        return Exception.__str__(self)


class DimensionTooLarge(AaneArchError, ValueError):
    code = "dimension_too_large"


class NonFinite(AaneArchError, FloatingPointError):
    code = "non_finite"


class TooManyClusters(AaneArchError, ValueError):
    code = "too_many_clusters"


class SingularCovariance(AaneArchError, ValueError):
    code = "singular_covariance"


class SingleCluster(AaneArchError, ValueError):
    code = "single_cluster"


class ZeroDiameter(AaneArchError, ValueError):
    code = "zero_diameter"


class MismatchedNodes(AaneArchError, ValueError):
    code = "mismatched_nodes"


class InsufficientData(AaneArchError, ValueError):
    code = "insufficient_data"


class ConfigError(AaneArchError, ValueError):
    code = "config_error"


class InputError(AaneArchError, ValueError):
    code = "input_error"
