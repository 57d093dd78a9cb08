"""
Error Types
Exception hierarchy shared by all modules and mapped to CLI exit codes
"""


class CcpgError(Exception):
    """Base class for every error raised by this package"""


class GraphArgumentError(CcpgError, ValueError):
    """Out-of-range vertex, empty or overlapping vertex sets"""


class GraphFormatError(CcpgError, ValueError):
    """Malformed DAG input: duplicate edges, self-loops, bad JSON fields"""


class CyclicGraphError(GraphFormatError):
    """Edge set contains a directed cycle"""


class RegimeError(CcpgError, KeyError):
    """CI query names a regime the oracle does not know"""

    def __str__(self) -> str:
        return Exception.__str__(self)


class SampleSizeError(CcpgError, ValueError):
    """Too few samples for the requested test"""


class NumericalError(CcpgError, ArithmeticError):
    """Covariance submatrix stays singular after the ridge fallback"""


class PrefixStallError(CcpgError, RuntimeError):
    """A prefix step returned S' = S (CI answers inconsistent with any DAG)"""

    def __init__(self, prefix, message: str = ""):
        self.prefix = frozenset(prefix)
        super().__init__(message or f"prefix learning stalled at S={sorted(self.prefix)}")


class PartitionError(CcpgError, ValueError):
    """CCPG components do not partition the vertex set"""


class ConfigError(CcpgError, ValueError):
    """Tester or run settings outside their valid range"""
