"""Exception hierarchy shared by every layer of the engine.

Each error carries a short machine-readable ``code``; the shell maps codes to
process exit statuses.
"""
from __future__ import annotations


class PairRankError(Exception):
    code = "engine_error"
    exit_status = 1


class ZeroDenominator(PairRankError, ZeroDivisionError):
    code = "zero_denominator"


class UnknownVariable(PairRankError, KeyError):
    code = "unknown_variable"

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return Exception.__str__(self)


class PoleAtPoint(PairRankError, ZeroDivisionError):
    code = "pole_at_point"


class ResourceLimit(PairRankError):
    code = "resource_limit"
    exit_status = 3


class MissingParametrization(PairRankError):
    code = "missing_parametrization"


class UnsupportedClass(PairRankError):
    code = "unsupported_class"


class VerificationFailed(PairRankError):
    code = "verification_failed"

    def __init__(self, check: str, detail: str = "") -> None:
        self.check = check
        super().__init__(f"{check}: {detail}" if detail else check)


class DimMismatch(PairRankError):
    code = "dim_mismatch"


class NegativeRank(PairRankError):
    code = "negative_rank"


class UnknownConnectedness(PairRankError):
    code = "unknown_connectedness"


class OracleDisagreement(PairRankError):
    code = "oracle_disagreement"
