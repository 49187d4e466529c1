"""Exception hierarchy.

Precondition failures derive from ``PreconditionError`` (the CLI maps them
to exit code 2); broken internal contracts derive from ``ContractViolation``
(exit code 3).
"""


class IsoglabError(Exception):
    pass


class PreconditionError(IsoglabError, ValueError):
    pass


class ContractViolation(IsoglabError, RuntimeError):
    pass


# fieldkit
class FieldMismatch(PreconditionError):
    pass


class DivisionByZero(IsoglabError, ZeroDivisionError):
    pass


class FieldTooLarge(PreconditionError):
    pass


class NotPrime(PreconditionError):
    pass


class NotIrreducible(PreconditionError):
    pass


# curvekit
class SingularCurve(PreconditionError):
    pass


class CurveMismatch(PreconditionError):
    pass


class NotOnCurve(PreconditionError):
    pass


class SamplingFailure(ContractViolation):
    pass


class ExtensionTooLarge(PreconditionError):
    pass


class BadGroupOrder(PreconditionError):
    pass


# countkit
class Ambiguous(ContractViolation):
    pass


# isogenykit
class NotASubgroup(PreconditionError):
    pass


class KernelNotGaloisStable(PreconditionError):
    pass


class LinkMismatch(PreconditionError):
    pass


# graphkit
class UnsupportedPrime(PreconditionError):
    pass


class TooLargeForExact(PreconditionError):
    pass


class BadActionElement(PreconditionError):
    pass


class NoPath(ContractViolation):
    pass


# protokit
class BadGenerator(PreconditionError):
    pass


class NotInSubgroup(PreconditionError):
    pass


class NotSupersingular(PreconditionError):
    pass


class EigenvalueNotFound(PreconditionError):
    pass


class BasisSamplingFailure(ContractViolation):
    pass


class DegenerateKernel(PreconditionError):
    pass


class MalformedCiphertext(PreconditionError):
    pass


class BadDirectionSet(PreconditionError):
    pass


# appkit
class BadInput(PreconditionError):
    pass


class CurveSearchExhausted(ContractViolation):
    pass


class IrreducibilityCheckFailed(ContractViolation):
    pass
