"""Exception types and the certificate record shared across modules.

CLI exit codes key off the exception class: input errors exit 2, solver
errors 3, certification failures 4.
"""
from dataclasses import dataclass


class InstanceError(ValueError):
    """Malformed or non-metric instance data."""


class LPError(RuntimeError):
    """The cutting-plane LP loop failed or hit its round cap."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}


@dataclass(frozen=True)
class Certificate:
    """A named inequality ``lhs <= rhs`` recomputed from solver outputs."""

    name: str
    lhs: float
    rhs: float
    tol: float = 1e-6

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.slack >= -self.tol

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "passed": self.passed,
        }


class CertificationError(AssertionError):
    """A theorem-backed inequality failed; always an implementation bug."""

    def __init__(self, certificate: Certificate):
        c = certificate
        super().__init__(
            f"certificate {c.name!r} failed: lhs={c.lhs!r} > rhs={c.rhs!r} "
            f"(slack {c.slack:.3e})"
        )
        self.certificate = certificate


def require(cert: Certificate) -> Certificate:
    if not cert.passed:
        raise CertificationError(cert)
    return cert
