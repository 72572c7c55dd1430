"""Exception types raised across the package."""


class GiantSSHError(Exception):
    """Base class; ``record()`` gives a machine-readable summary for the CLI."""

    kind = "error"

    def record(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class ConfigError(GiantSSHError, ValueError):
    kind = "config"

    def __init__(self, message, problems=None):
        self.problems = list(problems) if problems else [str(message)]
        super().__init__(message)

    def record(self) -> dict:
        return {"error": self.kind, "message": str(self), "problems": self.problems}


class NotHermitianError(GiantSSHError, ValueError):
    kind = "not_hermitian"


class NormDriftError(GiantSSHError, RuntimeError):
    kind = "norm_drift"


class PreparationError(GiantSSHError, RuntimeError):
    kind = "preparation"


class NonAdiabaticError(GiantSSHError, RuntimeError):
    kind = "non_adiabatic"

    def __init__(self, message, *, final_fidelity=None, min_separation=None, suggested_T=None):
        super().__init__(message)
        self.final_fidelity = final_fidelity
        self.min_separation = min_separation
        self.suggested_T = suggested_T

    def record(self) -> dict:
        rec = super().record()
        rec.update(final_fidelity=self.final_fidelity, min_separation=self.min_separation,
                   suggested_T=self.suggested_T)
        return rec
