"""Exception hierarchy shared by all cascadecomp modules.

The CLI maps these onto exit codes: configuration/validation problems
exit 1, design infeasibilities exit 2, numerical failures exit 3 and
I/O errors (plain OSError) exit 4.
"""


class CascadeCompError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CascadeCompError, ValueError):
    """Operands have inconsistent or unexpected shapes."""


class InputError(CascadeCompError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(CascadeCompError):
    """Scenario configuration is syntactically or semantically invalid.

    ``errors`` collects every validation message, not just the first.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DesignError(CascadeCompError):
    """A compensator synthesis stage failed.

    ``stage`` labels the pipeline step: 'a' (actuator stabilization),
    'b' (decoupling equation) or 'c' (plant stabilization).
    """

    def __init__(self, message, stage=None):
        self.stage = stage
        if stage is not None:
            message = f"stage {stage}: {message}"
        super().__init__(message)


class SpectrumSeparationError(DesignError):
    """Spectrum-separation hypothesis violated: the two subsystem spectra
    overlap (or nearly overlap), so the decoupling equation has no
    well-conditioned solution."""


class UncontrollableModeError(DesignError):
    """A retained mode has (numerically) zero input coefficient, violating
    the approximate-controllability hypothesis."""


class InfeasibleDesignError(DesignError):
    """The kernel construction is singular; the design hypotheses do not
    hold for this plant."""


class ContourError(CascadeCompError):
    """The integration contour does not separate the two spectra."""


class NumericalError(CascadeCompError):
    """An iterative or series computation failed to converge."""


class SingularMatrixError(NumericalError):
    """Linear solve rejected: matrix is singular or nearly singular."""


class DivergenceError(NumericalError):
    """A simulation produced non-finite or unbounded values.

    ``step`` records the failing step index.
    """

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)


class IllConditionedSeparationWarning(UserWarning):
    """Spectra are separated but close enough to degrade conditioning."""
