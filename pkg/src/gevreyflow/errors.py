"""Exception types shared across the package."""


class GevreyflowError(Exception):
    """Base class for all package errors."""


class InvalidGridError(GevreyflowError):
    """Grid parameters are unsupported or inconsistent with the data."""


class InvalidBandError(GevreyflowError):
    """Requested spectral band exceeds the dealiased range of the grid."""


class InvalidVorticityError(GevreyflowError):
    """A 3-d vorticity field is not divergence free within tolerance."""


class RankMismatchError(GevreyflowError):
    """Operator applied to a field of the wrong rank."""


class WrongDimensionError(GevreyflowError):
    """Operation only defined for a different spatial dimension."""


class TooFewShellsError(GevreyflowError):
    """Radius fit requested with fewer than the minimum usable shells."""


class AllBelowFloorError(GevreyflowError):
    """Every shell peak sits below the numerical noise floor."""


class MissingInputError(GevreyflowError):
    """A closed-form bound was requested without one of its inputs."""


class InvalidLawForAlphaError(GevreyflowError):
    """The selected radius law divides by alpha, but alpha is zero."""


class StepRejectedError(GevreyflowError):
    """Time step violates the advective stability limit."""

    def __init__(self, dt: float, suggested_dt: float):
        super().__init__(
            f"dt={dt:g} violates the CFL limit; try dt <= {suggested_dt:g}"
        )
        self.dt = dt
        self.suggested_dt = suggested_dt


class BlowUpDetectedError(GevreyflowError):
    """Non-finite coefficients appeared during time stepping."""

    def __init__(self, t: float):
        super().__init__(f"non-finite coefficients detected at t={t:g}")
        self.t = t


class InsufficientPaddingError(GevreyflowError):
    """Band limits make a pointwise product alias on the working grid."""


class BandTooLargeError(GevreyflowError):
    """Brute-force triple sum would enumerate too many triads."""

    def __init__(self, band: int, triads: int, limit: int):
        super().__init__(
            f"band {band} needs ~{triads:.3g} triads (limit {limit:.3g})"
        )
        self.band = band
        self.triads = triads
        self.limit = limit


class ZeroBlockError(GevreyflowError):
    """Dyadic block is identically zero, so a ratio is undefined."""


class SnapshotFormatError(GevreyflowError):
    """Snapshot file has a bad magic number, version, or length."""


class ChecksumError(GevreyflowError):
    """Snapshot payload does not match its recorded checksum."""
