"""Exception hierarchy shared across the pipeline."""


class NoReflowError(Exception):
    """Base class for every data or contract error raised by this package."""


class MissingFile(NoReflowError):
    pass


class ParseError(NoReflowError):
    def __init__(self, message, locus=None):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


class DuplicatePatientId(NoReflowError):
    pass


class MissingMaskForSequence(NoReflowError):
    pass


class DimensionMismatch(NoReflowError):
    pass


class UnsupportedBitDepth(NoReflowError):
    pass


class EmptyStack(NoReflowError):
    pass


class EmptyMask(NoReflowError):
    pass


class NoOnset(NoReflowError):
    pass


class WindowTooShort(NoReflowError):
    pass


class ZeroPeak(NoReflowError):
    pass


class ZeroMean(NoReflowError):
    pass


class ZeroVariance(NoReflowError):
    pass


class DegenerateLength(NoReflowError):
    pass


class MissingSignal(NoReflowError):
    pass


class EmptySample(NoReflowError):
    pass


class AllZeroDifferences(NoReflowError):
    pass


class OutOfRangeP(NoReflowError):
    pass


class DegenerateMargins(NoReflowError):
    pass


class SingleClass(NoReflowError):
    pass


class SingleClassTraining(SingleClass):
    pass


class NonFiniteFeature(NoReflowError):
    pass


class PatientSetMismatch(NoReflowError):
    pass


class EmptyGrid(NoReflowError):
    pass


class EmptyClass(NoReflowError):
    pass


class MissingCovariate(NoReflowError):
    pass


class InvalidShape(NoReflowError):
    pass


class DegenerateConfig(NoReflowError):
    pass
