"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`MfspeechError`.
Two branches map onto the CLI exit codes: :class:`InputError` (bad files,
bad parameters, exit 2) and :class:`AnalysisError` (the signal was read fine
but the estimator degenerated on it, exit 3).
"""


class MfspeechError(Exception):
    """Base class for all package errors."""


class InputError(MfspeechError, ValueError):
    """Invalid input data, file or parameter."""


class AnalysisError(MfspeechError, ArithmeticError):
    """An estimator degenerated on otherwise valid input."""


# audio_io
class MalformedContainer(InputError):
    pass


class UnsupportedEncoding(InputError):
    pass


class EmptyData(InputError):
    pass


class InvalidSignal(InputError):
    """Non-finite samples, non-positive sample rate, empty series."""


class AllZeroSignal(InputError):
    pass


class MalformedName(InputError):
    pass


class CorpusIOError(InputError, OSError):
    pass


# synth
class QZero(InputError):
    pass


class NonPowerOfTwo(InputError):
    pass


class EmbeddingNotPSD(AnalysisError):
    pass


# mfdfa / wtmm
class TooShort(InputError):
    pass


class InvalidGrid(InputError):
    pass


class UnsupportedOrder(InputError):
    pass


class SignalTooShortForScale(InputError):
    def __init__(self, scale, n_samples, needed):
        self.scale = scale
        self.n_samples = n_samples
        self.needed = needed
        super().__init__(
            f"signal of {n_samples} samples is too short for scale {scale} "
            f"(needs at least {needed})"
        )


class DegenerateFit(AnalysisError):
    pass


class ZeroLocalFluctuation(AnalysisError):
    def __init__(self, scale, segment, message=None):
        self.scale = scale
        self.segment = segment
        super().__init__(
            message
            or f"zero local fluctuation at scale {scale}, segment {segment}"
        )


class NoMaximaAtScale(AnalysisError):
    def __init__(self, scale):
        self.scale = scale
        super().__init__(f"no modulus maxima survive at scale {scale}")


# spectrum
class DegenerateSpectrum(AnalysisError):
    pass


class UpwardParabola(AnalysisError):
    pass


class CollinearPoints(AnalysisError):
    pass


class NoRealRoots(AnalysisError):
    pass


# classifier
class SingleClass(InputError):
    pass


class NonFiniteFeature(InputError):
    pass


class ZeroVarianceFeature(InputError):
    pass


class InsufficientSamples(InputError):
    pass


class ClassMismatch(InputError):
    pass
