"""Exception types shared across the audit pipeline."""


class FairauditError(Exception):
    """Base class for all errors raised by this package."""


# -- corpus ------------------------------------------------------------------

class MalformedRow(FairauditError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateId(FairauditError):
    def __init__(self, utterance_id):
        self.utterance_id = utterance_id
        super().__init__(f"duplicate utterance_id {utterance_id!r}")


class EmptyCorpus(FairauditError):
    pass


class UnknownAttribute(FairauditError):
    pass


# -- alignment ---------------------------------------------------------------

class EmptyReference(FairauditError):
    pass


class ZeroReference(FairauditError):
    pass


class EmptyCollection(FairauditError):
    pass


# -- glmm --------------------------------------------------------------------

class SingleLevelAttribute(FairauditError):
    pass


class Separation(FairauditError):
    pass


class NonFinite(FairauditError):
    pass


class DimensionMismatch(FairauditError):
    pass


class NotNested(FairauditError):
    pass


class UnknownLevel(FairauditError):
    pass


class DegenerateXbar(FairauditError):
    pass


# -- fairness ----------------------------------------------------------------

class TooFewLevels(FairauditError):
    pass


class KeyMismatch(FairauditError):
    pass


class BadProportions(FairauditError):
    pass


class NonPositiveWeight(FairauditError):
    pass


class ZeroWer(FairauditError):
    """Corpus WER is exactly zero: FAAS is undefined, the model ranks first."""


class CoverageTooLow(FairauditError):
    def __init__(self, fraction, threshold):
        self.fraction = fraction
        self.threshold = threshold
        super().__init__(
            f"transcripts cover {fraction:.1%} of the corpus, below the "
            f"{threshold:.1%} threshold"
        )


class AttributeAuditError(FairauditError):
    """Wraps a module error with the demographic attribute being audited."""

    def __init__(self, attribute, cause):
        self.attribute = attribute
        self.cause = cause
        super().__init__(f"attribute {attribute!r}: {cause}")


# -- store -------------------------------------------------------------------

class NotFound(FairauditError):
    pass


class IoFailure(FairauditError):
    pass
