"""Exception hierarchy shared across the toolkit."""


class CkeError(Exception):
    """Base class for all toolkit errors."""


class EmptyDocument(CkeError):
    pass


class EmptyCorpus(CkeError):
    pass


class EmptyInput(CkeError):
    pass


class EmptyExport(CkeError):
    pass


class InvalidNgramOrder(CkeError):
    pass


class InvalidSpan(CkeError):
    pass


class UnknownLabel(CkeError):
    pass


class DegenerateDataset(CkeError):
    pass


class DimensionMismatch(CkeError):
    pass


class ClassifierError(CkeError):
    pass


class LabelAlignmentError(CkeError):
    pass


class StratificationError(CkeError):
    pass


class LengthMismatch(CkeError):
    pass


class NotFound(CkeError):
    pass


class InvalidJudgment(CkeError):
    pass
