"""Shared exception and warning types."""


class DataError(ValueError):
    """Unusable tabular input or a malformed dataset."""


class ConfigError(ValueError):
    """Invalid run configuration, registry, or feature recipe."""


class ProtocolError(RuntimeError):
    """An evaluation strategy could not be carried out (e.g. no candidate fit)."""


class DegenerateStratificationWarning(UserWarning):
    """A class has fewer members than folds, so some folds receive none of it."""


class SingleClassWarning(UserWarning):
    """Loaded labels contain a single class; fitting will be impossible."""
