class PlotError(ValueError):
    """Input CSV cannot be rendered (empty, unreadable, wrong shape)."""


class SchemaError(PlotError):
    """A column required by the requested figure is missing."""
