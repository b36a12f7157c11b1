"""Exception and warning types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an operation receives arguments that violate its contract."""


class UndefinedCorrelationError(ValueError):
    """Raised when a correlation is requested for constant or too-short input."""


class DisconnectedGraphWarning(UserWarning):
    """Emitted when score recovery runs on a graph with more than one component.

    Scores are gauged to zero mean per component, so cross-component
    comparisons are not meaningful.
    """

    def __init__(self, n_components: int):
        super().__init__(
            f"comparison graph has {n_components} connected components; "
            "scores are only comparable within a component"
        )
        self.n_components = n_components


class MarginMagnitudeWarning(UserWarning):
    """Emitted when an observed margin exceeds the 1-5 scale's gap range."""
