"""Exception types shared across the package."""


class EventflowError(Exception):
    """Base class for all eventflow errors."""


class CycleDetected(EventflowError):
    """The edge set of a graph is cyclic (corrupted model file)."""


class EmptyDesign(EventflowError):
    """A regression design has zero usable rows."""


class NonFinite(EventflowError):
    """Inputs to a fitter contain NaN or infinity."""


class InsufficientHistory(EventflowError):
    """A node has fewer usable training rows than min_history_days."""

    def __init__(self, target, n_rows, needed):
        self.target = target
        self.n_rows = n_rows
        self.needed = needed
        super().__init__(f"{target}: {n_rows} usable rows, {needed} required")


class Diverged(EventflowError):
    """A fit diverged: objective blew up or the linear predictor overflowed."""


class MissingParentValue(EventflowError):
    """A node prediction was requested without a value for one of its parents."""

    def __init__(self, parent, target):
        self.parent = parent
        self.target = target
        super().__init__(f"no value for parent {parent} of node {target}")


class MissingCovariateValue(EventflowError):
    """A node model uses a covariate for which no value was supplied."""


class PredictionOverflow(EventflowError):
    """Exp-link linear predictor exceeded the overflow guard."""

    def __init__(self, key, eta):
        self.key = key
        self.eta = eta
        super().__init__(f"linear predictor {eta:.3g} overflows exp link at node {key}")


class AllMasked(EventflowError):
    """Every actual value fell below the percentage-error masking floor."""


class ParseError(EventflowError):
    """A data file row could not be parsed."""

    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column '{column}': {message}")


class SchemaMismatch(EventflowError):
    """A file's structure does not match the expected schema."""


class ConfigError(EventflowError):
    """A configuration file or value is invalid."""


class InvalidPanel(EventflowError):
    """A panel failed validation; carries the list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"panel failed validation: {lines}{more}")
