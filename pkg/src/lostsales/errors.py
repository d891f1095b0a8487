"""Exception taxonomy shared across the package."""


class LostSalesError(Exception):
    """Base class; carries a short machine-parseable code."""

    code = "error"


class ConfigError(LostSalesError):
    """Invalid configuration value or file."""

    code = "config"


class ActionError(LostSalesError):
    """Action outside the admissible range or malformed action vector."""

    code = "action"


class ComparisonError(LostSalesError):
    """Run comparison inputs do not line up (episode grids differ, ...)."""

    code = "compare"


class SizeError(LostSalesError):
    """Problem instance exceeds the memory budget of an exact method."""

    code = "size"


class ChainStructureError(LostSalesError):
    """Markov chain has no unique stationary law; message names the structure."""

    code = "chain"
