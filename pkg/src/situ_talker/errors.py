"""Exception types shared across the engine."""

from __future__ import annotations


class WorldLoadError(ValueError):
    """A world file failed schema validation or contains a dangling reference."""


class PlanLibraryError(ValueError):
    """A plan library file is malformed (cycle, dangling link, duplicate event)."""


class GrammarError(ValueError):
    """A grammar file line could not be parsed."""


class TemplateError(ValueError):
    """A template file line could not be parsed."""


class ConfigurationError(KeyError):
    """A context switch names an asset that is not loaded."""


class ContractError(RuntimeError):
    """A caller violated an operation precondition."""


class OrdinalRangeError(ValueError):
    """An ordinal reference points outside the displayed list."""

    def __init__(self, ordinal: int, available: int):
        super().__init__(f"ordinal {ordinal} outside displayed list of {available} items")
        self.ordinal = ordinal
        self.available = available
