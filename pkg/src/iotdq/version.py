"""Single source of the tool version embedded in reports."""

__version__ = "0.1.0"
