"""Joint active/passive positioning of an extended agent."""

__version__ = "1.0.0"
