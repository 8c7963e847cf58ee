"""minisa: a path-sensitive symbolic-execution analyzer for MiniC."""

__version__ = "0.1.0"
