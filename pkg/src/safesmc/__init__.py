"""safesmc - safe sliding-mode control of a 3-DOF marine vessel."""

__version__ = "0.1.0"
