"""specband - cross-source guided band selection and fusion for multi-source classification."""

__version__ = "0.3.0"

__all__ = ["__version__"]
