"""Tree-ensemble regression for friction stir welding process parameters."""

__version__ = "0.1.0"
