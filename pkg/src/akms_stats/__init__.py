"""Statistics of products and ratios of alpha-kappa-mu shadowed variables."""

__version__ = "0.1.0"
