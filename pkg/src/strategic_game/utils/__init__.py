from .numerics import bisect_increasing, first_argmin, gauss_legendre, golden_section_min, quad

__all__ = ["bisect_increasing", "first_argmin", "gauss_legendre", "golden_section_min", "quad"]
