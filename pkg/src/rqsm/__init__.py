"""RIS-assisted receive quadrature spatial modulation: link, detectors, analysis and design."""

__version__ = "0.1.0"
