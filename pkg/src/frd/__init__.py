"""Fréchet radiomics distance (FRD).

A radiology-specific distribution distance between a real and a synthetic
image dataset, built on 94 interpretable radiomics biomarkers, plus the
perturbation validation protocol, contrast-kinetics analysis and phantom
generation around it.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
