"""Latent space dynamics identification toolkit.

Pipeline: generate parametric PDE snapshot data, compress it to a low
dimensional latent space (POD or a masked shallow autoencoder), fit the
latent time derivatives against a library of candidate functions by least
squares, then integrate the identified ODE at unseen parameter points and
reconstruct full states.
"""

__version__ = "0.1.0"
