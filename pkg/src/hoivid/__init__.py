"""Layout-instructed latent diffusion for hand-object interaction video reenactment."""

__version__ = "0.1.0"
