"""Degraded wiretap channel analysis toolkit.

Secrecy-metric computation, secrecy-capacity solving with KKT
certificates, information-spectrum estimation, and finite-blocklength
simulation of resolvability-based wiretap codes.
"""

__version__ = "0.1.0"

from .channels import Channel, WiretapChannel, bsc, compose
from .prob import Distribution, JointDistribution

__all__ = [
    "__version__",
    "Channel",
    "WiretapChannel",
    "Distribution",
    "JointDistribution",
    "bsc",
    "compose",
]
