"""Molecular communication with a reversible adsorption/desorption spherical receiver.

The analytic channel model lives in :mod:`adreceiver.channel`, bit-error
probabilities in :mod:`adreceiver.error_model`, the particle simulator in
:mod:`adreceiver.sim` and the command-line front end in :mod:`adreceiver.cli`.
"""

from .exceptions import (
    ADReceiverError,
    ConfigError,
    DomainError,
    GeometryError,
    QuadratureError,
    ReceiverKindError,
    StepSizeWarning,
)
from .params import ReceiverKind, SystemParams

__version__ = "0.1.0"

__all__ = [
    "ADReceiverError", "ConfigError", "DomainError", "GeometryError", "QuadratureError",
    "ReceiverKindError", "StepSizeWarning", "ReceiverKind", "SystemParams",
]
