"""
RingBound Toolkit
Main entry point composing the field, radial, Orlicz, capacity and
certificate mixins
"""

from ringbound.core.base import ToolkitBase
from ringbound.core.capacity import CapacityMixin
from ringbound.core.certify import CertificateMixin
from ringbound.core.fields import FieldMixin
from ringbound.core.orlicz import OrliczMixin
from ringbound.core.radial import RadialMixin


class RingBound(
    ToolkitBase,
    FieldMixin,
    RadialMixin,
    OrliczMixin,
    CapacityMixin,
    CertificateMixin,
):
    """
    Toolkit for ring-integral bounds and equicontinuity certificates.

    Mixins:
        - FieldMixin: field evaluation, mass constraint, divergence diagnostics
        - RadialMixin: spherical means, ring integral I, Fubini check
        - OrliczMixin: Orlicz lower bounds, epsilon_star, Orlicz curves
        - CapacityMixin: closed-form capacities and the discrete oracle
        - CertificateMixin: capacity-decay and diameter certificates

    Example:
        >>> from ringbound import RingBound, Exponents, RingCondenser
        >>> from ringbound.models.fields import ConstantField
        >>> rb = RingBound(profile="fast")
        >>> exps = Exponents(n=2, p=2)
        >>> ring = RingCondenser((0, 0), 1.0, 2.718281828)
        >>> I = rb.ring_integral_I(ConstantField(1.0), ring, exps)
        >>> rb.modulus_upper_bound(I, exps)  # about 2 pi
    """

    pass
