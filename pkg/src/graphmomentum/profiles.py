"""Ready-made packet components: smooth bumps and plane waves."""

from __future__ import annotations

import cmath
import math

from .evolution import PacketComponent, WavePacket, packet_norm


def bump_component(
    edge: int,
    center: float,
    halfwidth: float,
    amplitude: complex = 1.0,
    momentum: float = 0.0,
) -> PacketComponent:
    """Infinitely smooth bump ``A e^{1 - 1/(1-u^2)} e^{i kappa (x-c)}``.

    ``u = (x - center) / halfwidth``; the profile and all its derivatives
    vanish at the support boundary, so packets built from it stay smooth
    under evolution and quadrature converges fast.
    """
    if halfwidth <= 0:
        raise ValueError("halfwidth must be positive")

    def envelope(x: float) -> float:
        u = (x - center) / halfwidth
        q = 1.0 - u * u
        if q <= 0.0:
            return 0.0
        return math.exp(1.0 - 1.0 / q)

    def profile(x: float) -> complex:
        return amplitude * envelope(x) * cmath.exp(1j * momentum * (x - center))

    def derivative(x: float) -> complex:
        u = (x - center) / halfwidth
        q = 1.0 - u * u
        if q <= 0.0:
            return 0.0
        slope = -2.0 * u / (halfwidth * q * q)
        return profile(x) * (slope + 1j * momentum)

    return PacketComponent(
        edge=edge,
        profile=profile,
        support=(center - halfwidth, center + halfwidth),
        derivative=derivative,
    )


def plane_wave_component(
    edge: int,
    interval: tuple[float, float],
    amplitude: complex = 1.0,
    momentum: float = 0.0,
) -> PacketComponent:
    """``c e^{i k x}`` on a whole interval (typically a full edge)."""

    def profile(x: float) -> complex:
        return amplitude * cmath.exp(1j * momentum * x)

    def derivative(x: float) -> complex:
        return 1j * momentum * profile(x)

    return PacketComponent(
        edge=edge, profile=profile, support=interval, derivative=derivative
    )


def normalized(psi: WavePacket, quadrature_points: int = 512) -> WavePacket:
    """Scale a packet to unit L2 norm."""
    n = packet_norm(psi, quadrature_points)
    if n == 0:
        raise ValueError("cannot normalize the zero packet")
    return psi.scaled(1.0 / n)
