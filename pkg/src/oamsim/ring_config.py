"""Relativistic kinematics, frozen-OAM ring solving, and Landau-state geometry.

Sign conventions: the electron charge is e = -|e|; the ring magnetic field
B0 points along +z; electrons circulate counterclockwise (omega > 0); the
stored radial electric field component E is negative (pointing inward), so
electric and magnetic forces on the electron are oppositely directed.
"""

from dataclasses import dataclass

import numpy as np

from .constants import C, E_CHARGE, HBAR, M_E, M_E_C2_EV
from .errors import DomainError


@dataclass(frozen=True)
class Kinematics:
    """Relativistic state of the beam centroid."""

    kinetic_energy_ev: float
    gamma: float
    beta_tilde: float
    velocity: float         # m/s


@dataclass(frozen=True)
class RingSetup:
    """Field configuration of a storage ring, frozen or generic."""

    kin: Kinematics
    B0: float               # average vertical field [T]
    E: float                # radial electric field component [V/m], signed
    R0: float               # ring radius [m]
    n: float                # field index
    omega: float            # orbital angular velocity [rad/s]
    Omega: float            # Larmor angular velocity, z-component [rad/s]


@dataclass(frozen=True)
class LandauGeometry:
    """Transverse geometry of a Landau/twisted state in a uniform field."""

    B: float                # [T]
    w_m: float              # beam waist [m]
    mean_r2: float          # <r^2> [m^2]
    n_r: int                # radial quantum number
    l_z: int                # OAM projection


def kinematics(kinetic_energy_ev):
    """Relativistic kinematics of an electron with the given kinetic energy."""
    if kinetic_energy_ev < 0:
        raise DomainError(f"kinetic energy must be >= 0 eV, got {kinetic_energy_ev}")
    gamma = 1.0 + kinetic_energy_ev / M_E_C2_EV
    beta = np.sqrt(1.0 - 1.0 / gamma**2)
    return Kinematics(kinetic_energy_ev=float(kinetic_energy_ev), gamma=gamma,
                      beta_tilde=beta, velocity=beta * C)


def larmor_omega(kin, B, E):
    """z-component of the OAM Larmor angular velocity in vertical B and radial E.

    Scalar reduction of the precession operator for a centroid with purely
    azimuthal momentum in ideal fields:

        Omega_z = -e/(2 gamma m_e) * (B + beta_tilde * E / c),   e = -|e|.

    The one-half factor is the orbital (g = 1) moment; with it, the frozen
    field configuration of frozen_setup satisfies Omega_z = omega exactly.
    E is the signed radial field component in V/m (negative = inward).
    """
    return E_CHARGE / (2.0 * kin.gamma * M_E) * (B + kin.beta_tilde * E / C)


def frozen_setup(kinetic_energy_ev, R0, n):
    """Solve the frozen-OAM ring for the given energy, radius and field index.

    The orbital angular velocity follows from R0 = V/omega, the vertical
    field from omega = |e| B0 / (gamma m (gamma^2 + 1)), and the radial
    electric field from B0 = (2/beta^2 - 1) beta x E, all in closed form.
    The resulting Larmor frequency equals omega to rounding.
    """
    if kinetic_energy_ev <= 0:
        raise DomainError("frozen setup requires kinetic energy > 0 eV")
    if R0 <= 0:
        raise DomainError(f"ring radius must be positive, got {R0}")
    if not 0.0 < n < 1.0:
        raise DomainError(f"field index must satisfy 0 < n < 1, got {n}")
    kin = kinematics(kinetic_energy_ev)
    omega = kin.velocity / R0
    B0 = omega * kin.gamma * M_E * (kin.gamma**2 + 1.0) / E_CHARGE
    # B0 = (2/beta^2 - 1) * beta x E with E radial (inward) and B0 vertical.
    E = -B0 * C / ((2.0 / kin.beta_tilde**2 - 1.0) * kin.beta_tilde)
    Omega = larmor_omega(kin, B0, E)
    return RingSetup(kin=kin, B0=B0, E=E, R0=float(R0), n=float(n),
                     omega=omega, Omega=Omega)


def frozen_residual(setup):
    """|Omega - omega| / |omega| for a ring setup."""
    if setup.omega == 0.0:
        raise DomainError("residual undefined for omega = 0")
    return abs(setup.Omega - setup.omega) / abs(setup.omega)


def field_gradients(setup):
    """Radial gradients (dBz/dR [T/m], dEr/dR of the quasielectric field [V/m^2]).

    dBz/dR = -n B0 / R0; the co-moving quasielectric field E_r = beta c B_z
    gives dEr/dR = -beta n B0 c / R0 at the interface (V/m^2).
    """
    dbz_dr = -setup.n * setup.B0 / setup.R0
    der_dr = setup.kin.beta_tilde * dbz_dr * C
    return dbz_dr, der_dr


def landau_geometry(B, n_r, l_z):
    """Beam waist and mean square radius of a Landau state.

    w_m = 2 sqrt(hbar/|e B|);  <r^2> = (w_m^2/2)(2 n_r + |l_z| + 1).
    """
    if B == 0:
        raise DomainError("beam waist diverges at B = 0")
    if n_r < 0 or int(n_r) != n_r:
        raise DomainError(f"radial quantum number must be an integer >= 0, got {n_r}")
    if int(l_z) != l_z:
        raise DomainError(f"l_z must be an integer, got {l_z}")
    w_m = 2.0 * np.sqrt(HBAR / (E_CHARGE * abs(B)))
    mean_r2 = 0.5 * w_m**2 * (2 * int(n_r) + abs(int(l_z)) + 1)
    return LandauGeometry(B=float(B), w_m=w_m, mean_r2=mean_r2,
                          n_r=int(n_r), l_z=int(l_z))
