"""Physical constants (CODATA 2018) and derived electron scales.

All public interfaces of this package are SI; formulas quoted from the
Gaussian-unit literature are converted here once, behind named constants,
so that no other module carries unit-system factors.
"""

import math

# CODATA 2018 (SI-exact where the 2019 redefinition makes them so)
C = 299792458.0                     # speed of light [m/s], exact
E_CHARGE = 1.602176634e-19          # elementary charge |e| [C], exact
HBAR = 1.054571817e-34              # reduced Planck constant [J s]
M_E = 9.1093837015e-31              # electron mass [kg]
M_E_C2_EV = 510998.95000            # electron rest energy [eV]
ALPHA = 7.2973525693e-3             # fine-structure constant
MU_0 = 1.25663706212e-6             # vacuum permeability [N/A^2]

EV = E_CHARGE                       # 1 eV in joules

# Electron charge with sign, e = -|e|
E_SIGNED = -E_CHARGE

# Reduced Compton wavelength hbar/(m_e c) [m]
LAMBDA_BAR_C = HBAR / (M_E * C)

# hbar*c in eV*m, for converting inverse energies to lengths
HBAR_C_EV_M = HBAR * C / EV

# Electron mass squared expressed as a magnetic field, m^2 c^2/(|e| hbar) [T].
# This is the field scale at which |e| B hbar ~ (m c)^2.
M2_FIELD_T = M_E**2 * C**2 / (E_CHARGE * HBAR)

FM = 1.0e-15                        # 1 femtometre [m]

# Conversion for Gaussian-convention bilinear field formulas: an expression
# written as B^2 (no 8*pi) in Gaussian units equals (4*pi/mu_0) * B_SI^2 in
# J/m^3 when multiplied by a volume in m^3.
GAUSSIAN_B2_J_PER_M3 = 4.0 * math.pi / MU_0


def gamma_from_kinetic_energy(kinetic_energy_ev):
    """Lorentz factor for an electron of given kinetic energy in eV."""
    return 1.0 + kinetic_energy_ev / M_E_C2_EV
