"""Electromagnetic moments of the twisted electron.

Covers the tensor magnetic polarizability (TMP), intrinsic and spectroscopic
electric quadrupole moments (EQM), the quadrupole tensor operator, the
current-loop quadrupole moment of the orbiting spin (ECQM), and the
order-of-magnitude scale estimates used for ring experiments.

Charges are stored in coulombs with the electron sign convention e = -|e|
already folded in, so the intrinsic EQM Q0 = -e <r^2> comes out positive.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .constants import (ALPHA, E_SIGNED, FM, GAUSSIAN_B2_J_PER_M3, HBAR,
                        HBAR_C_EV_M, LAMBDA_BAR_C)
from .errors import DomainError
from .ring_config import LandauGeometry, landau_geometry


@dataclass(frozen=True)
class MomentSet:
    """Moments of a beam model in a given field."""

    beta_T_fm3: float    # tensor magnetic polarizability [fm^3]
    Q0_Cm2: float        # intrinsic EQM [C m^2]
    Qs_Cm2: float        # spectroscopic EQM [C m^2]
    w_m: float           # beam waist for the configured field [m]
    mean_r2: float       # <r^2> of the beam model [m^2]


@dataclass(frozen=True)
class EcqmTensor:
    """Current quadrupole moment tensor, traceless symmetric, in C m^2."""

    components: np.ndarray


def tmp_electron(mass_ratio=1.0):
    """Tensor magnetic polarizability e^2 hbar^2/(8 m^3) in fm^3.

    With Gaussian-unit e^2 = alpha hbar c this is (alpha/8) lambda_bar_C^3,
    about 5.25e4 fm^3 for the electron.  mass_ratio rescales the particle
    mass in units of m_e (the value falls off as 1/mass^3).
    """
    return ALPHA / 8.0 * (LAMBDA_BAR_C / (FM * mass_ratio)) ** 3


def tmp_coefficient(B):
    """TMP dynamics coefficient b = -beta_T B^2 in rad/s for a field B [T].

    The Gaussian-convention product beta_T B^2 (beta_T a volume) converts to
    joules as beta_T[m^3] * (4 pi / mu_0) * B[T]^2; dividing by hbar gives
    the angular-frequency coefficient of the Lz^2 Hamiltonian term.
    """
    beta_t_m3 = tmp_electron() * FM**3
    return -beta_t_m3 * GAUSSIAN_B2_J_PER_M3 * B**2 / HBAR


def tmp_energy_shift(beta_T_fm3, L, B, angle):
    """Energy shift -beta_T (L . B)^2 in angular-frequency units [rad/s].

    angle is the angle between L and B; the projection L B cos(angle) enters
    squared.  Uses the same Gaussian-to-SI conversion as tmp_coefficient.
    """
    if L < 1 or int(L) != L:
        raise DomainError(f"L must be an integer >= 1, got {L}")
    if B < 0:
        raise DomainError(f"B must be >= 0, got {B}")
    beta_t_m3 = beta_T_fm3 * FM**3
    proj_sq = (L * B * np.cos(angle)) ** 2
    return -beta_t_m3 * GAUSSIAN_B2_J_PER_M3 * proj_sq / HBAR


def load_radial_density(path):
    """Read a two-column radial density file (r [m], density >= 0).

    Lines starting with '#' are comments.  Returns (r, rho) arrays.
    """
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
            rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise DomainError(f"{path}: no data rows")
    r = np.array([row[0] for row in rows])
    rho = np.array([row[1] for row in rows])
    if np.any(np.diff(r) <= 0):
        raise DomainError(f"{path}: radial grid must be strictly increasing")
    if np.any(rho < 0):
        raise DomainError(f"{path}: density must be nonnegative")
    return r, rho


def mean_square_radius(r, rho):
    """<r^2> = int(rho r^3 dr) / int(rho r dr) by composite Simpson quadrature."""
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if r.shape != rho.shape or r.ndim != 1 or r.size < 3:
        raise DomainError("density table needs matching 1-d arrays of length >= 3")
    if np.any(np.diff(r) <= 0):
        raise DomainError("radial grid must be strictly increasing")
    if np.any(rho < 0):
        raise DomainError("density must be nonnegative")
    norm = simpson(rho * r, x=r)
    if norm <= 0:
        raise DomainError("density has zero (or negative) norm")
    return simpson(rho * r**3, x=r) / norm


def intrinsic_eqm(source, rho=None):
    """Intrinsic EQM Q0 = -e <r^2> in C m^2 (positive for the electron).

    source is either a LandauGeometry (closed form from its mean_r2) or a
    radial grid array, in which case rho must give the sampled density.
    """
    if isinstance(source, LandauGeometry):
        mean_r2 = source.mean_r2
    else:
        if rho is None:
            raise DomainError("sampled densities need both r and rho arrays")
        mean_r2 = mean_square_radius(source, rho)
    return -E_SIGNED * mean_r2


def spectroscopic_eqm(Q0, j, K):
    """Spectroscopic EQM  Qs = (3 K^2 - j(j+1)) / ((j+1)(2j+3)) * Q0.

    j may be integer or half-integer; K is the projection of the total
    angular momentum on the symmetry axis, |K| <= j.
    """
    if j < 0.5:
        raise DomainError(f"j must be >= 1/2, got {j}")
    if abs(K) > j:
        raise DomainError(f"|K| = {abs(K)} exceeds j = {j}")
    return (3.0 * K**2 - j * (j + 1.0)) / ((j + 1.0) * (2.0 * j + 3.0)) * Q0


def quadrupole_tensor_operator(ops, Qs, j=None):
    """Quadrupole tensor operator on the |j, m> space, as a 3x3 nest of matrices.

    Q_ij = 3 Qs / (2 j (2j-1)) * [ {j_i, j_j} - (2/3) delta_ij j(j+1) ].

    Each component is Hermitian and the ij-trace Q_xx + Q_yy + Q_zz vanishes.
    The stretched-state expectation <j,j|Q_zz|j,j> equals Qs.
    """
    if j is None:
        j = ops.L
    if j < 1:
        raise DomainError(f"quadrupole operator requires j >= 1, got {j}")
    comps = (ops.Lx, ops.Ly, ops.Lz)
    eye = np.eye(ops.dim)
    pref = 3.0 * Qs / (2.0 * j * (2.0 * j - 1.0))
    out = [[None] * 3 for _ in range(3)]
    for a in range(3):
        for b in range(a, 3):
            q = comps[a] @ comps[b] + comps[b] @ comps[a]
            if a == b:
                q = q - (2.0 / 3.0) * j * (j + 1.0) * eye
            out[a][b] = out[b][a] = pref * q
    return out


def ecqm(L_vec, s_vec, epsilon_ev):
    """Current quadrupole moment of an orbiting magnetic moment, in C m^2.

    Q_ij = -(1/(2 eps)) [3 L_i mu_j + 3 L_j mu_i - 2 delta_ij (L . mu)] with
    mu = e s / eps; L and s are dimensionless (units of hbar), eps is the
    total energy in eV.  The natural-unit inverse energies become lengths
    through hbar c.
    """
    if epsilon_ev <= 0:
        raise DomainError(f"total energy must be positive, got {epsilon_ev}")
    lv = np.asarray(L_vec, dtype=float)
    sv = np.asarray(s_vec, dtype=float)
    scale = -0.5 * E_SIGNED * (HBAR_C_EV_M / epsilon_ev) ** 2
    dot = float(lv @ sv)
    t = 3.0 * (np.outer(lv, sv) + np.outer(sv, lv)) - 2.0 * dot * np.eye(3)
    return EcqmTensor(components=scale * t)


def delta_omega_estimate(L, grad_E):
    """Order-of-magnitude spin-precession correction L |dE/dX| 1e-10 s^-1.

    grad_E is the maximum electric-field gradient in V/m^2.  The product is
    a literal scaling estimate, not a calibrated prediction.
    """
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    return L * abs(grad_E) * 1.0e-10


def beam_diameter(L):
    """Vortex-beam diameter model d = 10 nm * (L / 50), linear in the OAM."""
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    return 10.0e-9 * (L / 50.0)


def eqm_scale_check(L, R0):
    """Length scale <r^2>/R0 [m] with <r^2> = (d(L)/2)^2 from the diameter model.

    Order-of-magnitude only; compare against the reduced Compton wavelength.
    """
    if R0 <= 0:
        raise DomainError(f"R0 must be positive, got {R0}")
    radius = 0.5 * beam_diameter(L)
    return radius**2 / R0


def moment_set(L, B, n_r=0):
    """Assemble the MomentSet for OAM L in a vertical field B [T].

    w_m comes from the Landau geometry of the field (radial number n_r,
    l_z = L); Q0 and Qs use the measured-diameter beam model, with Qs
    evaluated in the stretched configuration j = K = L.
    """
    geo = landau_geometry(B, n_r, L)
    mean_r2_model = (0.5 * beam_diameter(L)) ** 2
    q0 = -E_SIGNED * mean_r2_model
    qs = spectroscopic_eqm(q0, L, L)
    return MomentSet(beta_T_fm3=tmp_electron(), Q0_Cm2=q0, Qs_Cm2=qs,
                     w_m=geo.w_m, mean_r2=mean_r2_model)
