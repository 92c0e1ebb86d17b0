"""Physical constants and unit helpers shared across the package.

Internal unit conventions:
  * spin-Hamiltonian coefficients are H/h in Hz,
  * lengths in µm for chain/MD geometry, SI metres for optics,
  * MD energies are E/h in Hz; the effective mass below makes
    0.5 * M_EFF_HZ * v**2 an energy in Hz when v is in µm/s.
"""

import scipy.constants as _sc

H_PLANCK = _sc.h            # J s
HBAR = _sc.hbar             # J s
KB = _sc.k                  # J/K
C_LIGHT = _sc.c             # m/s
E_CHARGE = _sc.e            # C
M_ELECTRON = _sc.m_e        # kg
EPS0 = _sc.epsilon_0        # F/m
A0 = _sc.physical_constants["Bohr radius"][0]           # m
RYDBERG_J = _sc.physical_constants["Rydberg constant times hc in J"][0]
FINE_STRUCTURE = _sc.fine_structure

AMU = _sc.physical_constants["atomic mass constant"][0]  # kg
M_RB87 = 86.909180527 * AMU                              # kg, 87Rb
M_HE = 4.002602 * AMU                                    # kg, residual He

# MD effective mass: kinetic energy in Hz for velocities in µm/s.
M_EFF_HZ = M_RB87 * 1e-12 / H_PLANCK                     # Hz s^2 / µm^2

# Circular-state microwave ladder around n=48..50.
NU0_HZ = 111.95e9           # Hz, two-photon |48C 48C> -> |50C 50C| resonance offset 2*55.97 GHz
LAMBDA_4847_M = 4.9e-3      # m, 48C -> 47C transition wavelength


def thermal_velocity(temperature_k, mass_kg):
    """Mean thermal speed sqrt(8 kT / pi m) in m/s."""
    import math
    return math.sqrt(8.0 * KB * temperature_k / (math.pi * mass_kg))
