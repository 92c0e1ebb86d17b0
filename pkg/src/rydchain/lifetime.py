"""Loss-channel budget for trapped circular-state atoms.

Collects the analytic loss estimates: spontaneous-emission modification
factors inside a plane-parallel capacitor, blackbody occupation,
hydrogenic photoionization cross-sections, background-gas collision
rates, and the harmonic combination of all channels into a single
predicted lifetime.
"""

import math
from dataclasses import dataclass, field

from scipy.special import kve

from .constants import (
    A0,
    C_LIGHT,
    FINE_STRUCTURE,
    H_PLANCK,
    KB,
    M_HE,
    RYDBERG_J,
    thermal_velocity,
)

LOG10_E = math.log10(math.e)


def inhibition_factors(d_mm, lambda_mm):
    """Spontaneous-emission modification factors (C_sigma, C_pi).

    For an atom midway between ideal parallel plates separated by D, the
    free-space rate of a transition at wavelength lambda is multiplied by

      C_sigma = sum_{n=1}^{[2D/lambda]} (3 lambda/4D) [1 + (n lambda/2D)^2] sin^2(n pi/2)
      C_pi    = 3 lambda/4D
              + sum_{n=1}^{[2D/lambda]} (3 lambda/2D) [1 - (n lambda/2D)^2] cos^2(n pi/2)

    for polarization parallel (sigma) or perpendicular (pi) to the
    plates.  The sin^2/cos^2 midpoint mode amplitudes keep only odd
    (sigma) or even (pi) mode indices; both factors then tend to 1 at
    large D.  Below cutoff (D < lambda/2) every sigma term vanishes:
    C_sigma = 0 and C_pi reduces to its n=0 term 3 lambda/4D.
    """
    if d_mm <= 0.0 or lambda_mm <= 0.0:
        raise ValueError("capacitor spacing and wavelength must be positive")
    n_max = int(2.0 * d_mm / lambda_mm)
    ratio = lambda_mm / (2.0 * d_mm)
    c_sigma = 0.0
    c_pi = 1.5 * ratio
    for n in range(1, n_max + 1):
        u2 = (n * ratio) ** 2
        if n % 2 == 1:
            c_sigma += 1.5 * ratio * (1.0 + u2)
        else:
            c_pi += 3.0 * ratio * (1.0 - u2)
    return c_sigma, c_pi


def wavelength_to_atomic_frequency(wavelength_um):
    """Photon angular frequency in atomic units (hbar omega / 2 Ry)."""
    if wavelength_um <= 0.0:
        raise ValueError("wavelength must be positive")
    photon_j = H_PLANCK * C_LIGHT / (wavelength_um * 1e-6)
    return photon_j / (2.0 * RYDBERG_J)


def photoionization_bessel_argument(l, omega_au):
    """Argument omega l^3 / 3 of the modified Bessel functions."""
    return omega_au * l**3 / 3.0


def _check_photoionization_inputs(n, l, omega_au):
    if l < 1:
        raise ValueError("the hydrogenic cross-section formula requires l >= 1")
    if n <= l:
        raise ValueError("need principal quantum number n > l")
    if omega_au <= 0.0:
        raise ValueError("photon frequency must be positive")


def photoionization_log10_sigma(n, l, omega_au):
    """log10 of the photoionization cross-section in m^2.

    Returns (log10_bessel, log10_asymptotic).  The Bessel form is

      sigma = (4 l^4 / (9 c n^3 omega)) [K_{2/3}^2(x) + K_{1/3}^2(x)],
      x = omega l^3 / 3   (atomic units, c = 1/alpha)

    and its large-argument limit, using K_nu(x) ~ sqrt(pi/2x) e^-x, is

      sigma = a0^2 (4 pi / 3) alpha l / (n^3 omega'^2) exp(-2 omega' l^3/3)

    with omega' = omega in atomic units.  (Quoted versions of the
    asymptotic form carry a single power of omega'; the omega'^2 here is
    what the Bessel asymptotics give, and the two forms then agree to a
    few percent at large argument.)  Working in log10 keeps circular
    states representable: at n=50, l=49 and a 1 µm photon the argument
    is ~1.8e3 and sigma ~ 1e-1554 m^2.
    """
    _check_photoionization_inputs(n, l, omega_au)
    x = photoionization_bessel_argument(l, omega_au)
    pref_au = 4.0 * l**4 * FINE_STRUCTURE / (9.0 * n**3 * omega_au)
    scaled = kve(2.0 / 3.0, x) ** 2 + kve(1.0 / 3.0, x) ** 2
    log_bessel = math.log10(pref_au * scaled * A0**2) - 2.0 * x * LOG10_E
    asym_pref = A0**2 * (4.0 * math.pi / 3.0) * FINE_STRUCTURE * l / (n**3 * omega_au**2)
    log_asym = math.log10(asym_pref) - 2.0 * x * LOG10_E
    return log_bessel, log_asym


def photoionization_cross_section(n, l, omega_au):
    """Photoionization cross-section in m^2 as (bessel_form, asymptotic_form).

    Thin wrapper over the log-space evaluation; values below the float
    range underflow to 0.0 (the circular-state case).
    """
    log_bessel, log_asym = photoionization_log10_sigma(n, l, omega_au)

    def lift(logv):
        return 10.0**logv if logv > -300.0 else 0.0

    return lift(log_bessel), lift(log_asym)


def collision_lifetime(sigma_a0sq, density_m3, t_gas_k, gas_mass_kg=M_HE):
    """Lifetime 1/(n sigma vbar) against state-changing collisions.

    sigma is given in units of a0^2; vbar is the mean thermal speed
    sqrt(8 k T / pi m) of the background gas.
    """
    if sigma_a0sq <= 0.0 or density_m3 < 0.0 or t_gas_k <= 0.0:
        raise ValueError("need positive cross-section and temperature, density >= 0")
    if density_m3 == 0.0:
        return math.inf
    sigma_m2 = sigma_a0sq * A0**2
    vbar = thermal_velocity(t_gas_k, gas_mass_kg)
    return 1.0 / (density_m3 * sigma_m2 * vbar)


def blackbody_occupation(nu_hz, t_k):
    """Thermal photon number 1/(exp(h nu / k T) - 1) at frequency nu."""
    if nu_hz <= 0.0 or t_k <= 0.0:
        raise ValueError("frequency and temperature must be positive")
    return 1.0 / math.expm1(H_PLANCK * nu_hz / (KB * t_k))


@dataclass(frozen=True)
class LossChannel:
    """One loss channel, stored as a lifetime in seconds (may be inf).

    origin marks whether the number comes out of this package
    ("computed") or is an external fixed input, in which case `note`
    must say where it comes from.
    """

    name: str
    lifetime_s: float
    origin: str = "computed"
    note: str = ""

    def __post_init__(self):
        if self.lifetime_s <= 0.0:
            raise ValueError("channel lifetime must be positive (use inf for none)")
        if self.origin not in ("computed", "fixed-input"):
            raise ValueError("origin must be 'computed' or 'fixed-input'")
        if self.origin == "fixed-input" and not self.note:
            raise ValueError("fixed-input channels must carry a provenance note")

    @property
    def rate(self):
        return 0.0 if math.isinf(self.lifetime_s) else 1.0 / self.lifetime_s


@dataclass(frozen=True)
class LifetimeBudget:
    channels: tuple
    n_atoms: int
    combined_lifetime_s: float
    chain_lifetime_s: float


def combine(channels, n_atoms=1):
    """Harmonically combine channels; chain lifetime is combined/N."""
    channels = tuple(channels)
    if not channels:
        raise ValueError("need at least one loss channel")
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    total_rate = sum(ch.rate for ch in channels)
    combined = math.inf if total_rate == 0.0 else 1.0 / total_rate
    return LifetimeBudget(
        channels=channels,
        n_atoms=n_atoms,
        combined_lifetime_s=combined,
        chain_lifetime_s=combined / n_atoms,
    )


def reference_channels():
    """The loss budget of a trapped 48C atom at d=5 µm and 0.4 K.

    Rows whose rates need Stark-manifold dipole matrix elements beyond
    this package enter as fixed inputs; the rest are backed by the
    calculations in this module.
    """
    return [
        LossChannel(
            "residual spontaneous emission",
            2500.0,
            origin="fixed-input",
            note="50 dB inhibition point of a finite-element capacitor simulation",
        ),
        LossChannel(
            "blackbody induced processes",
            630.0,
            origin="fixed-input",
            note="Stark-manifold transfer rates at 0.4 K",
        ),
        LossChannel(
            "level mixing",
            88.0,
            origin="fixed-input",
            note="dipole-dipole contamination by elliptical pair states",
        ),
        LossChannel(
            "dipolar relaxation",
            math.inf,
            origin="fixed-input",
            note="energetically suppressed at the operating fields",
        ),
        LossChannel(
            "photoionization",
            math.inf,
            note="cross-section below 1e-100 m^2 for circular states",
        ),
        LossChannel(
            "background-gas collisions",
            400.0,
            origin="fixed-input",
            note="sigma_c = 5e4 a0^2 at 2e11 m^-3 He; see collision_lifetime",
        ),
        LossChannel(
            "trap-laser elastic diffusion",
            180.0,
            origin="fixed-input",
            note="worst-case Compton diffusion rate in the trap light",
        ),
    ]


BUDGET_COLUMNS = ("channel", "lifetime_s")


def budget_table(budget):
    """Two-column text table `channel,lifetime_s` plus summary rows."""
    lines = [",".join(BUDGET_COLUMNS)]
    for ch in budget.channels:
        lines.append(f"{ch.name},{ch.lifetime_s!r}")
    lines.append(f"combined,{budget.combined_lifetime_s!r}")
    lines.append(f"chain_of_{budget.n_atoms},{budget.chain_lifetime_s!r}")
    return "\n".join(lines) + "\n"
