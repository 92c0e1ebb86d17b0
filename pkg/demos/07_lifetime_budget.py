"""Lifetime budget of a trapped circular-state register.

Inside a plane-parallel capacitor with spacing below half the emission
wavelength, the sigma decay channel of a circular state is fully
inhibited and the pi channel only mildly enhanced; the remaining losses
(blackbody transfer, level mixing, collisions, photoionization, trap
light scattering) combine harmonically.  This script prints the budget
and how it scales down for a full chain.
"""

import argparse

from rydchain import combine, reference_channels
from rydchain.lifetime import (
    budget_table,
    inhibition_factors,
    photoionization_log10_sigma,
    wavelength_to_atomic_frequency,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-atoms", type=int, default=40)
    parser.add_argument("--d-mm", type=float, default=2.0,
                        help="capacitor plate spacing")
    parser.add_argument("--lambda-mm", type=float, default=4.9,
                        help="emission wavelength of the circular transition")
    args = parser.parse_args()

    c_sigma, c_pi = inhibition_factors(args.d_mm, args.lambda_mm)
    print(f"capacitor D={args.d_mm} mm, lambda={args.lambda_mm} mm:")
    print(f"  C_pi = {c_pi:.6f} (= 3*lambda/(4*D) below cutoff)")
    print(f"  C_sigma = {c_sigma} (sigma emission fully inhibited)")

    omega = wavelength_to_atomic_frequency(1.0)
    log_sigma, _ = photoionization_log10_sigma(50, 49, omega)
    print(f"\nphotoionization of the circular n=50 state at 1 um: "
          f"sigma = 10^{log_sigma:.0f} m^2 (utterly negligible)")

    budget = combine(reference_channels(), n_atoms=args.n_atoms)
    print("\n" + budget_table(budget))


if __name__ == "__main__":
    main()
