"""Spin couplings from van der Waals pair coefficients.

Two circular Rydberg atoms interact through second-order dipole-dipole
(van der Waals) shifts.  Mapping the four pair channels onto a spin-1/2
pair gives the XXZ couplings J, J_z and the differential shift dzeta,
all scaling as 1/d^6.  This script prints the coupling table over a
range of distances and the corresponding spin-exchange times.
"""

import argparse

import numpy as np

from rydchain import COUPLINGS_48_50, exchange_time, pair_energy, spin_couplings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--distances", type=float, nargs="+",
                        default=[4.0, 5.0, 6.0, 7.0, 9.0, 12.0],
                        help="interatomic distances in um")
    args = parser.parse_args()

    c = COUPLINGS_48_50
    print(f"pair coefficients (GHz um^6): C6_dd={c.c6_dd}, C6_du={c.c6_du}, "
          f"C6_uu={c.c6_uu}, A6={c.a6}")
    print()
    header = f"{'d (um)':>8} {'J (Hz)':>12} {'Jz (Hz)':>12} {'dzeta (Hz)':>12} " \
             f"{'tau_ex':>10} {'Jz/J':>8}"
    print(header)
    for d in args.distances:
        sc = spin_couplings(c, d)
        tau = exchange_time(sc.j_hz)
        tau_str = f"{tau*1e6:.1f} us" if tau < 1e-3 else f"{tau*1e3:.2f} ms"
        print(f"{d:8.1f} {sc.j_hz:12.1f} {sc.jz_hz:12.1f} {sc.dzeta_hz:12.1f} "
              f"{tau_str:>10} {sc.jz_over_j:8.4f}")

    print()
    print("raw pair energies at 5 um (Hz):")
    for state in ("dd", "du", "uu"):
        print(f"  |{state}> : {pair_energy(c, state, 5.0):12.1f}")

    # 1/d^6 scaling check: doubling d should divide J by 64
    j5 = spin_couplings(c, 5.0).j_hz
    j10 = spin_couplings(c, 10.0).j_hz
    print(f"\nscaling: J(5)/J(10) = {j5/j10:.1f} (expect 64 for 1/d^6)")


if __name__ == "__main__":
    main()
