"""Van der Waals pair coefficients -> spin-chain couplings.

The two circular states of the effective spin-1/2 interact through d^-6
van der Waals shifts.  Four pair coefficients (in GHz µm^6, at a given
static electric / magnetic field configuration) fix the spin couplings:

    dE    = (C6_dd + C6_uu + 2 A6) / (4 d^6)      mean pair shift
    dzeta = (C6_dd - C6_uu) / (2 d^6)             differential shift
    J_z   = (C6_dd - 2 C6_du + C6_uu) / (4 d^6)   Ising coupling
    J     = |A6| / (2 d^6)                        exchange coupling

with d the interatomic distance in µm and "u"/"d" the upper/lower spin
states.  Outputs are H/h contributions in Hz.  The spin-flip exchange
time is tau_ex = 1/(4 J).

Field-dependence enters only through the four coefficients; a tabulated
field curve (CSV) can be interpolated in the electric field at fixed
magnetic field.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

GHZ_UM6_TO_HZ_UM6 = 1e9

FIELD_CURVE_COLUMNS = ("F_Vcm", "B_gauss", "Jz_over_J", "dzeta_over_J")


@dataclass(frozen=True)
class CouplingSet:
    """Pair dispersion coefficients, GHz µm^6, at one (F, B) point.

    c6_dd : C6 of the lower pair state |dn dn>
    c6_du : C6 of the mixed pair state |dn up>
    c6_uu : C6 of the upper pair state |up up>
    a6    : exchange (off-diagonal) coefficient of the |dn up> pair
    """

    c6_dd: float
    c6_du: float
    c6_uu: float
    a6: float
    f_vcm: float | None = None   # static electric field, V/cm (metadata)
    b_gauss: float | None = None  # magnetic field, G (metadata)


# Pair coefficients for the 48C/50C pair at F = 9 V/cm, B = 13 G.
COUPLINGS_48_50 = CouplingSet(
    c6_dd=2.2,      # GHz µm^6, |48C 48C>
    c6_du=2.66,     # GHz µm^6, |48C 50C>
    c6_uu=3.03,     # GHz µm^6, |50C 50C>
    a6=-0.539,      # GHz µm^6, exchange
    f_vcm=9.0,
    b_gauss=13.0,
)


@dataclass(frozen=True)
class SpinCouplings:
    """Spin-model couplings, H/h in Hz, at distance d_um (µm)."""

    d_um: float
    j_hz: float          # exchange J
    jz_hz: float         # Ising J_z
    dzeta_hz: float      # differential pair shift dzeta
    de_hz: float         # mean pair energy shift

    @property
    def jz_over_j(self) -> float:
        return self.jz_hz / self.j_hz

    @property
    def dzeta_over_j(self) -> float:
        return self.dzeta_hz / self.j_hz


def spin_couplings(coeffs: CouplingSet, d_um: float) -> SpinCouplings:
    """Spin couplings at interatomic distance d_um in µm.

    Raises ValueError for non-positive distance.
    """
    if d_um <= 0:
        raise ValueError(f"interatomic distance must be positive, got {d_um}")
    inv_d6 = GHZ_UM6_TO_HZ_UM6 / d_um**6
    de = (coeffs.c6_dd + coeffs.c6_uu + 2.0 * coeffs.a6) * inv_d6 / 4.0
    dzeta = (coeffs.c6_dd - coeffs.c6_uu) * inv_d6 / 2.0
    jz = (coeffs.c6_dd - 2.0 * coeffs.c6_du + coeffs.c6_uu) * inv_d6 / 4.0
    j = abs(coeffs.a6) * inv_d6 / 2.0
    return SpinCouplings(d_um=d_um, j_hz=j, jz_hz=jz, dzeta_hz=dzeta, de_hz=de)


def exchange_time(j_hz: float) -> float:
    """Spin-exchange half-period tau_ex = 1/(4 J), seconds."""
    if j_hz <= 0:
        raise ValueError(f"J must be positive, got {j_hz}")
    return 1.0 / (4.0 * j_hz)


def pair_energy(coeffs: CouplingSet, state: str, d_um: float) -> float:
    """Raw pair interaction energy C6/d^6 in Hz for one pair state.

    state is one of 'dd', 'du', 'uu'.
    """
    c6 = {"dd": coeffs.c6_dd, "du": coeffs.c6_du, "uu": coeffs.c6_uu}[state]
    return c6 * GHZ_UM6_TO_HZ_UM6 / d_um**6


@dataclass
class FieldCurve:
    """Tabulated field dependence of the coupling ratios.

    Columns: F_Vcm, B_gauss, Jz_over_J, dzeta_over_J.  The table is a set
    of 1-D curves in F at fixed tabulated B values; interpolation is
    linear in F along the matching-B rows.  This path is deliberately
    independent of the CouplingSet formula path: tabulated ratios and
    coefficient combinations are separate entry points and are never
    reconciled against each other.
    """

    f_vcm: np.ndarray
    b_gauss: np.ndarray
    jz_over_j: np.ndarray
    dzeta_over_j: np.ndarray

    def __post_init__(self):
        self.f_vcm = np.asarray(self.f_vcm, dtype=float)
        self.b_gauss = np.asarray(self.b_gauss, dtype=float)
        self.jz_over_j = np.asarray(self.jz_over_j, dtype=float)
        self.dzeta_over_j = np.asarray(self.dzeta_over_j, dtype=float)
        n = self.f_vcm.size
        if not (self.b_gauss.size == self.jz_over_j.size == self.dzeta_over_j.size == n):
            raise ValueError("field curve columns must have equal length")

    @classmethod
    def from_csv(cls, path) -> "FieldCurve":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(h.strip() for h in header) != FIELD_CURVE_COLUMNS:
                raise ValueError(
                    f"field curve header must be {','.join(FIELD_CURVE_COLUMNS)}, got {header}"
                )
            rows = [[float(x) for x in row] for row in reader if row]
        data = np.array(rows, dtype=float).reshape(-1, 4)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(FIELD_CURVE_COLUMNS)
            for row in zip(self.f_vcm, self.b_gauss, self.jz_over_j, self.dzeta_over_j):
                writer.writerow([repr(float(x)) for x in row])


def couplings_at_fields(curve: FieldCurve, f_vcm: float, b_gauss: float,
                        j_hz: float) -> SpinCouplings:
    """Interpolate tabulated ratios at (F, B) and scale by the given J.

    Linear interpolation in F along the rows with B == b_gauss.  Requests
    outside the tabulated F range of that B, or for a B value not present
    in the table, raise ValueError (no extrapolation).  J passes through
    unchanged; Jz and dzeta are ratio * J.  dE is not tabulated and is
    reported as nan on this path.
    """
    sel = np.isclose(curve.b_gauss, b_gauss, rtol=0.0, atol=1e-9)
    if not np.any(sel):
        raise ValueError(f"magnetic field B={b_gauss} G not tabulated")
    f = curve.f_vcm[sel]
    order = np.argsort(f, kind="stable")
    f = f[order]
    jz_r = curve.jz_over_j[sel][order]
    dz_r = curve.dzeta_over_j[sel][order]
    if f_vcm < f[0] or f_vcm > f[-1]:
        raise ValueError(
            f"F={f_vcm} V/cm outside tabulated range [{f[0]}, {f[-1]}] at B={b_gauss} G"
        )
    jz = np.interp(f_vcm, f, jz_r) * j_hz
    dz = np.interp(f_vcm, f, dz_r) * j_hz
    return SpinCouplings(d_um=float("nan"), j_hz=j_hz, jz_hz=float(jz),
                         dzeta_hz=float(dz), de_hz=float("nan"))
