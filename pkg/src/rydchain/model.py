"""Symbolic spin-1/2 chain Hamiltonians as Pauli term lists.

The chain Hamiltonian (H/h, Hz) is

    H/h = (Dp/2)(sz_1 + sz_N) + (D/2) sum_bulk sz_j + (Om/2) sum_j sx_j
          + sum_bonds [ Jz sz_j sz_j+1 + J (sx_j sx_j+1 + sy_j sy_j+1) ]

with separate edge (Dp) and bulk (D) longitudinal detunings for an open
chain; a periodic chain has a single uniform detuning and N bonds.  The
two detunings come from the dressing of the two-photon pair resonance:

    D  = (nu0 + 2 dzeta) - 2 nu        bulk sites (two neighbours)
    Dp = (nu0 + dzeta) - 2 nu          edge sites (one neighbour)

The motional variant modulates every bond by I(t) = d^6 / (x_j+1 - x_j)^6
and moves the bond's share of the differential shift inside the modulated
term:

    H/h = sum_j [ (nu0 - 2 nu)/2 sz_j + (Om/2) sx_j ]
          + sum_bonds I_b(t) [ Jz sz sz + J (sx sx + sy sy)
                               + (dzeta/2)(sz_j + sz_j+1) ]

Builders emit plain term lists (OperatorSpec); realization as matrices or
MPOs happens in the engines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PAULI_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class Term:
    """coeff * product of Pauli operators; sites are 0-based."""

    sites: tuple[int, ...]
    axes: tuple[str, ...]
    coeff: float  # Hz

    def __post_init__(self):
        if len(self.sites) != len(self.axes):
            raise ValueError("sites and axes must have equal length")
        for a in self.axes:
            if a not in PAULI_AXES:
                raise ValueError(f"unknown Pauli axis {a!r}")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("repeated site in a single term")


@dataclass
class OperatorSpec:
    """Hermitian operator on n_sites spins as a list of Pauli terms.

    Real coefficients times Pauli strings are Hermitian by construction;
    engines validate coefficients are finite floats.
    """

    n_sites: int
    terms: list[Term] = field(default_factory=list)
    periodic: bool = False

    def add(self, coeff: float, sites: tuple[int, ...], axes: tuple[str, ...]):
        if coeff != coeff or coeff in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite coefficient {coeff}")
        for s in sites:
            if not (0 <= s < self.n_sites):
                raise ValueError(f"site {s} outside chain of {self.n_sites}")
        if coeff != 0.0:
            self.terms.append(Term(tuple(sites), tuple(axes), float(coeff)))
        return self

    def scaled(self, factor: float) -> "OperatorSpec":
        out = OperatorSpec(self.n_sites, periodic=self.periodic)
        for t in self.terms:
            out.add(t.coeff * factor, t.sites, t.axes)
        return out

    def __add__(self, other: "OperatorSpec") -> "OperatorSpec":
        if other.n_sites != self.n_sites:
            raise ValueError("operator size mismatch")
        out = OperatorSpec(self.n_sites, periodic=self.periodic or other.periodic)
        out.terms = list(self.terms) + list(other.terms)
        return out

    def max_range(self) -> int:
        r = 0
        for t in self.terms:
            if len(t.sites) > 1:
                r = max(r, max(t.sites) - min(t.sites))
        return r


@dataclass(frozen=True)
class ChainSpec:
    """Static chain parameters, H/h in Hz."""

    n_sites: int
    j_hz: float                 # exchange J
    jz_hz: float                # Ising J_z
    omega_hz: float = 0.0       # transverse drive Omega
    delta_hz: float = 0.0       # bulk detuning D
    delta_edge_hz: float = 0.0  # edge detuning Dp (open chains only)
    periodic: bool = False
    nnn: bool = False           # opt-in J/64, Jz/64 bond at range 2

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("need at least 2 sites")
        if self.periodic and self.delta_edge_hz != self.delta_hz and self.delta_edge_hz != 0.0:
            raise ValueError("periodic chain has no distinct edge detuning")


@dataclass(frozen=True)
class MotionalChainSpec:
    """Chain with per-bond modulation I_b(t); open boundary only.

    nu_offset_hz is (nu0 - 2 nu), the uniform longitudinal detuning left
    outside the modulated bond terms.  dzeta rides inside the bond terms.
    """

    n_sites: int
    j_hz: float
    jz_hz: float
    dzeta_hz: float
    omega_hz: float = 0.0
    nu_offset_hz: float = 0.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("need at least 2 sites")


def _add_bond(op: OperatorSpec, j: int, k: int, j_hz: float, jz_hz: float):
    op.add(jz_hz, (j, k), ("z", "z"))
    op.add(j_hz, (j, k), ("x", "x"))
    op.add(j_hz, (j, k), ("y", "y"))


def build_chain(spec: ChainSpec) -> OperatorSpec:
    """Term list for the static chain Hamiltonian."""
    n = spec.n_sites
    op = OperatorSpec(n, periodic=spec.periodic)
    for j in range(n):
        edge = (j == 0 or j == n - 1) and not spec.periodic
        delta = spec.delta_edge_hz if edge else spec.delta_hz
        op.add(delta / 2.0, (j,), ("z",))
        op.add(spec.omega_hz / 2.0, (j,), ("x",))
    bonds = [(j, j + 1) for j in range(n - 1)]
    if spec.periodic:
        bonds.append((n - 1, 0))
    for j, k in bonds:
        _add_bond(op, j, k, spec.j_hz, spec.jz_hz)
    if spec.nnn:
        pairs = [(j, j + 2) for j in range(n - 2)]
        if spec.periodic:
            pairs += [(n - 2, 0), (n - 1, 1)]
        for j, k in pairs:
            _add_bond(op, j, k, spec.j_hz / 64.0, spec.jz_hz / 64.0)
    return op


def build_motional_chain(spec: MotionalChainSpec, modulation) -> OperatorSpec:
    """Term list with bond factors I_b from `modulation` (length N-1).

    modulation[b] multiplies the full bond term of bond b, including the
    bond's share (dzeta/2)(sz_j + sz_j+1) of the differential shift.
    """
    n = spec.n_sites
    mod = list(modulation)
    if len(mod) != n - 1:
        raise ValueError(f"need {n - 1} bond factors, got {len(mod)}")
    op = OperatorSpec(n)
    for j in range(n):
        op.add(spec.nu_offset_hz / 2.0, (j,), ("z",))
        op.add(spec.omega_hz / 2.0, (j,), ("x",))
    for b, i_b in enumerate(mod):
        j, k = b, b + 1
        op.add(i_b * spec.jz_hz, (j, k), ("z", "z"))
        op.add(i_b * spec.j_hz, (j, k), ("x", "x"))
        op.add(i_b * spec.j_hz, (j, k), ("y", "y"))
        op.add(i_b * spec.dzeta_hz / 2.0, (j,), ("z",))
        op.add(i_b * spec.dzeta_hz / 2.0, (k,), ("z",))
    return op


def motional_bond_term(spec: MotionalChainSpec, bond: int) -> OperatorSpec:
    """Unit-modulation term list of a single bond (for I=1).

    The time-dependent Hamiltonian is
        static part + Omega(t) * drive part + sum_b I_b(t) * bond part_b,
    which engines assemble without rebuilding term lists per step.
    """
    n = spec.n_sites
    if not (0 <= bond < n - 1):
        raise ValueError(f"bond {bond} outside chain of {n} sites")
    j, k = bond, bond + 1
    op = OperatorSpec(n)
    op.add(spec.jz_hz, (j, k), ("z", "z"))
    op.add(spec.j_hz, (j, k), ("x", "x"))
    op.add(spec.j_hz, (j, k), ("y", "y"))
    op.add(spec.dzeta_hz / 2.0, (j,), ("z",))
    op.add(spec.dzeta_hz / 2.0, (k,), ("z",))
    return op


def motional_static_term(spec: MotionalChainSpec) -> OperatorSpec:
    """Uniform longitudinal part sum_j (nu_offset/2) sz_j."""
    op = OperatorSpec(spec.n_sites)
    for j in range(spec.n_sites):
        op.add(spec.nu_offset_hz / 2.0, (j,), ("z",))
    return op


def drive_term(n_sites: int) -> OperatorSpec:
    """Unit-amplitude drive sum_j sx_j / 2 (multiply by Omega(t))."""
    op = OperatorSpec(n_sites)
    for j in range(n_sites):
        op.add(0.5, (j,), ("x",))
    return op


def resonance_detuning(nu0_hz: float, dzeta_hz: float, mean_modulation: float = 1.0):
    """Microwave frequency cancelling the bulk detuning, and the edge residual.

    With nu = (nu0 + 2 dzeta Ibar)/2 the bulk longitudinal detuning
    vanishes and the edge sites keep a residual -dzeta * Ibar (their
    dressing shift involves one neighbour instead of two).

    Returns (nu_hz, edge_residual_hz).
    """
    nu = (nu0_hz + 2.0 * dzeta_hz * mean_modulation) / 2.0
    edge_residual = -dzeta_hz * mean_modulation
    return nu, edge_residual


def detunings_from_drive(nu0_hz: float, nu_hz: float, dzeta_hz: float,
                         mean_modulation: float = 1.0):
    """(bulk D, edge Dp) detunings for a given microwave frequency nu."""
    base = nu0_hz - 2.0 * nu_hz
    return (base + 2.0 * dzeta_hz * mean_modulation,
            base + dzeta_hz * mean_modulation)
