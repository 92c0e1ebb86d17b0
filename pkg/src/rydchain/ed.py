"""Exact diagonalization and state-vector evolution for Pauli term lists.

Matrices are realized directly from the term list: a Pauli string has one
nonzero per column, at row = column XOR flip-mask, with a phase fixed by
the column bits.  Hamiltonians containing sy only in pairs (sy sy bonds)
stay real.

Time evolution applies exp(-i 2 pi (H/h) dt) as a truncated Taylor series
per staircase step (coefficients are H/h in Hz, hence the 2 pi).  The
series is cut when the next term drops below machine precision of the
state norm, which keeps the step unitary to ~1e-15.

Site 0 is the most significant bit of the basis index; bit value 0 is
spin up (sz = +1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import OperatorSpec

DENSE_DIM_LIMIT = 4096          # dense eigh path allowed up to 2^12
TAYLOR_TOL = 1e-16              # relative cutoff for the propagator series
TAYLOR_MAX_ORDER = 40
DEGENERACY_RTOL = 1e-10


def _pauli_action(n_sites: int, sites, axes):
    """Flip mask and per-column phase vector of a Pauli string.

    P |c> = phase[c] |c ^ mask>, phases collected over the string's sites.
    """
    dim = 1 << n_sites
    cols = np.arange(dim)
    phase = np.ones(dim, dtype=complex)
    mask = 0
    for s, a in zip(sites, axes):
        bit = (cols >> (n_sites - 1 - s)) & 1
        if a == "z":
            phase = phase * (1 - 2 * bit)
        elif a == "x":
            mask |= 1 << (n_sites - 1 - s)
        elif a == "y":
            # sy|0> = i|1>, sy|1> = -i|0>
            phase = phase * np.where(bit == 0, 1j, -1j)
            mask |= 1 << (n_sites - 1 - s)
        else:
            raise ValueError(f"unknown axis {a!r}")
    return mask, phase


def _validate(op: OperatorSpec):
    for t in op.terms:
        c = t.coeff
        if not np.isfinite(c):
            raise ValueError(f"non-finite coefficient in term {t}")
        if isinstance(c, complex):
            raise ValueError(f"complex coefficient makes the spec non-Hermitian: {t}")


def build_sparse(op: OperatorSpec) -> sp.csr_matrix:
    """CSR matrix of the operator, dtype float64 when no net sy phase survives."""
    _validate(op)
    n = op.n_sites
    dim = 1 << n
    if not op.terms:
        return sp.csr_matrix((dim, dim), dtype=float)
    cols_all, rows_all, vals_all = [], [], []
    cols = np.arange(dim)
    for t in op.terms:
        mask, phase = _pauli_action(n, t.sites, t.axes)
        cols_all.append(cols)
        rows_all.append(cols ^ mask)
        vals_all.append(t.coeff * phase)
    h = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim),
    ).tocsr()
    h.sum_duplicates()
    if np.allclose(h.data.imag, 0.0, atol=0.0):
        h = sp.csr_matrix((h.data.real.copy(), h.indices, h.indptr), shape=h.shape)
    h.sort_indices()
    return h


def build_dense(op: OperatorSpec) -> np.ndarray:
    dim = 1 << op.n_sites
    if dim > DENSE_DIM_LIMIT:
        raise ValueError(f"dense realization limited to dim {DENSE_DIM_LIMIT}, got {dim}")
    return build_sparse(op).toarray()


def pauli_expectation(psi: np.ndarray, n_sites: int, sites, axes) -> float:
    """<psi| P |psi> for a Pauli string P (real up to roundoff)."""
    mask, phase = _pauli_action(n_sites, sites, axes)
    cols = np.arange(psi.size)
    val = np.vdot(psi[cols ^ mask], phase * psi)
    return float(val.real)


@dataclass
class GroundResult:
    """Lowest eigenpairs.  states[:, i] belongs to energies[i]."""

    energies: np.ndarray
    states: np.ndarray
    method: str

    @property
    def energy(self) -> float:
        return float(self.energies[0])

    @property
    def state(self) -> np.ndarray:
        return self.states[:, 0]

    def degenerate_subspace(self, rtol: float = DEGENERACY_RTOL) -> np.ndarray:
        """Columns spanning the (near-)degenerate ground manifold."""
        scale = max(abs(self.energies[0]), abs(self.energies[-1]), 1.0)
        keep = np.abs(self.energies - self.energies[0]) <= rtol * scale
        return self.states[:, keep]


def _deterministic_v0(dim: int) -> np.ndarray:
    # fixed pseudo-random start vector: reproducible ARPACK iterations
    rng = np.random.default_rng(12345)
    v0 = rng.standard_normal(dim)
    return v0 / np.linalg.norm(v0)


def ground_state(op: OperatorSpec, k: int = 1, method: str = "auto") -> GroundResult:
    """Lowest-k eigenpairs of the term list.

    method 'dense' (eigh, dim <= 4096), 'sparse' (Lanczos), or 'auto'
    (dense up to 2^10, sparse beyond).  The sparse path uses a fixed
    deterministic start vector.
    """
    h = build_sparse(op)
    dim = h.shape[0]
    if method == "auto":
        method = "dense" if dim <= 1024 else "sparse"
    if method == "dense":
        if dim > DENSE_DIM_LIMIT:
            raise ValueError(f"dense method limited to dim {DENSE_DIM_LIMIT}, got {dim}")
        w, v = np.linalg.eigh(h.toarray())
        return GroundResult(w[:k].copy(), v[:, :k].copy(), "dense")
    if method == "sparse":
        kk = min(max(k + 1, 2), dim - 1)  # one extra pair to expose degeneracy
        w, v = spla.eigsh(h, k=kk, which="SA", v0=_deterministic_v0(dim), tol=0)
        order = np.argsort(w, kind="stable")
        w, v = w[order], v[:, order]
        return GroundResult(w[:k].copy(), v[:, :k].copy(), "sparse")
    raise ValueError(f"unknown method {method!r}")


def gaps(op: OperatorSpec, k: int = 3, method: str = "auto") -> np.ndarray:
    """Energy gaps E_i - E_0 for i = 1..k-1."""
    res = ground_state(op, k=k, method=method)
    return res.energies[1:] - res.energies[0]


def product_state(n_sites: int, pattern="up") -> np.ndarray:
    """Product state vector.  pattern: 'up', 'down', 'neel', or a list of
    'up'/'down'/(amp_up, amp_down) per site."""
    if pattern == "up":
        pattern = ["up"] * n_sites
    elif pattern == "down":
        pattern = ["down"] * n_sites
    elif pattern == "neel":
        pattern = ["up" if j % 2 == 0 else "down" for j in range(n_sites)]
    psi = np.array([1.0 + 0.0j])
    for p in pattern:
        if p == "up":
            local = np.array([1.0, 0.0], dtype=complex)
        elif p == "down":
            local = np.array([0.0, 1.0], dtype=complex)
        else:
            local = np.asarray(p, dtype=complex)
            local = local / np.linalg.norm(local)
        psi = np.kron(psi, local)
    return psi


class TimeDependentHamiltonian:
    """H(t) = static + sum_i c_i(t) * part_i over a shared sparsity pattern.

    All component matrices are aligned to one union CSR structure at
    construction, so a step assembly is a handful of vector AXPYs and a
    single in-place data write.  matrix_at returns a view into a shared
    buffer; copy it if it must outlive the next call.
    """

    def __init__(self, static: OperatorSpec | None,
                 parts: list[tuple[OperatorSpec, object]] = ()):
        specs = []
        if static is not None and static.terms:
            specs.append(static)
        part_specs = [p[0] for p in parts]
        self.coeff_fns = [p[1] for p in parts]
        if not specs and not part_specs:
            raise ValueError("empty Hamiltonian")
        self.n_sites = (specs + part_specs)[0].n_sites
        for s in specs + part_specs:
            if s.n_sites != self.n_sites:
                raise ValueError("operator size mismatch")
        mats = [build_sparse(s) for s in specs + part_specs]
        pattern = None
        for m in mats:
            a = sp.csr_matrix((np.ones_like(m.data, dtype=float), m.indices, m.indptr),
                              shape=m.shape)
            pattern = a if pattern is None else pattern + a
        pattern = pattern.tocsr()
        pattern.sort_indices()
        self._h = sp.csr_matrix(
            (np.zeros(pattern.nnz, dtype=self._dtype(mats)), pattern.indices, pattern.indptr),
            shape=pattern.shape)
        aligned = [self._align(pattern, m) for m in mats]
        if static is not None and static.terms:
            self._static_data = aligned[0]
            self._part_data = aligned[1:]
        else:
            self._static_data = np.zeros(pattern.nnz, dtype=self._h.dtype)
            self._part_data = aligned

    @staticmethod
    def _dtype(mats):
        return complex if any(np.iscomplexobj(m.data) for m in mats) else float

    def _align(self, pattern: sp.csr_matrix, m: sp.csr_matrix) -> np.ndarray:
        m = m.tocsr()
        m.sort_indices()
        data = np.zeros(pattern.nnz, dtype=self._h.dtype)
        for r in range(pattern.shape[0]):
            u0, u1 = pattern.indptr[r], pattern.indptr[r + 1]
            c0, c1 = m.indptr[r], m.indptr[r + 1]
            if c1 > c0:
                pos = u0 + np.searchsorted(pattern.indices[u0:u1], m.indices[c0:c1])
                data[pos] = m.data[c0:c1]
        return data

    def matrix_at(self, t: float) -> sp.csr_matrix:
        data = self._static_data.copy()
        for fn, pd in zip(self.coeff_fns, self._part_data):
            c = float(fn(t))
            if c != 0.0:
                data += c * pd
        self._h.data = data
        return self._h

    def norm_estimate(self, t: float) -> float:
        m = self.matrix_at(t)
        return float(np.max(np.abs(m).sum(axis=1)))


def _taylor_step(h: sp.csr_matrix, psi: np.ndarray, dt: float) -> np.ndarray:
    """psi -> exp(-i 2 pi h dt) psi by scaled Taylor series."""
    out = psi.copy()
    term = psi
    z = -2j * np.pi * dt
    nrm = np.linalg.norm(psi)
    for k in range(1, TAYLOR_MAX_ORDER + 1):
        term = (z / k) * (h @ term)
        out += term
        tn = np.linalg.norm(term)
        if tn <= TAYLOR_TOL * nrm:
            return out
    raise RuntimeError(
        "propagator Taylor series did not converge in "
        f"{TAYLOR_MAX_ORDER} orders; reduce the step dt={dt}")


def evolve(psi0: np.ndarray, ham, t0: float, t1: float, dt: float,
           observer=None, observe_every: int = 1) -> np.ndarray:
    """Staircase evolution from t0 to t1 with step dt (seconds).

    ham: OperatorSpec (static), TimeDependentHamiltonian, or a callable
    t -> OperatorSpec (slow path, rebuilt per step).  Each step uses the
    Hamiltonian sampled at the step midpoint.  observer(t, psi), if
    given, is called after every observe_every-th step and at t1.
    """
    if t1 < t0:
        raise ValueError("t1 < t0")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = max(1, int(np.ceil((t1 - t0) / dt - 1e-12)))
    step = (t1 - t0) / n_steps
    psi = np.asarray(psi0, dtype=complex).copy()
    static_h = None
    if isinstance(ham, OperatorSpec):
        static_h = build_sparse(ham)
    for i in range(n_steps):
        tm = t0 + (i + 0.5) * step
        if static_h is not None:
            h = static_h
        elif isinstance(ham, TimeDependentHamiltonian):
            h = ham.matrix_at(tm)
        else:
            h = build_sparse(ham(tm))
        psi = _taylor_step(h, psi, step)
        if observer is not None and ((i + 1) % observe_every == 0 or i == n_steps - 1):
            observer(t0 + (i + 1) * step, psi)
    return psi


@dataclass
class ObservableReport:
    """Per-state observable bundle.

    Magnetizations are site averages of <s_alpha>; order parameters
    O_alpha = sign(C) sqrt(|C|) from the midchain correlator
    C = <s^a_j s^a_{j+r}> with j = ceil(N/2) (1-based) and r the largest
    odd offset keeping j+r <= N unless overridden.  Entropy is the von
    Neumann entropy of the left half in nats.  staggered_z is
    (1/N) sum_j (-1)^j <sz_j> with 0-based parity.
    """

    mx: float
    my: float
    mz: float
    staggered_z: float
    ox: float
    oy: float
    oz: float
    corr_offset: int
    svn_half: float
    energy_hz: float | None = None
    fidelity: float | None = None
    site_sz: np.ndarray | None = field(default=None, repr=False)
    site_sx: np.ndarray | None = field(default=None, repr=False)


def default_corr_pair(n_sites: int, r: int | None = None):
    """(j, j+r) 0-based midchain correlator sites per the default rule."""
    j1 = (n_sites + 1) // 2        # ceil(N/2), 1-based
    if r is None:
        r = n_sites - j1           # largest offset with j1 + r <= N
        if r % 2 == 0:
            r -= 1
    if r < 1 or j1 + r > n_sites:
        raise ValueError(f"correlator offset r={r} out of range for N={n_sites}")
    return j1 - 1, r


def half_chain_entropy(psi: np.ndarray, n_sites: int) -> float:
    """Von Neumann entropy of the left floor(N/2) sites, nats."""
    nl = n_sites // 2
    m = psi.reshape(1 << nl, -1)
    s = np.linalg.svd(m, compute_uv=False)
    p = s**2
    p = p[p > 1e-16]
    return float(-np.sum(p * np.log(p)))


def fidelity(psi: np.ndarray, ref) -> float:
    """|<ref|psi>|^2; a (dim, k) ref is treated as a degenerate subspace
    and the squared projection onto its span is returned."""
    ref = np.asarray(ref)
    if ref.ndim == 1:
        return float(abs(np.vdot(ref, psi)) ** 2)
    amps = ref.conj().T @ psi
    return float(np.sum(np.abs(amps) ** 2))


def measure(psi: np.ndarray, n_sites: int, op: OperatorSpec | None = None,
            ref_ground=None, r: int | None = None,
            keep_sites: bool = False) -> ObservableReport:
    """Observable bundle of a normalized state vector."""
    dim = 1 << n_sites
    if psi.shape != (dim,):
        raise ValueError(f"state has {psi.shape}, expected ({dim},)")
    sx = np.empty(n_sites)
    sy = np.empty(n_sites)
    sz = np.empty(n_sites)
    for j in range(n_sites):
        sx[j] = pauli_expectation(psi, n_sites, (j,), ("x",))
        sy[j] = pauli_expectation(psi, n_sites, (j,), ("y",))
        sz[j] = pauli_expectation(psi, n_sites, (j,), ("z",))
    signs = np.where(np.arange(n_sites) % 2 == 0, 1.0, -1.0)
    j0, rr = default_corr_pair(n_sites, r)
    odef = {}
    for a in ("x", "y", "z"):
        c = pauli_expectation(psi, n_sites, (j0, j0 + rr), (a, a))
        odef[a] = float(np.sign(c) * np.sqrt(abs(c)))
    energy = None
    if op is not None:
        h = build_sparse(op)
        energy = float(np.vdot(psi, h @ psi).real)
    fid = None
    if ref_ground is not None:
        ref = ref_ground.states if isinstance(ref_ground, GroundResult) else ref_ground
        fid = fidelity(psi, ref)
    return ObservableReport(
        mx=float(sx.mean()), my=float(sy.mean()), mz=float(sz.mean()),
        staggered_z=float((signs * sz).mean()),
        ox=odef["x"], oy=odef["y"], oz=odef["z"], corr_offset=rr,
        svn_half=half_chain_entropy(psi, n_sites),
        energy_hz=energy, fidelity=fid,
        site_sz=sz if keep_sites else None,
        site_sx=sx if keep_sites else None,
    )
