"""Exact diagonalization engine: builders, eigensolvers, evolution, observables."""

import numpy as np
import pytest

from rydchain import ed
from rydchain.couplings import COUPLINGS_48_50, exchange_time, spin_couplings
from rydchain.model import (
    ChainSpec,
    MotionalChainSpec,
    OperatorSpec,
    build_chain,
    build_motional_chain,
    drive_term,
    motional_bond_term,
    motional_static_term,
)

from oracles import (
    classical_ising_ground_energy,
    dense_pauli_term,
    ising_transverse_ground_energy,
    two_site_modulated_propagator,
    xy_open_ground_energy,
)


def random_chain_spec(rng, n=None, periodic=None):
    if periodic is None:
        periodic = bool(rng.random() < 0.3)
    return ChainSpec(
        n_sites=int(rng.integers(4, 9)) if n is None else n,
        j_hz=float(rng.uniform(-2, 2)),
        jz_hz=float(rng.uniform(-2, 2)),
        omega_hz=float(rng.uniform(0, 4)),
        delta_hz=float(rng.uniform(-2, 2)),
        delta_edge_hz=0.0 if periodic else float(rng.uniform(-2, 2)),
        periodic=periodic,
    )


def test_builder_matches_dense_kron():
    rng = np.random.default_rng(11)
    for _ in range(6):
        n = int(rng.integers(2, 6))
        op = OperatorSpec(n)
        ref = np.zeros((1 << n, 1 << n), dtype=complex)
        for _ in range(int(rng.integers(1, 10))):
            k = int(rng.integers(1, min(n, 3) + 1))
            sites = tuple(sorted(rng.choice(n, size=k, replace=False)))
            axes = tuple(rng.choice(["x", "y", "z"], size=k))
            c = float(rng.normal())
            op.add(c, sites, axes)
            ref += dense_pauli_term(n, sites, axes, c)
        np.testing.assert_allclose(ed.build_dense(op), ref, atol=1e-12)


def test_dense_vs_sparse_ground():
    rng = np.random.default_rng(21)
    for _ in range(10):
        spec = random_chain_spec(rng)
        op = build_chain(spec)
        gd = ed.ground_state(op, k=2, method="dense")
        gs = ed.ground_state(op, k=2, method="sparse")
        scale = max(1.0, abs(gd.energy))
        assert abs(gd.energy - gs.energy) / scale < 1e-10
        assert abs(ed.fidelity(gs.state, gd.degenerate_subspace()) - 1.0) < 1e-8


def test_xy_free_fermion_small():
    for n, j in [(4, 1.0), (7, -0.8), (10, 2.5)]:
        spec = ChainSpec(n_sites=n, j_hz=j, jz_hz=0.0)
        e = ed.ground_state(build_chain(spec), method="dense").energy
        assert e == pytest.approx(xy_open_ground_energy(n, j), rel=1e-12)


def test_ising_free_fermion_small():
    for n, jz, om in [(4, 1.0, 0.5), (6, -1.3, 2.0), (9, 0.7, 3.3)]:
        spec = ChainSpec(n_sites=n, j_hz=0.0, jz_hz=jz, omega_hz=om)
        e = ed.ground_state(build_chain(spec), method="dense").energy
        assert e == pytest.approx(ising_transverse_ground_energy(n, jz, om), rel=1e-12)


def test_classical_diagonal_limit():
    rng = np.random.default_rng(5)
    for _ in range(5):
        n = int(rng.integers(3, 9))
        jz, d, de = rng.uniform(-2, 2, size=3)
        spec = ChainSpec(n_sites=n, j_hz=0.0, jz_hz=float(jz),
                         delta_hz=float(d), delta_edge_hz=float(de))
        e = ed.ground_state(build_chain(spec), method="dense").energy
        ref = classical_ising_ground_energy(n, float(jz), float(d), float(de))
        assert e == pytest.approx(ref, abs=1e-10)


def test_gaps_degenerate_neel():
    spec = ChainSpec(n_sites=6, j_hz=0.0, jz_hz=1.0, periodic=True)
    g = ed.gaps(build_chain(spec), k=3, method="dense")
    assert g[0] == pytest.approx(0.0, abs=1e-12)
    assert g[1] == pytest.approx(4.0, abs=1e-12)


def test_sparse_detects_degeneracy():
    spec = ChainSpec(n_sites=8, j_hz=0.0, jz_hz=1.0, periodic=True)
    res = ed.ground_state(build_chain(spec), k=2, method="sparse")
    assert res.degenerate_subspace().shape[1] == 2


def test_ground_state_rejects_unknown_method():
    op = build_chain(ChainSpec(n_sites=2, j_hz=1.0, jz_hz=0.0))
    with pytest.raises(ValueError):
        ed.ground_state(op, method="magic")


def test_non_hermitian_coefficient_rejected():
    from rydchain.model import Term

    op = OperatorSpec(2)
    op.terms.append(Term((0,), ("x",), 1.0))
    # complex coefficient smuggled past the builder validation
    object.__setattr__(op.terms[0], "coeff", 1.0 + 2.0j)
    with pytest.raises(ValueError):
        ed.build_sparse(op)


def test_two_site_exchange_transfer():
    sc = spin_couplings(COUPLINGS_48_50, 5.0)
    spec = ChainSpec(n_sites=2, j_hz=sc.j_hz, jz_hz=sc.jz_hz)
    psi0 = ed.product_state(2, ["up", "down"])
    t_transfer = exchange_time(sc.j_hz) / 2.0  # 1/(8J)
    psi = ed.evolve(psi0, build_chain(spec), 0.0, t_transfer,
                    dt=exchange_time(sc.j_hz) / 200.0)
    target = ed.product_state(2, ["down", "up"])
    assert ed.fidelity(psi, target) == pytest.approx(1.0, abs=1e-6)


def test_evolution_norm_and_energy_conservation():
    rng = np.random.default_rng(2)
    spec = random_chain_spec(rng, n=6, periodic=False)
    op = build_chain(spec)
    h = ed.build_sparse(op)
    psi0 = rng.normal(size=64) + 1j * rng.normal(size=64)
    psi0 /= np.linalg.norm(psi0)
    e0 = float(np.vdot(psi0, h @ psi0).real)
    norms = []
    ed_time = 50.0
    psi = ed.evolve(psi0, op, 0.0, ed_time, dt=ed_time / 1000,
                    observer=lambda t, p: norms.append(np.linalg.norm(p)),
                    observe_every=100)
    assert max(abs(n - 1.0) for n in norms) < 1e-12
    e1 = float(np.vdot(psi, h @ psi).real)
    assert e1 == pytest.approx(e0, abs=1e-10)


def test_evolution_linearity():
    spec = ChainSpec(n_sites=4, j_hz=1.0, jz_hz=-0.7, omega_hz=1.3)
    op = build_chain(spec)
    rng = np.random.default_rng(9)
    a = rng.normal(size=16) + 1j * rng.normal(size=16)
    b = rng.normal(size=16) + 1j * rng.normal(size=16)
    ua = ed.evolve(a, op, 0.0, 0.3, dt=0.01)
    ub = ed.evolve(b, op, 0.0, 0.3, dt=0.01)
    uab = ed.evolve(a + 2j * b, op, 0.0, 0.3, dt=0.01)
    np.testing.assert_allclose(uab, ua + 2j * ub, atol=1e-10)


def test_evolution_against_eigendecomposition():
    spec = ChainSpec(n_sites=5, j_hz=0.9, jz_hz=-1.2, omega_hz=0.8,
                     delta_edge_hz=0.4)
    op = build_chain(spec)
    h = ed.build_dense(op)
    w, v = np.linalg.eigh(h)
    psi0 = ed.product_state(5, "neel")
    t = 2.7
    ref = v @ (np.exp(-2j * np.pi * w * t) * (v.conj().T @ psi0))
    psi = ed.evolve(psi0, op, 0.0, t, dt=t / 2000)
    assert np.max(np.abs(psi - ref)) < 1e-8


def test_step_too_large_raises():
    spec = ChainSpec(n_sites=6, j_hz=1e6, jz_hz=1e6, omega_hz=1e6)
    op = build_chain(spec)
    psi0 = ed.product_state(6, "up")
    with pytest.raises(RuntimeError, match="reduce the step"):
        ed.evolve(psi0, op, 0.0, 1.0, dt=1.0)


def test_time_dependent_fast_path_equals_slow_path():
    ms = MotionalChainSpec(n_sites=4, j_hz=1.0, jz_hz=-1.6, dzeta_hz=1.68,
                           nu_offset_hz=-3.36)
    mods = [lambda t, b=b: 1.0 + 0.1 * np.sin(2 * np.pi * (b + 1) * t)
            for b in range(3)]
    omega = lambda t: 4.0 * min(t / 2.0, 1.0)

    parts = [(drive_term(4), omega)]
    parts += [(motional_bond_term(ms, b), mods[b]) for b in range(3)]
    tdh = ed.TimeDependentHamiltonian(motional_static_term(ms), parts)

    def slow(t):
        spec_t = MotionalChainSpec(n_sites=4, j_hz=ms.j_hz, jz_hz=ms.jz_hz,
                                   dzeta_hz=ms.dzeta_hz, omega_hz=omega(t),
                                   nu_offset_hz=ms.nu_offset_hz)
        return build_motional_chain(spec_t, [m(t) for m in mods])

    psi0 = ed.product_state(4, "up")
    fast = ed.evolve(psi0, tdh, 0.0, 1.5, dt=0.01)
    ref = ed.evolve(psi0, slow, 0.0, 1.5, dt=0.01)
    np.testing.assert_allclose(fast, ref, atol=1e-12)


def test_staircase_vs_time_ordered_oracle():
    j, jz, dz = 17248.0, -1440.0, -26560.0
    nu_off = -2.0 * dz
    mod = lambda t: 1.0 + 0.08 * np.sin(2 * np.pi * 10e3 * t)
    ms = MotionalChainSpec(n_sites=2, j_hz=j, jz_hz=jz, dzeta_hz=dz,
                           nu_offset_hz=nu_off)
    tdh = ed.TimeDependentHamiltonian(motional_static_term(ms),
                                      [(motional_bond_term(ms, 0), mod)])
    tau = exchange_time(j)
    u = two_site_modulated_propagator(j, jz, dz, nu_off, mod, 0.0, tau)
    psi0 = (ed.product_state(2, ["up", "down"])
            + 0.5 * ed.product_state(2, ["down", "up"]))
    psi0 /= np.linalg.norm(psi0)
    psi = ed.evolve(psi0, tdh, 0.0, tau, dt=tau / 1000)
    assert np.max(np.abs(psi - u @ psi0)) < 1e-8


def test_measure_product_states():
    rep = ed.measure(ed.product_state(6, "up"), 6)
    assert rep.mz == pytest.approx(1.0)
    assert rep.mx == pytest.approx(0.0, abs=1e-12)
    assert rep.svn_half == pytest.approx(0.0, abs=1e-12)
    assert rep.oz == pytest.approx(1.0)

    rep = ed.measure(ed.product_state(6, "neel"), 6)
    assert rep.staggered_z == pytest.approx(1.0)
    assert rep.mz == pytest.approx(0.0, abs=1e-12)
    # correlator sites (2, 7) 1-based -> odd separation, opposite sublattices
    assert rep.oz == pytest.approx(-1.0)


def test_measure_x_polarized():
    plus = (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0))
    rep = ed.measure(ed.product_state(5, [plus] * 5), 5)
    assert rep.mx == pytest.approx(1.0)
    assert rep.mz == pytest.approx(0.0, abs=1e-12)
    assert rep.ox == pytest.approx(1.0)


def test_entropy_bell_pair():
    # (|ud> + |du>)/sqrt(2) across the half-chain cut
    psi = (ed.product_state(2, ["up", "down"])
           + ed.product_state(2, ["down", "up"])) / np.sqrt(2.0)
    assert ed.half_chain_entropy(psi, 2) == pytest.approx(np.log(2.0), rel=1e-12)


def test_entropy_bound():
    rng = np.random.default_rng(42)
    for n in (4, 6):
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        s = ed.half_chain_entropy(psi, n)
        assert 0.0 <= s <= (n // 2) * np.log(2.0) + 1e-12


def test_default_corr_pair():
    assert ed.default_corr_pair(12) == (5, 5)    # 1-based j=6, r=5
    assert ed.default_corr_pair(40) == (19, 19)  # 1-based j=20, r=19
    assert ed.default_corr_pair(40, r=17) == (19, 17)
    with pytest.raises(ValueError):
        ed.default_corr_pair(12, r=8)


def test_fidelity_degenerate_subspace():
    spec = ChainSpec(n_sites=6, j_hz=0.0, jz_hz=1.0, periodic=True)
    res = ed.ground_state(build_chain(spec), k=2, method="dense")
    sub = res.degenerate_subspace()
    assert sub.shape[1] == 2
    neel = ed.product_state(6, "neel")
    assert ed.fidelity(neel, sub) == pytest.approx(1.0, abs=1e-10)
    assert ed.fidelity(neel, sub[:, 0]) <= 1.0


def test_measure_energy_and_fidelity_fields():
    spec = ChainSpec(n_sites=4, j_hz=1.0, jz_hz=0.3, omega_hz=0.9)
    op = build_chain(spec)
    res = ed.ground_state(op, method="dense")
    rep = ed.measure(res.state, 4, op=op, ref_ground=res)
    assert rep.energy_hz == pytest.approx(res.energy, abs=1e-10)
    assert rep.fidelity == pytest.approx(1.0, abs=1e-12)


def test_entropy_log_growth_at_criticality():
    # half-chain entropy of the critical XY ring grows like (c/3) ln N;
    # periodic chains avoid the open-boundary parity oscillations
    ns = [8, 10, 12, 14]
    ss = []
    for n in ns:
        spec = ChainSpec(n_sites=n, j_hz=1.0, jz_hz=0.0, periodic=True)
        method = "dense" if n <= 10 else "sparse"
        res = ed.ground_state(build_chain(spec), method=method)
        ss.append(ed.half_chain_entropy(res.state, n))
    slope = np.polyfit(np.log(ns), ss, 1)[0]
    c_eff = 3.0 * slope
    assert 0.7 < c_eff < 1.3
