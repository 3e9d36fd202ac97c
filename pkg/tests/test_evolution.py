import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwalk import (
    LatticeSpec, StateSpec, StepContext, allocate_wavefunction, build_coin, build_initial_state,
    build_permanent_topology,
    empty_topology, norm_sq, parse, probability, run, sample_random_links, step, step_1d,
    step_2d_diagonal, step_2d_natural,
)
from qwalk.coins import CoinOperator
from qwalk.lattice import WaveFunction
from qwalk.links import LINK_DIRECTIONS
from qwalk.statistics import check_symmetry

from oracle import dense_operator

I2 = np.eye(2)
I4 = np.eye(4)


def _point(spec, coin, site, amp=1.0):
    return allocate_wavefunction(spec, StateSpec(((coin, site, amp),)))


def _ctx(spec, coin, topo=None):
    return StepContext(coin if hasattr(coin, "matrix") else _as_coin(coin),
                       topo if topo is not None else empty_topology(spec))


def _as_coin(m):
    return CoinOperator(np.asarray(m, dtype=complex))


def _random_wf(spec, rng):
    shape = spec.shape + (spec.ncoin,)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return WaveFunction(spec, a / np.linalg.norm(a))


def _broken_pairs(topo):
    spec = topo.spec
    pairs = []
    for arr, (_, e) in zip(topo.broken, topo.directions):
        for idx in zip(*np.nonzero(arr)):
            site = spec.decode(idx)
            pairs.append((site, tuple(a + b for a, b in zip(site, e))))
    return pairs


def test_diagonal_identity_coin_moves_along_main_diagonal():
    spec = LatticeSpec(2, "DIAGONAL", 3)
    out = step_2d_diagonal(_point(spec, (0, 0), (0, 0)), _ctx(spec, I4))
    assert out.t == 1
    # identity coin: the walker moves along the main diagonal keeping its coin
    assert out.amplitude(0, (1, 1)) == pytest.approx(1.0)
    assert norm_sq(out) == pytest.approx(1.0, abs=1e-14)


def test_diagonal_isolated_origin_reflects():
    spec = LatticeSpec(2, "DIAGONAL", 3)
    topo = build_permanent_topology([("POINT", 0, 0)], spec)
    coin = build_coin("FOURIER", 2)
    wf = allocate_wavefunction(spec, build_initial_state("FOURIER", 2))
    out = step_2d_diagonal(wf, _ctx(spec, coin, topo))
    assert probability(out)[0, 0] == pytest.approx(1.0, abs=1e-14)


def test_natural_identity_coin_moves():
    spec = LatticeSpec(2, "NATURAL", 3)
    out = step_2d_natural(_point(spec, (0, 0), (1, -1)), _ctx(spec, I4))
    assert probability(out)[1, 0] == pytest.approx(1.0)
    out = step_2d_natural(_point(spec, (1, 0), (1, -1)), _ctx(spec, I4))
    assert probability(out)[0, -1] == pytest.approx(1.0)


def test_line_hadamard_one_step():
    spec = LatticeSpec(1, "LINE", 3)
    wf = allocate_wavefunction(spec, build_initial_state("HADAMARD", 1))
    p = probability(step_1d(wf, _ctx(spec, build_coin("HADAMARD", 1))))
    assert p[-1] == pytest.approx(0.5, abs=1e-15)
    assert p[1] == pytest.approx(0.5, abs=1e-15)
    assert p.total() == pytest.approx(1.0, abs=1e-15)


def test_cycle_wraps():
    spec = LatticeSpec(1, "CYCLE", 4)
    out = step_1d(_point(spec, (0,), (3,)), _ctx(spec, I2))
    assert probability(out)[0] == pytest.approx(1.0)
    assert out.amplitude(0, (0,)) == pytest.approx(1.0)


def test_segment_boundary_reflects_with_coin_flip():
    spec = LatticeSpec(1, "SEGMENT", 1)
    # coin 0 moves right; at the right edge the link is broken
    out = step_1d(_point(spec, (0,), (1,)), _ctx(spec, I2))
    assert out.amplitude(1, (1,)) == pytest.approx(1.0)
    assert norm_sq(out) == pytest.approx(1.0, abs=1e-15)


def test_step_rejects_wrong_kind():
    spec = LatticeSpec(2, "NATURAL", 2)
    with pytest.raises(ValueError):
        step_2d_diagonal(_point(spec, (0, 0), (0, 0)), _ctx(spec, I4))


def test_step_does_not_mutate_input():
    spec = LatticeSpec(2, "DIAGONAL", 3)
    wf = _random_wf(spec, np.random.default_rng(0))
    before = wf.amplitudes.copy()
    step(wf, _ctx(spec, build_coin("GROVER", 2)))
    assert np.array_equal(wf.amplitudes, before)


def test_steps_zero_returns_initial_distribution():
    r = run(parse("BEGIN STEPS 0 LATTYPE DIAGONAL END"))
    assert r.distribution[0, 0] == 1.0
    assert r.steps_run == 0


@pytest.mark.parametrize("kind,dim,size,coin", [
    ("CYCLE", 1, 8, "HADAMARD"), ("CYCLE", 1, 5, "HADAMARD"), ("LINE", 1, 4, "HADAMARD"),
    ("SEGMENT", 1, 3, "HADAMARD"), ("DIAGONAL", 2, 2, "GROVER"), ("DIAGONAL", 2, 3, "FOURIER"),
    ("NATURAL", 2, 2, "FOURIER"), ("NATURAL", 2, 3, "HADAMARD"),
])
@pytest.mark.parametrize("p", [0.0, 0.3])
def test_oracle_equivalence(kind, dim, size, coin, p):
    rng = np.random.default_rng(7)
    spec = LatticeSpec(dim, kind, size)
    c = build_coin(coin, dim)
    topo = sample_random_links([p] * len(LINK_DIRECTIONS[kind]), spec, rng)
    U, sites = dense_operator(kind, size, c.matrix, _broken_pairs(topo))
    wf = _random_wf(spec, rng)
    ctx = StepContext(c, topo)
    vec = wf.amplitudes.reshape(-1)
    for _ in range(5):
        vec = U @ vec
        wf = step(wf, ctx)
        assert np.abs(wf.amplitudes.reshape(-1) - vec).max() < 1e-12


def test_oracle_operator_is_unitary():
    spec = LatticeSpec(2, "NATURAL", 3)
    topo = build_permanent_topology([("LINE", -1, 1, 1, 1)], spec)
    U, _ = dense_operator("NATURAL", 3, build_coin("GROVER", 2).matrix, _broken_pairs(topo))
    assert np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-13)


@given(st.sampled_from(["DIAGONAL", "NATURAL"]), st.sampled_from(["HADAMARD", "FOURIER", "GROVER"]),
       st.floats(0, 1), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_unitarity_with_random_links(kind, coin, p, seed):
    rng = np.random.default_rng(seed)
    spec = LatticeSpec(2, kind, 4)
    topo = sample_random_links([p, 1 - p], spec, rng)
    wf = _random_wf(spec, rng)
    out = step(wf, StepContext(build_coin(coin, 2), topo))
    assert norm_sq(out) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=3, allow_nan=False,
                                                       allow_infinity=False))
@settings(max_examples=20, deadline=None)
def test_linearity(seed, alpha):
    rng = np.random.default_rng(seed)
    spec = LatticeSpec(2, "DIAGONAL", 3)
    topo = sample_random_links([0.4, 0.2], spec, rng)
    ctx = StepContext(build_coin("FOURIER", 2), topo)
    a, b = _random_wf(spec, rng), _random_wf(spec, rng)
    combo = WaveFunction(spec, alpha * a.amplitudes + 2 * b.amplitudes)
    lhs = step(combo, ctx).amplitudes
    rhs = alpha * step(a, ctx).amplitudes + 2 * step(b, ctx).amplitudes
    assert np.abs(lhs - rhs).max() < 1e-12 * max(1.0, abs(alpha))


@pytest.mark.parametrize("kind", ["DIAGONAL", "NATURAL"])
def test_locality(kind):
    spec = LatticeSpec(2, kind, 12)
    ctx = StepContext(build_coin("GROVER", 2), empty_topology(spec))
    wf = _random_wf(spec, np.random.default_rng(1))
    mask = np.zeros(wf.amplitudes.shape, dtype=bool)
    mask[10:14, 11:13] = True
    wf.amplitudes[~mask] = 0
    for t in range(1, 6):
        wf = step(wf, ctx)
        support = np.argwhere(np.abs(wf.amplitudes).sum(axis=-1) > 0)
        assert support[:, 0].min() >= 10 - t and support[:, 0].max() <= 13 + t
        assert support[:, 1].min() >= 11 - t and support[:, 1].max() <= 12 + t


def test_diagonal_hadamard_100_steps():
    r = run(parse("BEGIN COIN HADAMARD STATE HADAMARD STEPS 100 LATTYPE DIAGONAL END"))
    assert r.distribution.total() == pytest.approx(1.0, abs=1e-9)
    assert check_symmetry(r.distribution, "XSYMMETRY", 1e-10)
    assert check_symmetry(r.distribution, "YSYMMETRY", 1e-10)
    sig = r.stats.sigma
    # linear spreading: sigma(100) / sigma(50) close to 2
    assert sig[99] / sig[49] == pytest.approx(2.0, rel=0.03)


def test_checks_run_on_result():
    r = run(parse("BEGIN COIN GROVER STATE GROVER STEPS 10 LATTYPE NATURAL "
                  "CHECK XSYMMETRY CHECK STATEPROB END"))
    assert r.checks["XSYMMETRY"] is True


def test_evolution_matches_oracle_with_every_pair_of_coin_basis_states():
    spec = LatticeSpec(2, "NATURAL", 2)
    c = build_coin("HADAMARD", 2)
    U, _ = dense_operator("NATURAL", 2, c.matrix)
    ctx = StepContext(c, empty_topology(spec))
    for coin, site in itertools.product(itertools.product((0, 1), repeat=2), [(0, 0), (2, -1)]):
        wf = _point(spec, coin, site)
        assert np.abs(step(wf, ctx).amplitudes.reshape(-1) - U @ wf.amplitudes.reshape(-1)).max() < 1e-14
