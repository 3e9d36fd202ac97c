"""One-step coined evolution on every lattice kind, and full simulation runs.

Each coin basis state moves one link per step.  For coin ``c`` moving along
``d`` the updated amplitude at site ``t`` is

    new[t, c] = (C psi)[t - d, c]          if the link t-d -- t is intact
    new[t, c] = (C psi)[t, partner(c)]     if it is broken

where ``partner(c)`` is the coin with all bits flipped, which moves along
``-d``.  The second line is the reflection: the walker that would have
crossed the broken link stays put with its coin flipped.  With every link
stored once, this map is a permutation and the step is unitary.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import links as _links
from .coins import CoinOperator
from .errors import SimulationError
from .lattice import (
    NORM_TOL, Distribution, WaveFunction, allocate_wavefunction, norm_sq, probability,
)
from .links import LinkTopology

# (link direction index, sign) for each coin basis state, see links.LINK_DIRECTIONS
COIN_MOVES = {
    "LINE": ((0, +1), (0, -1)),
    "SEGMENT": ((0, +1), (0, -1)),
    "CYCLE": ((0, +1), (0, -1)),
    # 00 -> (+1,+1), 01 -> (+1,-1), 10 -> (-1,+1), 11 -> (-1,-1)
    "DIAGONAL": ((1, +1), (0, +1), (0, -1), (1, -1)),
    # 00 -> (0,+1), 01 -> (+1,0), 10 -> (-1,0), 11 -> (0,-1)
    "NATURAL": ((1, +1), (0, +1), (0, -1), (1, -1)),
}


def coin_displacement(kind: str, c: int) -> tuple:
    direction, sign = COIN_MOVES[kind][c]
    e = _links.LINK_DIRECTIONS[kind][direction][1]
    return tuple(sign * x for x in e)


@dataclass(frozen=True)
class StepContext:
    coin: CoinOperator
    topology: LinkTopology

    @property
    def kind(self) -> str:
        return self.topology.spec.kind


class _StepPlan:
    """Per-topology data for the shift: displacement and reflection mask per coin."""

    def __init__(self, topology: LinkTopology):
        spec = topology.spec
        self.periodic = spec.periodic
        self.ncoin = spec.ncoin
        moves = COIN_MOVES[spec.kind]
        blocked_from = [_links.blocked(topology, d, s) for d, s in moves]
        self.coins = []
        for c in range(self.ncoin):
            r = self.ncoin - 1 - c
            d = coin_displacement(spec.kind, c)
            # broken link between t-d and t, seen from t in direction -d
            reflect = blocked_from[r]
            if self.periodic and not reflect.any():
                reflect = None
            self.coins.append((c, r, d, reflect))


def _slices(d, shape):
    dst, src = [], []
    for o, n in zip(d, shape):
        if o >= 0:
            dst.append(slice(o, n))
            src.append(slice(0, n - o))
        else:
            dst.append(slice(0, n + o))
            src.append(slice(-o, n))
    return tuple(dst), tuple(src)


def _advance(amps: np.ndarray, scratch: np.ndarray, coin_t: np.ndarray, plan: _StepPlan):
    """Apply S (C x I) in place on ``amps``; ``scratch`` receives C psi."""
    ncoin = plan.ncoin
    np.matmul(amps.reshape(-1, ncoin), coin_t, out=scratch.reshape(-1, ncoin))
    shape = amps.shape[:-1]
    axes = tuple(range(len(shape)))
    for c, r, d, reflect in plan.coins:
        dst = amps[..., c]
        src = scratch[..., c]
        if plan.periodic:
            dst[...] = np.roll(src, d, axis=axes)
        else:
            dst_sl, src_sl = _slices(d, shape)
            # sites not covered by dst_sl border the outside, so reflect is set there
            dst[dst_sl] = src[src_sl]
        if reflect is not None:
            np.copyto(dst, scratch[..., r], where=reflect)


def _step(wf: WaveFunction, ctx: StepContext, expected_kinds) -> WaveFunction:
    if wf.spec.kind not in expected_kinds:
        raise ValueError(f"{wf.spec.kind} wavefunction passed to a {expected_kinds} step")
    if ctx.topology.spec != wf.spec:
        raise ValueError("topology and wavefunction are defined on different lattices")
    out = wf.amplitudes.copy()
    _advance(out, np.empty_like(out), ctx.coin.matrix.T.copy(), _StepPlan(ctx.topology))
    return WaveFunction(wf.spec, out, wf.t + 1)


def step_2d_diagonal(wf: WaveFunction, ctx: StepContext) -> WaveFunction:
    """One step with the diagonal shift: coin (j, k) moves by ((-1)^j, (-1)^k)."""
    return _step(wf, ctx, ("DIAGONAL",))


def step_2d_natural(wf: WaveFunction, ctx: StepContext) -> WaveFunction:
    """One step with the natural shift: coin (j, d) moves by (-1)^j along y if j == d, else x."""
    return _step(wf, ctx, ("NATURAL",))


def step_1d(wf: WaveFunction, ctx: StepContext) -> WaveFunction:
    """One step on the line, the reflecting segment or the cycle."""
    return _step(wf, ctx, ("LINE", "SEGMENT", "CYCLE"))


def step(wf: WaveFunction, ctx: StepContext) -> WaveFunction:
    return _step(wf, ctx, tuple(COIN_MOVES))


class Evolver:
    """In-place double-buffered stepping of one wavefunction."""

    def __init__(self, wf: WaveFunction, coin: CoinOperator, permanent: LinkTopology):
        self.wf = wf
        self.scratch = np.empty_like(wf.amplitudes)
        self.coin_t = np.ascontiguousarray(coin.matrix.T)
        self.permanent = permanent
        self._static_plan = _StepPlan(permanent)

    def advance(self, random_links: LinkTopology | None = None):
        if random_links is None:
            plan = self._static_plan
        else:
            plan = _StepPlan(_links.merge(self.permanent, random_links))
        _advance(self.wf.amplitudes, self.scratch, self.coin_t, plan)
        self.wf.t += 1


def coherent_average(config, steps: int) -> Distribution:
    """Average distribution over times 0..steps-1 of the noise-free walk."""
    spec = config.lattice_spec()
    wf = allocate_wavefunction(spec, config.initial_state())
    evolver = Evolver(wf, config.coin_operator(), config.permanent_topology(spec))
    total = probability(wf).values.copy()
    for _ in range(steps - 1):
        evolver.advance()
        total += probability(wf).values
    return Distribution(spec, total / steps)


@dataclass
class SimulationResult:
    wavefunction: WaveFunction
    distribution: Distribution
    stats: "object"
    screen: "object | None" = None
    stationary: Distribution | None = None
    detections: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    steps_run: int = 0
    experiments: int = 1
    runtime: float = 0.0


def run(config, rng: np.random.Generator | None = None, stationary: Distribution | None = None
        ) -> SimulationResult:
    """Simulate ``config.steps`` iterations of links, unitary step, measurement, statistics.

    ``stationary`` may carry a precomputed approximate stationary distribution
    (the ensemble driver computes it once for all members).
    """
    from .measurement import DetectorSet, measure_inplace, sample_decoherence_detectors
    from .statistics import (
        ScreenData, StatsRecorder, approximate_stationary, check_symmetry, screen_spec,
    )

    t0 = time.perf_counter()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    spec = config.lattice_spec()
    wf = allocate_wavefunction(spec, config.initial_state())
    permanent = config.permanent_topology(spec)
    evolver = Evolver(wf, config.coin_operator(), permanent)

    if config.mixtime is not None and stationary is None:
        stationary = approximate_stationary(config, config.mixtime)
    recorder = StatsRecorder(spec, probability(wf) if stationary is not None else None,
                             stationary)
    screen = ScreenData.empty(screen_spec(config, spec)) if config.screen else None
    fixed = DetectorSet.from_sites(spec, config.detectors) if config.detectors else None
    blprob = config.blprob if config.blprob is not None and any(config.blprob) else None
    check_norm = "STATEPROB" in config.checks

    detections = []
    countdown = None
    for t in range(1, config.steps + 1):
        noise = _links.sample_random_links(blprob, spec, rng) if blprob is not None else None
        evolver.advance(noise)
        if check_norm:
            dev = abs(norm_sq(wf) - 1.0)
            if dev > NORM_TOL:
                raise SimulationError(f"unitarity check failed at step {t}: |norm^2 - 1| = {dev:.3e}")
        detectors = fixed
        if config.dtprob:
            sampled = sample_decoherence_detectors(config.dtprob, spec, rng)
            detectors = sampled if fixed is None else fixed.union(sampled)
        nontrivial = False
        if detectors is not None and len(detectors):
            outcome = measure_inplace(wf, detectors, rng)
            if outcome.index > 0:
                nontrivial = True
                detections.append((t, outcome.site))
        dist = probability(wf)
        recorder.record(t, dist)
        if screen is not None:
            screen.add(dist)
        if countdown is not None:
            countdown -= 1
        if nontrivial and config.aftermeasure is not None:
            countdown = config.aftermeasure
        del dist
        if countdown is not None and countdown <= 0:
            break

    final = probability(wf)
    checks = {}
    for mode in ("SYMMETRY", "XSYMMETRY", "YSYMMETRY"):
        if mode in config.checks:
            checks[mode] = check_symmetry(final, mode)
    if check_norm:
        checks["STATEPROB"] = True
    return SimulationResult(
        wavefunction=wf, distribution=final, stats=recorder.finish(), screen=screen,
        stationary=stationary, detections=detections, checks=checks, steps_run=wf.t,
        runtime=time.perf_counter() - t0)
