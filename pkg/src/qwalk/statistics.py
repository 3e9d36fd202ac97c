"""Distances, moments, mixing times, screens and per-step statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lattice import Distribution, LatticeSpec, WaveFunction, probability, uniform
from .links import segment_points

SYMMETRY_TOL = 1e-10


def _values(d) -> np.ndarray:
    return d.values if isinstance(d, Distribution) else np.asarray(d, dtype=float)


def tvd(a, b) -> float:
    """Total variation distance ``sum |a - b|`` (no factor 1/2, range [0, 2])."""
    if isinstance(a, Distribution) and isinstance(b, Distribution) and a.spec != b.spec:
        raise ValueError("distributions are defined on different lattices")
    va, vb = _values(a), _values(b)
    if va.shape != vb.shape:
        raise ValueError(f"distribution shapes differ: {va.shape} vs {vb.shape}")
    return float(np.abs(va - vb).sum())


def moments(dist: Distribution):
    """Mean and variance per axis and total deviation ``sqrt(sum of variances)``."""
    values = dist.values
    total = values.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"moments need a normalized distribution, total is {total!r}")
    coords = dist.spec.coordinates().astype(float)
    means, variances = [], []
    for axis in range(values.ndim):
        other = tuple(a for a in range(values.ndim) if a != axis)
        marginal = values.sum(axis=other) if other else values
        mean = float(marginal @ coords)
        means.append(mean)
        variances.append(max(float(marginal @ (coords - mean) ** 2), 0.0))
    return tuple(means), tuple(variances), float(np.sqrt(sum(variances)))


def check_symmetry(dist: Distribution, mode: str = "SYMMETRY", tol: float = SYMMETRY_TOL) -> bool:
    """Compare P(x, y) with its mirror image.

    XSYMMETRY mirrors x -> -x, YSYMMETRY mirrors y -> -y, SYMMETRY mirrors the
    single axis of a 1D walk (or both axes in 2D).
    """
    v = dist.values
    spec = dist.spec

    def mirror(axis):
        if spec.periodic:
            return np.roll(np.flip(v, axis=axis), 1, axis=axis)
        return np.flip(v, axis=axis)

    if mode == "XSYMMETRY":
        axes = [0]
    elif mode == "YSYMMETRY":
        if v.ndim < 2:
            raise ValueError("YSYMMETRY needs a 2D distribution")
        axes = [1]
    elif mode == "SYMMETRY":
        axes = list(range(v.ndim))
    else:
        raise ValueError(f"unknown symmetry mode {mode!r}")
    return all(float(np.abs(v - mirror(a)).max(initial=0.0)) <= tol for a in axes)


def mixing_time(tvd_series, epsilon: float):
    """Smallest index T with every value from T on at most ``epsilon``, else None."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    series = np.asarray(tvd_series, dtype=float)
    if series.size == 0:
        raise ValueError("empty TVD series")
    above = np.flatnonzero(series > epsilon)
    if above.size == 0:
        return 0
    last = int(above[-1])
    return None if last == series.size - 1 else last + 1


def approximate_stationary(config, steps: int) -> Distribution:
    """Coherent average distribution over ``steps`` time steps (times 0..steps-1)."""
    from .evolution import coherent_average

    if steps < 1:
        raise ConfigError(f"MIXTIME must be >= 1, got {steps}")
    if steps < config.steps:
        raise ConfigError(
            f"MIXTIME must be >= STEPS (the stationary approximation should use at least "
            f"as many steps as the simulation): MIXTIME {steps} < STEPS {config.steps}")
    return coherent_average(config, steps)


@dataclass(frozen=True)
class ScreenSpec:
    endpoints: tuple
    sites: tuple


def make_screen(endpoints, spec: LatticeSpec) -> ScreenSpec:
    """Rasterize a screen segment; sites outside the lattice are dropped with a warning."""
    if spec.dimension != 2:
        raise ConfigError("observation screens are only available in two dimensions")
    try:
        points = segment_points(*endpoints)
    except ConfigError as exc:
        raise ConfigError(str(exc).replace("LINE", "SCREEN")) from None
    inside = [p for p in points if spec.contains(p)]
    if len(inside) < len(points):
        warnings.warn(
            f"SCREEN {' '.join(map(str, endpoints))}: {len(points) - len(inside)} of "
            f"{len(points)} sites lie outside the lattice and are ignored", stacklevel=2)
    return ScreenSpec(tuple(endpoints), tuple(inside))


def screen_spec(config, spec: LatticeSpec) -> ScreenSpec:
    return make_screen(config.screen, spec)


@dataclass
class ScreenData:
    screen: ScreenSpec
    accumulated: np.ndarray
    final: np.ndarray
    _index: tuple = ()

    @classmethod
    def empty(cls, screen: ScreenSpec) -> "ScreenData":
        n = len(screen.sites)
        return cls(screen, np.zeros(n), np.zeros(n))

    def _lookup(self, dist: Distribution) -> np.ndarray:
        if not self.screen.sites:
            return np.zeros(0)
        if not self._index:
            self._index = tuple(np.array(a) for a in zip(*(dist.spec.encode(s)
                                                          for s in self.screen.sites)))
        return dist.values[self._index]

    def add(self, dist: Distribution):
        snap = self._lookup(dist)
        self.accumulated += snap
        self.final = snap.copy()
        return self


def record_screen(wf, screen: ScreenSpec, accumulator: ScreenData | None = None) -> ScreenData:
    """Add the current probability on each screen site to ``accumulator``."""
    dist = probability(wf) if isinstance(wf, WaveFunction) else wf
    if accumulator is None:
        accumulator = ScreenData.empty(screen)
    return accumulator.add(dist)


@dataclass
class StatsSeries:
    """Per-step statistics; row ``i`` describes time ``t[i]``.

    ``tvd_stationary`` / ``tvd_uniform`` compare the average distribution over
    times ``0..t-1`` with the approximate stationary / uniform distribution;
    they are None unless a stationary distribution was requested.
    """

    t: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    sigma: np.ndarray
    tvd_stationary: np.ndarray | None = None
    tvd_uniform: np.ndarray | None = None

    def __len__(self):
        return len(self.t)


class AverageAccumulator:
    """Running sum of distributions; ``average()`` is the time average so far."""

    def __init__(self, spec: LatticeSpec):
        self.spec = spec
        self.total = np.zeros(spec.shape)
        self.count = 0

    def add(self, dist: Distribution):
        self.total += dist.values
        self.count += 1

    def average(self) -> Distribution:
        if self.count == 0:
            raise ValueError("no distributions accumulated")
        return Distribution(self.spec, self.total / self.count)


class StatsRecorder:
    """Collects a StatsSeries while a walk runs."""

    def __init__(self, spec: LatticeSpec, initial: Distribution,
                 stationary: Distribution | None = None):
        self.spec = spec
        self.stationary = stationary
        self.uniform = None
        self.avg = None
        # the running average is only needed for the TVD columns
        if stationary is not None:
            self.uniform = uniform(spec)
            self.avg = AverageAccumulator(spec)
            self.avg.add(initial)
        self.rows = []

    def record(self, t: int, dist: Distribution):
        mean, var, sigma = moments(dist)
        row = [t, mean, var, sigma]
        if self.stationary is not None:
            avg = self.avg.total / self.avg.count
            row += [tvd(avg, self.stationary.values), tvd(avg, self.uniform.values)]
            self.avg.add(dist)
        self.rows.append(row)

    def finish(self) -> StatsSeries:
        dim = self.spec.dimension
        n = len(self.rows)
        t = np.array([r[0] for r in self.rows], dtype=int)
        mean = np.array([r[1] for r in self.rows], dtype=float).reshape(n, dim)
        var = np.array([r[2] for r in self.rows], dtype=float).reshape(n, dim)
        sigma = np.array([r[3] for r in self.rows], dtype=float)
        extra = {}
        if self.stationary is not None:
            extra = dict(tvd_stationary=np.array([r[4] for r in self.rows], dtype=float),
                         tvd_uniform=np.array([r[5] for r in self.rows], dtype=float))
        return StatsSeries(t, mean, var, sigma, **extra)


def _average_series(series: list) -> StatsSeries:
    """Point-wise mean; rows present in only some members average over those members."""
    length = max(len(s) for s in series)
    first = max(series, key=len)

    def avg(get):
        columns = [get(s) for s in series]
        if columns[0] is None:
            return None
        total = np.zeros((length,) + columns[0].shape[1:])
        count = np.zeros(length)
        for col in columns:
            total[:len(col)] += col
            count[:len(col)] += 1
        return total / count.reshape((-1,) + (1,) * (total.ndim - 1))

    return StatsSeries(
        t=first.t.copy(), mean=avg(lambda s: s.mean), variance=avg(lambda s: s.variance),
        sigma=avg(lambda s: s.sigma), tvd_stationary=avg(lambda s: s.tvd_stationary),
        tvd_uniform=avg(lambda s: s.tvd_uniform))


def average_results(results):
    """Arithmetic mean of simulation results, reduced in the given order."""
    from .evolution import SimulationResult

    results = list(results)
    n = len(results)
    if n == 0:
        raise ValueError("no results to average")
    first = results[0]
    dist = np.zeros_like(first.distribution.values)
    for r in results:
        dist += r.distribution.values
    dist /= n
    screen = None
    if first.screen is not None:
        screen = ScreenData(first.screen.screen, np.zeros_like(first.screen.accumulated),
                            np.zeros_like(first.screen.final))
        for r in results:
            screen.accumulated += r.screen.accumulated
            screen.final += r.screen.final
        screen.accumulated /= n
        screen.final /= n
    checks = {}
    for key in first.checks:
        checks[key] = all(r.checks.get(key, False) for r in results)
    detections = [(i, t, site) for i, r in enumerate(results) for t, site in r.detections]
    return SimulationResult(
        wavefunction=first.wavefunction,
        distribution=Distribution(first.distribution.spec, dist),
        stats=_average_series([r.stats for r in results]),
        screen=screen, stationary=first.stationary, detections=detections, checks=checks,
        steps_run=max(r.steps_run for r in results), experiments=n,
        runtime=sum(r.runtime for r in results))
