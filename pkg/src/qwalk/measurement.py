"""Projective site measurements, random decoherence and ensemble averaging.

A detector set ``{s_1, ..., s_N}`` defines the outcomes ``M_i = I_coin x |s_i><s_i|``
and the complement ``M_0 = I - sum_i M_i``.  Outcome 0 is the trivial one.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, SimulationError
from .lattice import LatticeSpec, WaveFunction, norm_sq

THREADS_ENV = "QWALK_THREADS"


@dataclass(frozen=True)
class DetectorSet:
    spec: LatticeSpec
    flat: np.ndarray  # flat site indices, in detector order

    @classmethod
    def from_sites(cls, spec: LatticeSpec, sites) -> "DetectorSet":
        flat = []
        for site in sites:
            site = tuple(site)
            if not spec.contains(site):
                raise ConfigError(f"detector {site} lies outside the lattice")
            flat.append(np.ravel_multi_index(spec.encode(site), spec.shape))
        if len(set(flat)) != len(flat):
            raise ConfigError("detector sites must be distinct")
        return cls(spec, np.array(flat, dtype=np.intp))

    @property
    def sites(self) -> list:
        return [self.spec.decode(np.unravel_index(i, self.spec.shape)) for i in self.flat]

    def union(self, other: "DetectorSet") -> "DetectorSet":
        extra = np.setdiff1d(other.flat, self.flat, assume_unique=False)
        return DetectorSet(self.spec, np.concatenate([self.flat, extra]))

    def __len__(self):
        return len(self.flat)


@dataclass(frozen=True)
class MeasurementOutcome:
    index: int  # 0 for the complement, i >= 1 for detector i
    probability: float
    probabilities: np.ndarray  # p(0), p(1), ..., p(N)
    site: tuple | None = None

    @property
    def nontrivial(self) -> bool:
        return self.index > 0


def _site_probs(amps: np.ndarray, flat: np.ndarray) -> np.ndarray:
    coin = amps.reshape(-1, amps.shape[-1])[flat]
    return (coin.real ** 2 + coin.imag ** 2).sum(axis=1)


def measure_inplace(wf: WaveFunction, detectors: DetectorSet,
                    rng: np.random.Generator) -> MeasurementOutcome:
    """Sample an outcome, collapse and renormalize ``wf`` in place."""
    amps = wf.amplitudes
    flat_amps = amps.reshape(-1, amps.shape[-1])
    p_det = _site_probs(amps, detectors.flat)
    total = norm_sq(wf)
    p0 = max(total - float(p_det.sum()), 0.0)
    probs = np.concatenate([[p0], p_det]) / total
    cum = np.cumsum(probs)
    m = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    m = min(m, len(probs) - 1)
    p = float(probs[m])
    if p <= 0:
        raise SimulationError(f"sampled measurement outcome {m} with zero probability")
    scale = 1.0 / np.sqrt(p * total)
    if m == 0:
        flat_amps[detectors.flat] = 0
        amps *= scale
        site = None
    else:
        i = detectors.flat[m - 1]
        kept = flat_amps[i].copy()
        amps[...] = 0
        flat_amps[i] = kept * scale
        site = detectors.spec.decode(np.unravel_index(i, detectors.spec.shape))
    return MeasurementOutcome(m, p, probs, site)


def measure(wf: WaveFunction, detectors: DetectorSet, rng: np.random.Generator):
    """Return ``(outcome, collapsed copy of wf)``."""
    if len(detectors) == 0:
        raise ValueError("measure needs at least one detector")
    out = wf.copy()
    outcome = measure_inplace(out, detectors, rng)
    return outcome, out


def sample_decoherence_detectors(p: float, spec: LatticeSpec,
                                 rng: np.random.Generator) -> DetectorSet:
    """Each site becomes a detector independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"DTPROB must lie in [0, 1], got {p}")
    flat = np.flatnonzero(rng.random(spec.nsites) < p)
    return DetectorSet(spec, flat)


def experiment_seeds(seed, experiments: int) -> list:
    """Independent per-experiment seed sequences derived from one master seed."""
    return np.random.SeedSequence(seed).spawn(experiments)


def _default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return os.cpu_count() or 1


def run_ensemble(config, experiments: int | None = None, threads: int | None = None):
    """Run independent experiments and average their results point-wise.

    Members are seeded from ``config.seed`` (fresh entropy if unset); results
    are reduced in experiment order, so the average does not depend on
    ``threads``.  With one experiment the result is that of ``run``.
    """
    from .evolution import run
    from .statistics import approximate_stationary, average_results

    experiments = config.experiments if experiments is None else experiments
    if experiments < 1:
        raise ConfigError(f"EXPERIMENTS must be >= 1, got {experiments}")
    if experiments == 1:
        return run(config)
    if config.seed is None:
        config = replace(config, seed=int(np.random.SeedSequence().entropy % (2 ** 63)))
    stationary = None
    if config.mixtime is not None:
        stationary = approximate_stationary(config, config.mixtime)
    seeds = experiment_seeds(config.seed, experiments)

    def member(seq):
        return run(config, np.random.default_rng(seq), stationary=stationary)

    threads = _default_threads() if threads is None else threads
    if threads <= 1:
        results = [member(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, experiments)) as pool:
            results = list(pool.map(member, seeds))
    return average_results(results)
