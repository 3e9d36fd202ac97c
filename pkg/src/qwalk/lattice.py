"""Lattice geometry, wavefunction storage and probability extraction.

Amplitudes are stored densely as an array of shape ``(*lattice_shape, ncoin)``
with the coin index fastest-varying.  In 2D the coin index is ``2*j + k``
(lexicographic over the coin bits), in 1D it is the chirality ``j``.
Sites are indexed ``-R..R`` per axis, except on the cycle where the ``N``
sites are ``0..N-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ConfigError

KINDS_1D = ("LINE", "SEGMENT", "CYCLE")
KINDS_2D = ("DIAGONAL", "NATURAL")

NORM_TOL = 1e-9


@dataclass(frozen=True)
class LatticeSpec:
    """Shape of the simulated lattice.

    ``half_size`` is R for every kind except CYCLE, where it is the number
    of sites N.  ``extra`` is the reserved border (LATTEXTRA); it is already
    folded into ``half_size`` by whoever builds the spec.
    """

    dimension: int
    kind: str
    half_size: int
    extra: int = 1

    def __post_init__(self):
        if self.dimension == 1:
            if self.kind not in KINDS_1D:
                raise ConfigError(f"lattice kind {self.kind!r} is not a 1D lattice")
        elif self.dimension == 2:
            if self.kind not in KINDS_2D:
                raise ConfigError(f"lattice kind {self.kind!r} is not a 2D lattice")
        else:
            raise ConfigError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.half_size < 1:
            raise ConfigError(f"lattice size must be >= 1, got {self.half_size}")
        if self.extra < 0:
            raise ConfigError(f"LATTEXTRA must be >= 0, got {self.extra}")

    @property
    def periodic(self) -> bool:
        return self.kind == "CYCLE"

    @property
    def ncoin(self) -> int:
        return 2 if self.dimension == 1 else 4

    @property
    def axis_length(self) -> int:
        return self.half_size if self.periodic else 2 * self.half_size + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.axis_length,) * self.dimension

    @property
    def nsites(self) -> int:
        return self.axis_length ** self.dimension

    def coordinates(self) -> np.ndarray:
        """Coordinate value of each index along one axis."""
        if self.periodic:
            return np.arange(self.half_size)
        return np.arange(-self.half_size, self.half_size + 1)

    def contains(self, site: Iterable[int]) -> bool:
        site = tuple(site)
        if len(site) != self.dimension:
            return False
        if self.periodic:
            return True
        return all(-self.half_size <= x <= self.half_size for x in site)

    def encode(self, site: Iterable[int]) -> tuple[int, ...]:
        """Array index of a lattice site (wraps on the cycle)."""
        site = tuple(int(x) for x in site)
        if len(site) != self.dimension:
            raise ConfigError(
                f"site {site} has {len(site)} coordinates, lattice is {self.dimension}D")
        if self.periodic:
            return tuple(x % self.half_size for x in site)
        if not self.contains(site):
            raise ConfigError(
                f"site {site} lies outside the lattice (|coordinate| <= {self.half_size})")
        return tuple(x + self.half_size for x in site)

    def decode(self, index: Iterable[int]) -> tuple[int, ...]:
        index = tuple(int(i) for i in index)
        if self.periodic:
            return index
        return tuple(i - self.half_size for i in index)

    def sites(self):
        """Iterate over all sites in array order."""
        for index in np.ndindex(*self.shape):
            yield self.decode(index)


@dataclass
class WaveFunction:
    spec: LatticeSpec
    amplitudes: np.ndarray
    t: int = 0

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.spec, self.amplitudes.copy(), self.t)

    def amplitude(self, coin: int, site: Iterable[int]) -> complex:
        return complex(self.amplitudes[self.spec.encode(site) + (coin,)])


@dataclass
class Distribution:
    spec: LatticeSpec
    values: np.ndarray = field(repr=False)

    def __getitem__(self, site) -> float:
        if np.isscalar(site):
            site = (site,)
        return float(self.values[self.spec.encode(site)])

    def total(self) -> float:
        return float(self.values.sum())


def coin_index(coin, dimension: int) -> int:
    """Flatten a coin label (``j`` or ``(j, k)``) to the storage index."""
    if dimension == 1:
        j = coin[0] if isinstance(coin, tuple) else coin
        if j not in (0, 1):
            raise ConfigError(f"coin index must be 0 or 1, got {coin}")
        return int(j)
    j, k = coin
    if j not in (0, 1) or k not in (0, 1):
        raise ConfigError(f"coin indices must be 0 or 1, got {coin}")
    return 2 * j + k


def empty_wavefunction(spec: LatticeSpec) -> WaveFunction:
    return WaveFunction(spec, np.zeros(spec.shape + (spec.ncoin,), dtype=np.complex128))


def allocate_wavefunction(spec: LatticeSpec, state) -> WaveFunction:
    """Place the entries of an initial ``StateSpec`` on a zeroed lattice."""
    wf = empty_wavefunction(spec)
    seen = set()
    for coin, site, amp in state.entries:
        if not spec.contains(site):
            raise ConfigError(f"initial state position {site} lies outside the lattice")
        c = coin_index(coin, spec.dimension)
        key = spec.encode(site) + (c,)
        if key in seen:
            raise ConfigError(f"duplicate initial amplitude for coin {coin} at {site}")
        seen.add(key)
        wf.amplitudes[key] = amp
    deviation = abs(norm_sq(wf) - 1.0)
    if deviation > NORM_TOL:
        raise ConfigError(
            f"initial state is not normalized: |norm^2 - 1| = {deviation:.3e}")
    return wf


def probability(wf: WaveFunction) -> Distribution:
    """Position distribution, tracing out the coin."""
    amps = wf.amplitudes
    # einsum over real/imag views avoids a full-size |psi|^2 temporary
    values = np.einsum("...c,...c->...", amps.real, amps.real)
    values += np.einsum("...c,...c->...", amps.imag, amps.imag)
    return Distribution(wf.spec, values)


def norm_sq(wf: WaveFunction) -> float:
    return float(np.vdot(wf.amplitudes, wf.amplitudes).real)


def uniform(spec: LatticeSpec) -> Distribution:
    return Distribution(spec, np.full(spec.shape, 1.0 / spec.nsites))
