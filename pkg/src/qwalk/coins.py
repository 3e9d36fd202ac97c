"""Coin operators and initial states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

COIN_KINDS = ("HADAMARD", "FOURIER", "GROVER", "CUSTOM")
UNITARY_TOL = 1e-9

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


@dataclass(frozen=True)
class CoinOperator:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        return isinstance(other, CoinOperator) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


@dataclass(frozen=True)
class StateSpec:
    """Nonzero amplitudes of an initial state.

    Each entry is ``(coin, site, amplitude)`` where ``coin`` and ``site`` are
    tuples of ints (one per coin bit / lattice axis).
    """

    entries: tuple

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for _, _, a in self.entries))


def _dim_for(dimension: int) -> int:
    if dimension not in (1, 2):
        raise ConfigError(f"dimension must be 1 or 2, got {dimension}")
    return 2 if dimension == 1 else 4


def hadamard(dimension: int) -> np.ndarray:
    return _H.copy() if dimension == 1 else np.kron(_H, _H)


def grover() -> np.ndarray:
    return np.full((4, 4), 0.5, dtype=np.complex128) - np.eye(4)


def fourier() -> np.ndarray:
    r, c = np.indices((4, 4))
    return (1j ** (r * c)).astype(np.complex128) / 2


def check_unitary(coin: CoinOperator | np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = coin.matrix if isinstance(coin, CoinOperator) else np.asarray(coin)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    deviation = np.abs(m.conj().T @ m - np.eye(m.shape[0]))
    return bool(deviation.max() <= tol)


def build_coin(kind: str, dimension: int, custom_entries=None) -> CoinOperator:
    """Named or custom coin for a ``dimension``-D walk.

    ``custom_entries`` is a flat sequence of ``dim**2`` complex numbers read
    row by row.
    """
    dim = _dim_for(dimension)
    if kind == "HADAMARD":
        return CoinOperator(hadamard(dimension))
    if kind in ("FOURIER", "GROVER"):
        if dimension == 1:
            raise ConfigError(f"coin {kind} is only available in two dimensions")
        return CoinOperator(fourier() if kind == "FOURIER" else grover())
    if kind != "CUSTOM":
        raise ConfigError(f"unknown coin {kind!r}; expected one of {', '.join(COIN_KINDS)}")
    if custom_entries is None:
        raise ConfigError("COIN CUSTOM requires a BEGINCOIN ... ENDCOIN section")
    entries = list(custom_entries)
    if len(entries) != dim * dim:
        raise ConfigError(
            f"custom coin needs {dim * dim} complex entries for a {dimension}D walk, "
            f"got {len(entries)}")
    m = np.array(entries, dtype=np.complex128).reshape(dim, dim)
    deviation = np.abs(m.conj().T @ m - np.eye(dim))
    if deviation.max() > UNITARY_TOL:
        r, c = np.unravel_index(np.argmax(deviation), deviation.shape)
        raise ConfigError(
            f"custom coin is not unitary: entry ({r},{c}) of C^dagger C deviates from "
            f"the identity by {deviation[r, c]:.3e}")
    return CoinOperator(m)


# Localized states that spread the walker symmetrically for each preset coin.
# Coefficients are over the coin basis 00, 01, 10, 11 (or 0, 1 in 1D).
# The Fourier state was found by numerical search: among the states whose
# distribution is mirror symmetric in x and y on the diagonal lattice it has
# the largest spread.
_W = np.exp(-0.25j * np.pi)
_PRESET_STATES = {
    (1, "HADAMARD"): np.array([1, 1j]) / np.sqrt(2),
    (2, "HADAMARD"): np.array([1, 1j, 1j, -1]) / 2,
    (2, "GROVER"): np.array([1, -1, -1, 1]) / 2,
    (2, "FOURIER"): np.array([1, _W, 1, -_W]) / 2,
}


def build_initial_state(kind: str, dimension: int, custom_entries=None) -> StateSpec:
    """Initial state for the given preset, or from ``custom_entries``.

    Custom entries are ``(coin, site, amplitude)`` triples with ``coin`` and
    ``site`` given as int tuples of length ``dimension``.
    """
    _dim_for(dimension)
    if kind == "CUSTOM":
        if custom_entries is None:
            raise ConfigError("STATE CUSTOM requires a BEGINSTATE ... ENDSTATE section")
        entries = []
        keys = set()
        for coin, site, amp in custom_entries:
            coin, site = tuple(coin), tuple(site)
            if len(coin) != dimension or len(site) != dimension:
                raise ConfigError(
                    f"state entry {coin} {site} needs {dimension} coin and {dimension} "
                    f"position integers")
            if (coin, site) in keys:
                raise ConfigError(f"duplicate state entry for coin {coin} at {site}")
            keys.add((coin, site))
            entries.append((coin, site, complex(amp)))
        state = StateSpec(tuple(entries))
    elif kind in COIN_KINDS:
        if dimension == 1 and kind in ("FOURIER", "GROVER"):
            raise ConfigError(f"state {kind} is only available in two dimensions")
        coeffs = _PRESET_STATES[(dimension, kind)]
        origin = (0,) * dimension
        if dimension == 1:
            coins = [(0,), (1,)]
        else:
            coins = [(0, 0), (0, 1), (1, 0), (1, 1)]
        state = StateSpec(tuple(
            (coin, origin, complex(a)) for coin, a in zip(coins, coeffs) if a != 0))
    else:
        raise ConfigError(f"unknown state {kind!r}; expected one of {', '.join(COIN_KINDS)}")
    deviation = abs(state.norm_sq() - 1.0)
    if deviation > UNITARY_TOL:
        raise ConfigError(f"initial state is not normalized: |norm^2 - 1| = {deviation:.3e}")
    return state
