"""Link topologies: permanent geometry, random broken links and merging.

A topology stores one boolean array per link direction.  Entry ``s`` of the
array for direction ``e`` says whether the link between site ``s`` and site
``s + e`` is broken ("open").  Because every link is stored exactly once the
two-sided consistency constraint holds by construction.  Links leaving the
allocated lattice are never stored; the evolution treats them as broken, so
the edge of a finite lattice reflects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lattice import LatticeSpec

# Per lattice kind: (label, unit vector) in BLPROB order (direction 0, direction 1).
LINK_DIRECTIONS = {
    "LINE": (("x", (1,)),),
    "SEGMENT": (("x", (1,)),),
    "CYCLE": (("x", (1,)),),
    "DIAGONAL": (("secondary", (1, -1)), ("main", (1, 1))),
    "NATURAL": (("horizontal", (1, 0)), ("vertical", (0, 1))),
}


@dataclass(frozen=True)
class LinkTopology:
    spec: LatticeSpec
    broken: tuple  # one bool array per entry of LINK_DIRECTIONS[spec.kind]

    @property
    def directions(self):
        return LINK_DIRECTIONS[self.spec.kind]

    def n_broken(self) -> int:
        return int(sum(int(a.sum()) for a in self.broken))

    def link_open(self, site, step) -> bool:
        """Whether the link from ``site`` to ``site + step`` is broken.

        ``step`` must be plus or minus one of the lattice's link vectors.
        Links leaving a non-periodic lattice count as broken.
        """
        site, step = tuple(site), tuple(step)
        target = tuple(a + b for a, b in zip(site, step))
        if not (self.spec.contains(site) and self.spec.contains(target)):
            return True
        for arr, (_, e) in zip(self.broken, self.directions):
            if step == e:
                return bool(arr[self.spec.encode(site)])
            if step == tuple(-x for x in e):
                return bool(arr[self.spec.encode(target)])
        raise ValueError(f"{step} is not a link direction of a {self.spec.kind} lattice")

    def __eq__(self, other):
        return (isinstance(other, LinkTopology) and self.spec == other.spec
                and all(np.array_equal(a, b) for a, b in zip(self.broken, other.broken)))

    __hash__ = None


def _shifted(arr: np.ndarray, offset, fill: bool, periodic: bool) -> np.ndarray:
    """``out[s] = arr[s + offset]``, with ``fill`` where ``s + offset`` is off-lattice."""
    if periodic:
        return np.roll(arr, tuple(-o for o in offset), axis=tuple(range(arr.ndim)))
    out = np.full_like(arr, fill)
    dst, src = [], []
    for o, n in zip(offset, arr.shape):
        if o >= 0:
            dst.append(slice(0, n - o))
            src.append(slice(o, n))
        else:
            dst.append(slice(-o, n))
            src.append(slice(0, n + o))
    out[tuple(dst)] = arr[tuple(src)]
    return out


def _edge_mask(spec: LatticeSpec, e) -> np.ndarray:
    """True where ``s + e`` lies outside a non-periodic lattice."""
    inside = np.ones(spec.shape, dtype=bool)
    if spec.periodic:
        return ~inside
    return ~_shifted(inside, e, False, False)


def blocked(topology: LinkTopology, direction: int, sign: int) -> np.ndarray:
    """Mask of sites whose link in direction ``sign * e[direction]`` is broken."""
    spec = topology.spec
    arr = topology.broken[direction]
    e = topology.directions[direction][1]
    if sign > 0:
        return arr | _edge_mask(spec, e)
    return _shifted(arr, tuple(-x for x in e), True, spec.periodic)


def empty_topology(spec: LatticeSpec) -> LinkTopology:
    return LinkTopology(spec, tuple(np.zeros(spec.shape, dtype=bool)
                                    for _ in LINK_DIRECTIONS[spec.kind]))


def _freeze(spec, arrays) -> LinkTopology:
    for a in arrays:
        a.flags.writeable = False
    return LinkTopology(spec, tuple(arrays))


def segment_points(x0: int, y0: int, x1: int, y1: int):
    """Integer points on an axis-parallel or 45-degree segment, endpoints included."""
    dx, dy = x1 - x0, y1 - y0
    if dx != 0 and dy != 0 and abs(dx) != abs(dy):
        raise ConfigError(
            f"LINE {x0} {y0} {x1} {y1} is neither parallel to an axis nor at 45 degrees")
    n = max(abs(dx), abs(dy))
    sx, sy = int(np.sign(dx)), int(np.sign(dy))
    return [(x0 + i * sx, y0 + i * sy) for i in range(n + 1)]


def isolated_sites(geometry) -> list:
    """All sites named by a sequence of ``("LINE", x0, y0, x1, y1)`` / ``("POINT", x, y)``."""
    sites = []
    for cmd in geometry:
        if cmd[0] == "LINE":
            sites.extend(segment_points(*cmd[1:]))
        elif cmd[0] == "POINT":
            sites.append(tuple(cmd[1:]))
        else:
            raise ConfigError(f"unknown boundary command {cmd[0]!r}")
    return sites


def build_permanent_topology(geometry, spec: LatticeSpec) -> LinkTopology:
    """Break every link touching a site that lies on a LINE or is a POINT.

    Sites outside the allocated lattice are skipped: their links to the
    lattice already reflect.
    """
    arrays = [np.zeros(spec.shape, dtype=bool) for _ in LINK_DIRECTIONS[spec.kind]]
    for site in isolated_sites(geometry):
        if not spec.contains(site):
            continue
        for arr, (_, e) in zip(arrays, LINK_DIRECTIONS[spec.kind]):
            arr[spec.encode(site)] = True
            back = tuple(a - b for a, b in zip(site, e))
            if spec.contains(back):
                arr[spec.encode(back)] = True
    for arr, (_, e) in zip(arrays, LINK_DIRECTIONS[spec.kind]):
        arr[_edge_mask(spec, e)] = False
    return _freeze(spec, arrays)


def sample_random_links(probs, spec: LatticeSpec, rng: np.random.Generator) -> LinkTopology:
    """Independently break each link with the probability of its direction."""
    probs = np.atleast_1d(np.asarray(probs, dtype=float))
    directions = LINK_DIRECTIONS[spec.kind]
    if len(probs) != len(directions):
        raise ConfigError(
            f"{spec.kind} lattice needs {len(directions)} broken-link probabilities, "
            f"got {len(probs)}")
    if np.any((probs < 0) | (probs > 1)) or not np.all(np.isfinite(probs)):
        raise ConfigError(f"broken-link probabilities must lie in [0, 1], got {probs.tolist()}")
    arrays = []
    for p, (_, e) in zip(probs, directions):
        arr = rng.random(spec.shape) < p
        arr[_edge_mask(spec, e)] = False
        arrays.append(arr)
    return _freeze(spec, arrays)


def merge(permanent: LinkTopology, random: LinkTopology) -> LinkTopology:
    if permanent.spec != random.spec:
        raise ValueError("cannot merge topologies of different lattices")
    return _freeze(permanent.spec, [a | b for a, b in zip(permanent.broken, random.broken)])
