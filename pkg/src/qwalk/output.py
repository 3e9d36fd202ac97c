"""Result files (.dat, -wave.dat, -pb.dat, -screen.dat, .sta, .plt) and amplification.

Every file is plain text with line-feed newlines.  Probabilities are written
as ``%.15e``; 2D grids list ``x y P`` with a blank line after each x block,
the layout gnuplot's ``splot`` expects.
"""

from __future__ import annotations

import operator
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import QWalkError
from .lattice import Distribution, LatticeSpec

FMT = "%.15e"


@dataclass
class OutputBundle:
    base: str
    distribution: Distribution
    wavefunction: object
    stats: object
    stationary: Distribution | None = None
    screen: object | None = None


def bundle_from_result(result, base) -> OutputBundle:
    return OutputBundle(str(base), result.distribution, result.wavefunction, result.stats,
                        result.stationary, result.screen)


def _fmt(x: float) -> str:
    return FMT % x


def format_distribution(dist: Distribution) -> str:
    spec = dist.spec
    coords = spec.coordinates()
    lines = []
    if spec.dimension == 1:
        for x, p in zip(coords, dist.values):
            lines.append(f"{x} {_fmt(p)}")
    else:
        for i, x in enumerate(coords):
            row = dist.values[i]
            lines.extend(f"{x} {y} {_fmt(p)}" for y, p in zip(coords, row))
            lines.append("")
    return "\n".join(lines) + "\n"


def format_wave(wf) -> str:
    spec = wf.spec
    coords = spec.coordinates()
    amps = wf.amplitudes
    lines = []
    if spec.dimension == 1:
        for i, x in enumerate(coords):
            for j in range(2):
                a = amps[i, j]
                lines.append(f"{x} {j} {_fmt(a.real)} {_fmt(a.imag)}")
    else:
        for i, x in enumerate(coords):
            for k, y in enumerate(coords):
                for c in range(4):
                    a = amps[i, k, c]
                    lines.append(f"{x} {y} {c >> 1} {c & 1} {_fmt(a.real)} {_fmt(a.imag)}")
            lines.append("")
    return "\n".join(lines) + "\n"


def sta_columns(stats, dimension: int) -> list:
    axes = ["x"] if dimension == 1 else ["x", "y"]
    cols = ["t"] + [f"mean_{a}" for a in axes] + [f"var_{a}" for a in axes] + ["sigma"]
    if stats.tvd_stationary is not None:
        cols += ["tvd_stationary", "tvd_uniform"]
    return cols


def format_stats(stats, dimension: int) -> str:
    lines = ["# " + " ".join(sta_columns(stats, dimension))]
    for i, t in enumerate(stats.t):
        fields = [str(int(t))]
        fields += [_fmt(v) for v in stats.mean[i]]
        fields += [_fmt(v) for v in stats.variance[i]]
        fields.append(_fmt(stats.sigma[i]))
        if stats.tvd_stationary is not None:
            fields += [_fmt(stats.tvd_stationary[i]), _fmt(stats.tvd_uniform[i])]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def format_screen(screen) -> str:
    lines = ["# index x y accumulated final"]
    for n, ((x, y), acc, fin) in enumerate(
            zip(screen.screen.sites, screen.accumulated, screen.final)):
        lines.append(f"{n} {x} {y} {_fmt(acc)} {_fmt(fin)}")
    return "\n".join(lines) + "\n"


def _extent(dist: Distribution, pad: int = 1):
    """Coordinate range covering the nonzero part of ``dist`` on each axis."""
    coords = dist.spec.coordinates()
    ranges = []
    for axis in range(dist.values.ndim):
        other = tuple(a for a in range(dist.values.ndim) if a != axis)
        marginal = dist.values.sum(axis=other) if other else dist.values
        nz = np.flatnonzero(marginal > 0)
        if nz.size == 0:
            lo, hi = coords[0], coords[-1]
        else:
            lo = max(coords[0], coords[nz[0]] - pad)
            hi = min(coords[-1], coords[nz[-1]] + pad)
        if lo == hi:
            lo, hi = lo - 1, hi + 1
        ranges.append((int(lo), int(hi)))
    return ranges


def plot_script(bundle: OutputBundle, files: dict) -> str:
    """Gnuplot script for the files in ``files`` (key -> path)."""
    name = os.path.basename(bundle.base)
    dim = bundle.distribution.spec.dimension
    out = [
        "# gnuplot script",
        "set terminal postscript eps enhanced color",
        "unset key",
    ]

    def rel(key):
        return os.path.basename(files[key])

    if dim == 1:
        (x0, x1), = _extent(bundle.distribution)
        out += [f"set xrange [{x0}:{x1}]", 'set xlabel "x"', 'set ylabel "probability"',
                f'set output "{name}.eps"',
                f'plot "{rel("dat")}" using 1:2 with lines']
        if "pb" in files:
            (p0, p1), = _extent(bundle.stationary)
            out += [f"set xrange [{p0}:{p1}]", f'set output "{name}-pb.eps"',
                    f'plot "{rel("pb")}" using 1:2 with lines']
        return "\n".join(out) + "\n"

    (x0, x1), (y0, y1) = _extent(bundle.distribution)
    out += [
        f"set xrange [{x0}:{x1}]", f"set yrange [{y0}:{y1}]",
        'set xlabel "x"', 'set ylabel "y"',
        "set pm3d", "set hidden3d", "set ticslevel 0",
        f'set output "{name}-3d.eps"',
        f'splot "{rel("dat")}" using 1:2:3 with pm3d',
        "unset surface", "set view map", "set contour base", "set cntrparam levels 10",
        f'set output "{name}-2d.eps"',
        f'splot "{rel("dat")}" using 1:2:3 with lines',
        "set surface", "unset view", "unset contour", "set view 60,30",
    ]
    if "screen" in files:
        n = len(bundle.screen.screen.sites)
        out += [
            "unset pm3d", f"set xrange [0:{max(n - 1, 1)}]", "set autoscale y",
            'set xlabel "screen position"', 'set ylabel "probability"',
            f'set output "{name}-screen.eps"',
            f'plot "{rel("screen")}" using 1:4 with lines',
            "set pm3d",
        ]
    if "pb" in files:
        (p0, p1), (q0, q1) = _extent(bundle.stationary)
        out += [
            f"set xrange [{p0}:{p1}]", f"set yrange [{q0}:{q1}]", "set autoscale z",
            'set xlabel "x"', 'set ylabel "y"',
            f'set output "{name}-pb.eps"',
            f'splot "{rel("pb")}" using 1:2:3 with pm3d',
        ]
    return "\n".join(out) + "\n"


def bundle_files(bundle: OutputBundle) -> dict:
    base = bundle.base
    files = {"dat": f"{base}.dat", "wave": f"{base}-wave.dat", "sta": f"{base}.sta",
             "plt": f"{base}.plt"}
    if bundle.stationary is not None:
        files["pb"] = f"{base}-pb.dat"
    if bundle.screen is not None:
        files["screen"] = f"{base}-screen.dat"
    return files


def _atomic_write_all(contents: dict):
    """Write every file to a temporary name first, then rename them all."""
    staged = []
    try:
        for path, text in contents.items():
            directory = os.path.dirname(os.path.abspath(path))
            try:
                fd, tmp = tempfile.mkstemp(prefix=".qwalk-", dir=directory)
            except OSError as exc:
                raise QWalkError(f"cannot write {path}: {exc.strerror}") from None
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
        staged = []
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def write_bundle(bundle: OutputBundle, base=None) -> list:
    """Write every file the bundle implies; return their paths."""
    if base is not None:
        bundle.base = str(base)
    files = bundle_files(bundle)
    dim = bundle.distribution.spec.dimension
    contents = {
        files["dat"]: format_distribution(bundle.distribution),
        files["wave"]: format_wave(bundle.wavefunction),
        files["sta"]: format_stats(bundle.stats, dim),
    }
    if "pb" in files:
        contents[files["pb"]] = format_distribution(bundle.stationary)
    if "screen" in files:
        contents[files["screen"]] = format_screen(bundle.screen)
    contents[files["plt"]] = plot_script(bundle, files)
    _atomic_write_all(contents)
    return list(contents)


def read_dat(path, spec: LatticeSpec | None = None):
    """Read a .dat file back.

    Returns a Distribution when ``spec`` is given, else a list of
    ``(coords, value)`` records.
    """
    records = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                coords = tuple(int(p) for p in parts[:-1])
                value = float(parts[-1])
            except ValueError:
                raise QWalkError(f"{path}:{lineno}: malformed record {line.strip()!r}") from None
            records.append((coords, value))
    if spec is None:
        return records
    values = np.zeros(spec.shape)
    for coords, value in records:
        values[spec.encode(coords)] = value
    return Distribution(spec, values)


_COMPARATORS = {">=": operator.ge, "<=": operator.le, ">": operator.gt, "<": operator.lt,
                "==": operator.eq, "=": operator.eq}
_CONDITION = re.compile(r"^\s*([xy])\s*(>=|<=|==|=|>|<)\s*(-?\d+(?:\.\d*)?)\s*$")


def parse_region(conditions) -> list:
    """Parse conditions like ``"x>=20"`` into ``(axis, comparator, threshold)`` triples."""
    region = []
    for cond in conditions:
        m = _CONDITION.match(cond)
        if not m:
            raise QWalkError(f"bad region condition {cond!r}; expected e.g. 'x>=20'")
        axis, op, value = m.groups()
        region.append(("xy".index(axis), _COMPARATORS[op], float(value)))
    return region


def amplify(dat_path, region, factor: float, backup_suffix: str = ".bak") -> str:
    """Multiply probabilities inside ``region`` by ``factor`` in place.

    ``region`` is a list of ``(axis, comparator, threshold)`` triples (or
    condition strings such as ``"x>=20"``), all of which must hold.  The
    original file is first copied to ``dat_path + backup_suffix``; an existing
    backup is never overwritten.  Returns the backup path.
    """
    if not factor > 0:
        raise QWalkError(f"amplification factor must be positive, got {factor}")
    region = parse_region([r for r in region if isinstance(r, str)]) + \
        [r for r in region if not isinstance(r, str)]
    path = Path(dat_path)
    backup = Path(str(path) + backup_suffix)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise QWalkError(f"cannot read {path}: {exc.strerror}") from None
    if backup.exists():
        raise QWalkError(f"backup {backup} already exists; refusing to overwrite it")
    out = []
    for lineno, line in enumerate(text.split("\n"), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            out.append(line)
            continue
        try:
            coords = [int(p) for p in parts[:-1]]
            value = float(parts[-1])
        except ValueError:
            raise QWalkError(f"{path}:{lineno}: malformed record {line.strip()!r}") from None
        if not coords:
            raise QWalkError(f"{path}:{lineno}: record has no coordinates")
        for axis, _, _ in region:
            if axis >= len(coords):
                raise QWalkError(f"{path}:{lineno}: region uses y but the file is 1D")
        if all(cmp(coords[axis], thr) for axis, cmp, thr in region):
            out.append(" ".join(parts[:-1] + [_fmt(value * factor)]))
        else:
            out.append(line)
    _atomic_write_all({str(backup): text})
    _atomic_write_all({str(path): "\n".join(out)})
    return str(backup)
