"""Mixing on cycles and in a closed box.

On an odd cycle the time-averaged distribution approaches uniform; on an even
cycle parity keeps it away.  The box run writes box.dat, box.sta and box.plt.
"""

from pathlib import Path

from qwalk import parse, run, write_bundle
from qwalk.output import bundle_from_result

for n in (10, 11):
    cfg = parse(f"BEGIN LATTYPE CYCLE STEPS 10000 LATTSIZE {n} MIXTIME 50000 END", 1)
    s = run(cfg).stats
    print(f"N={n:2d}  TVD to uniform {s.tvd_uniform[-1]:.2e}   "
          f"TVD to stationary {s.tvd_stationary[-1]:.2e}")

here = Path(__file__).parent
result = run(parse((here / "box.in").read_text()))
s = result.stats
for t in (10, 100, 500, 1000, 2000):
    print(f"box t={t:4d}  TVD to stationary {s.tvd_stationary[t - 1]:.3f}")
print("wrote", *write_bundle(bundle_from_result(result, here / "box")))
