"""Double slit on the diagonal lattice, with and without a which-path detector.

Reads double_slit.in next to this script and prints the accumulated
probability along the screen at x = 60.
"""

from pathlib import Path

import numpy as np

from qwalk import parse, run_ensemble

HERE = Path(__file__).parent
text = (HERE / "double_slit.in").read_text()


def screen(extra=""):
    r = run_ensemble(parse(text.replace("END", f"{extra} END", 1)))
    ys = np.array([s[1] for s in r.screen.screen.sites])
    even = ys % 2 == 0   # odd sites are unreachable from the origin
    return ys[even], r.screen.accumulated[even]


ys, clean = screen()
_, watched = screen("DETECTORS 1 21 -7 EXPERIMENTS 10 SEED 5")

print("   y     no detector     detector at (21,-7)")
for y, a, b in zip(ys, clean, watched):
    if abs(y) <= 60 and y % 4 == 0:
        bar = "#" * int(4e4 * a)
        print(f"{y:4d}   {a:.3e}      {b:.3e}   {bar}")

print(f"y<0 / y>0 without detector: {clean[ys < 0].sum() / clean[ys > 0].sum():.4f}")
print(f"y<0 / y>0 with detector:    {watched[ys < 0].sum() / watched[ys > 0].sum():.4f}")
