"""Ballistic versus diffusive spreading of the Hadamard walk on a line.

A coherent walk spreads linearly in time.  Randomly breaking links with a
small probability each step slowly turns the spreading into sqrt(t).
"""

import numpy as np

from qwalk import parse, run, run_ensemble

T = 1000

coherent = run(parse(f"BEGIN STEPS {T} LATTYPE LINE END", 1))
noisy = run_ensemble(parse(f"BEGIN STEPS {T} LATTYPE LINE BLPROB 0.01 "
                           f"EXPERIMENTS 20 SEED 7 END", 1))

print("    t   sigma(coherent)   sigma(BLPROB 0.01)")
for t in (50, 100, 250, 500, 1000):
    print(f"{t:5d}   {coherent.stats.sigma[t - 1]:15.3f}   {noisy.stats.sigma[t - 1]:18.3f}")

# slope of log sigma against log t over the second half
half = slice(T // 2, T)
t = coherent.stats.t[half]
for name, s in [("coherent", coherent.stats.sigma), ("noisy", noisy.stats.sigma)]:
    slope = np.polyfit(np.log(t), np.log(s[half]), 1)[0]
    print(f"{name:9s} growth exponent {slope:.3f}")
