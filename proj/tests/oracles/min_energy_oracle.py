"""Brute-force minimum energy per bit over the 200 x 200 log grid of (gamma, I~).

Default radio parameters; powers in mW, circuit power in W. Prints (d, minE, sinr at argmin).
"""
import numpy as np

C, ALPHA = 1e-4, 3.4
GMIN, GMAX = 1.0, 100.0
IMIN, IMAX = 10 ** -8.0, 10 ** -4.5
ETA_MIN, ETA_MAX = 10 ** 0.6, 1000.0
GC, GA = 1.25, 10.0

g = np.geomspace(GMIN, GMAX, 200)
i = np.geomspace(IMIN, IMAX, 200)
G, I = np.meshgrid(g, i, indexing="ij")
for d in (5.0, 10.0, 15.0, 20.0):
    eta = C * G * d ** -ALPHA / I
    ok = (eta >= ETA_MIN * (1 - 1e-12)) & (eta <= ETA_MAX * (1 + 1e-12))
    E = np.where(ok, (2 * GC + GA * G * 1e-3) / np.log2(1 + eta), np.inf)
    k = np.unravel_index(np.argmin(E), E.shape)
    print(f"  {{{d}, {float(E[k])!r}, {float(eta[k])!r}}},")
