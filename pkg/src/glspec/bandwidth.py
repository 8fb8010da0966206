"""Data-driven bandwidth selection.

The bandwidth is chosen among quantiles of the pairwise squared distances:
for each candidate quantile level omega on a grid, build the affinity at
the corresponding bandwidth, count the outlier eigenvalues separated from
the bulk by a relative gap s, and keep the omega maximizing that count.
The gap threshold s itself is calibrated by resampling pure-noise clouds.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .kernels import KernelParams, affinity, pairwise_sq_dists


def quantile_bandwidth(D2, omega, interpolate=False):
    """Order-statistic bandwidth: the ceil(omega * m)-th smallest of the
    m = n(n-1)/2 off-diagonal squared distances.

    With ``interpolate=True`` the linearly interpolated quantile is used
    instead of the lower order statistic.
    """
    if not 0.0 < omega <= 1.0:
        raise ValueError("need 0 < omega <= 1")
    D2 = np.asarray(D2, dtype=float)
    n = D2.shape[0]
    if D2.shape != (n, n) or n < 2:
        raise ValueError("need a square distance matrix with n >= 2")
    vals = D2[np.triu_indices(n, k=1)]
    if interpolate:
        h = float(np.quantile(vals, omega))
    else:
        vals = np.sort(vals)
        rank = math.ceil(omega * vals.size)
        h = float(vals[rank - 1])
    if h <= 0.0:
        raise ValueError("selected bandwidth is not positive")
    return h


def count_outliers(eigs, s, k_min=1):
    """Largest k with eigs[k-1]/eigs[k] >= 1 + s, scanning k_min <= k <= n-1.

    ``eigs`` is taken in descending order.  A gap from a positive value
    down to a nonpositive one counts as infinitely wide.  Returns 0 when
    no gap exceeds the threshold.
    """
    if s <= 0:
        raise ValueError("need s > 0")
    eigs = np.asarray(eigs, dtype=float)
    n = eigs.size
    if k_min < 1 or k_min > n - 1:
        raise ValueError("k_min out of range")
    best = 0
    for k in range(k_min, n):
        top, nxt = eigs[k - 1], eigs[k]
        if nxt <= 0.0 < top:
            ratio = np.inf
        elif nxt > 0.0:
            ratio = top / nxt
        else:
            continue
        if ratio >= 1.0 + s:
            best = k
    return best


def resample_threshold(c, n, upsilon, reps=50, quantile_level=0.99, seed=0):
    """Calibrate the relative-gap threshold s on pure-noise clouds.

    Draws ``reps`` standard Gaussian n x p clouds with p = round(n/c) and
    records, for each, the largest consecutive eigenvalue ratio
    lam_k/lam_{k+1} of the Gram matrix (1/p) X X^T over bulk indices
    k >= 2.  The window's lower end is edge-aware: with m = min(n, p) and
    gamma = m/max(n, p), the bottom of the nonzero spectrum is a soft edge
    at (1 - sqrt(gamma))^2 > 0 whenever the aspect is off-critical, and
    only the last two ratios (the extreme edge spacings and the rank
    boundary) are dropped; near the critical aspect the edge degenerates
    to zero, consecutive ratios diverge there, and the bottom tenth of the
    spectrum is masked instead.  Returns the ``quantile_level`` quantile
    of the per-rep maxima, minus one.

    ``upsilon`` is accepted for interface uniformity with the selection
    routines; the null calibration itself is kernel-free.
    """
    if reps < 1:
        raise ValueError("need reps >= 1")
    p = int(round(n / c))
    m = min(n, p)
    if m < 5 or n < 5:
        raise ValueError("bulk ratio window is empty")
    gamma = m / max(n, p)
    if (1.0 - math.sqrt(gamma)) ** 2 < 0.02:
        k_hi = int(0.9 * m)
    else:
        k_hi = m - 2
    rng = np.random.Generator(np.random.Philox(key=seed))
    ratios = np.empty(reps)
    for r in range(reps):
        X = rng.standard_normal((n, p))
        eigs = np.linalg.eigvalsh(X @ X.T / p)[::-1]
        seg = eigs[1 : k_hi + 1]
        ratios[r] = np.max(seg[:-1] / seg[1:])
    return float(np.quantile(ratios, quantile_level)) - 1.0


@dataclass
class OmegaSelection:
    """Outcome of the quantile-grid bandwidth search."""

    omega: float
    h: float
    k_per_omega: np.ndarray
    s: float
    grid: np.ndarray


def select_omega(cloud, upsilon, s, grid=None, matrix="affinity"):
    """Scan quantile levels omega_i = omega_L + (i/T)(omega_U - omega_L),
    i = 0..T, and return the largest omega maximizing the outlier count.

    ``grid`` is (omega_L, omega_U, T), default (0.05, 0.95, 91).  With
    ``matrix="transition"`` the outlier counts are taken from the
    row-stochastic normalization instead (same scan, eigenvalues of
    D^{-1/2} W D^{-1/2}, which shares the transition spectrum).
    """
    if grid is None:
        grid = (0.05, 0.95, 91)
    if matrix not in ("affinity", "transition"):
        raise ValueError("matrix must be 'affinity' or 'transition'")
    omega_lo, omega_hi, T = grid
    if not (0.0 < omega_lo <= omega_hi <= 1.0 and T >= 1):
        raise ValueError("bad grid")
    omegas = omega_lo + (np.arange(T + 1) / T) * (omega_hi - omega_lo)
    X = cloud.noisy()
    D2 = pairwise_sq_dists(X)
    counts = np.empty(T + 1, dtype=int)
    hs = np.empty(T + 1)
    for i, omega in enumerate(omegas):
        hs[i] = quantile_bandwidth(D2, omega)
        W = affinity(D2, KernelParams(upsilon, hs[i]))
        if matrix == "transition":
            root = np.sqrt(W.sum(axis=1))
            W = W / np.outer(root, root)
        eigs = np.linalg.eigvalsh(W)[::-1]
        counts[i] = count_outliers(eigs, s)
    best = int(np.flatnonzero(counts == counts.max())[-1])
    return OmegaSelection(
        float(omegas[best]), float(hs[best]), counts, float(s), omegas
    )


def save_selection_json(sel, path):
    payload = {
        "omega": sel.omega,
        "h": sel.h,
        "s": sel.s,
        "grid": [float(v) for v in sel.grid],
        "k_profile": [[float(o), int(k)] for o, k in zip(sel.grid, sel.k_per_omega)],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
