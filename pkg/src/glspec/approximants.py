"""Theory-predicted matrices the kernel affinity W is compared against:
the second-order kernel expansion K_d, the clean-signal surrogates W_a1,
W~_a1, W_b1, W_a2, and the Mehler rank-one expansion of the clean affinity
matrix (exponential kernel, one signal coordinate)."""

from dataclasses import dataclass
from math import lgamma

import numpy as np

from .kernels import gram


@dataclass
class PhiVector:
    """Centered squared-norm profile phi_i = ||x_i||^2/p - (1 + sum_l lambda_l/p)."""

    phi: np.ndarray


def phi_vector(cloud, lambdas=None):
    if lambdas is None:
        lambdas = cloud.lambdas
    X = cloud.noisy()
    p = cloud.p
    center = 1.0 + sum(lambdas) / p
    return PhiVector(np.einsum("ij,ij->i", X, X) / p - center)


def kd_matrix(cloud, params, lambdas=None):
    """Second-order expansion of W around the typical squared distance.

    Built for the fixed bandwidth h = p (the regime where the expansion is
    stated); pass params accordingly.  With tau = 2(sum_l lambda_l/p + 1)
    and f = exp(-upsilon x):

        K = -2 f'(tau) G + varsigma I + f(tau) 11^T
            + f'(tau)(1 Phi^T + Phi 1^T)
            + (f''(tau)/2)[1 (Phi o Phi)^T + (Phi o Phi) 1^T + 2 Phi Phi^T
                           + (4/p^2)(sum_l (lambda_l+1)^2 + p) 11^T]

    where G = (1/p) X X^T and varsigma = f(0) + 2 f'(tau) - f(tau).
    """
    params.validate()
    if lambdas is None:
        lambdas = cloud.lambdas
    p = cloud.p
    if abs(params.h - p) > 1e-9 * p:
        raise ValueError("the expansion is defined at bandwidth h = p")
    ups = params.upsilon
    lam_sum = float(sum(lambdas))
    tau = 2.0 * (lam_sum / p + 1.0)
    f_tau = np.exp(-ups * tau)
    fp_tau = -ups * f_tau
    fpp_tau = ups * ups * f_tau
    varsigma = 1.0 + 2.0 * fp_tau - f_tau

    X = cloud.noisy()
    G = gram(X)
    phi = phi_vector(cloud, lambdas).phi
    n = cloud.n
    ones = np.ones(n)
    phi2 = phi * phi
    mom = sum((l + 1.0) ** 2 for l in lambdas) + p

    K = -2.0 * fp_tau * G
    K += varsigma * np.eye(n)
    K += f_tau * np.outer(ones, ones)
    K += fp_tau * (np.outer(ones, phi) + np.outer(phi, ones))
    K += 0.5 * fpp_tau * (
        np.outer(ones, phi2)
        + np.outer(phi2, ones)
        + 2.0 * np.outer(phi, phi)
        + (4.0 / p ** 2) * mom * np.outer(ones, ones)
    )
    return K


def w_a1(W1, upsilon):
    """Scaled clean affinity e^{-2 upsilon} W1 + (1 - e^{-2 upsilon}) I."""
    scale = np.exp(-2.0 * upsilon)
    out = scale * np.asarray(W1, dtype=float)
    out[np.diag_indices_from(out)] += 1.0 - scale
    return out


def w_tilde_a1(W1, Wc, upsilon):
    """W_a1 with the noise-signal cross factor folded in entrywise."""
    if np.shape(W1) != np.shape(Wc):
        raise ValueError("shape mismatch")
    return w_a1(W1, upsilon) * np.asarray(Wc, dtype=float)


def w_b1(W1, noise_gram, upsilon):
    """Clean affinity modulated by the noise Gram fluctuation."""
    if np.shape(W1) != np.shape(noise_gram):
        raise ValueError("shape mismatch")
    scale = 2.0 * upsilon * np.exp(-2.0 * upsilon)
    inner = scale * np.asarray(noise_gram, dtype=float)
    inner[np.diag_indices_from(inner)] += 2.0 * upsilon * np.exp(-4.0 * upsilon)
    return inner * np.asarray(W1, dtype=float)


def w_a2(W1_h, p, lam, upsilon):
    """Clean-affinity surrogate at the adaptive bandwidth h = lam + p."""
    h = lam + p
    scale = np.exp(-2.0 * p * upsilon / h)
    out = scale * np.asarray(W1_h, dtype=float)
    out[np.diag_indices_from(out)] += 1.0 - scale
    return out


# -- Mehler expansion ------------------------------------------------------


def scaled_hermite(m, x):
    """Monic-normalized Hermite value by the probabilist recurrence
    H~_{m+1}(x) = x H~_m(x) - m H~_{m-1}(x), H~_0 = 1, H~_1 = x."""
    if m < 0:
        raise ValueError("need m >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if m == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for k in range(1, m):
        prev, cur = cur, x * cur - k * prev
    return cur if cur.ndim else float(cur)


def mehler_t0(beta, upsilon):
    """Expansion ratio t0 in (0, 1) for signal-to-bandwidth ratio beta."""
    if beta <= 0:
        raise ValueError("need beta > 0")
    q = beta / upsilon
    return (-upsilon + np.sqrt(upsilon ** 2 + 16.0 * q * q)) / (4.0 * q)


@dataclass
class MehlerExpansion:
    """Rank-(M+1) expansion of the clean affinity in Hermite factors.

    ``terms[m]`` is the vector H_m = w o H~_m(z) with weights
    w_i = exp(((3 t0^2 - 2)/(2 (1 - t0^2))) z_i^2); the represented matrix
    is prefactor * sum_m (t0^m / m!) H_m H_m^T.
    """

    t0: float
    beta: float
    terms: list
    prefactor: float

    # standardized coordinates and weights, kept for the overflow-free
    # matrix assembly (orthonormalized recurrence, fixed summation order)
    _coords: np.ndarray = None
    _weights: np.ndarray = None

    def order(self):
        return len(self.terms) - 1

    def matrix(self, M=None):
        """Assemble the truncated matrix at order M (default: all terms).

        Accumulates G_m = t0^{m/2} (w o H~_m(z)/sqrt(m!)) via the
        orthonormalized recurrence, which is algebraically identical to the
        printed coefficients but never overflows.
        """
        if M is None:
            M = self.order()
        if not 0 <= M <= self.order():
            raise ValueError("M out of range")
        z = self._coords
        w = self._weights
        root_t = np.sqrt(self.t0)
        prev = np.ones_like(z)
        out = np.outer(w, w)  # m = 0 term: G_0 = w
        if M >= 1:
            cur = z * root_t
            g = w * cur
            out += np.outer(g, g)
            for m in range(1, M):
                # orthonormalized step, with t0^{1/2} folded into each order
                prev, cur = cur, (z * cur * root_t - np.sqrt(m) * self.t0 * prev) / np.sqrt(m + 1)
                g = w * cur
                out += np.outer(g, g)
        return self.prefactor * out


def mehler_truncation(clean_coords, beta, upsilon, M):
    """Expansion of the one-coordinate clean affinity into rank-one terms.

    ``clean_coords`` are the standardized signal coordinates z_i (unit
    variance); beta = lambda/h is the signal-to-bandwidth ratio.  The
    printed (t0, weight) pair reproduces exp(-upsilon beta (z_i - z_j)^2)
    exactly when upsilon = beta = 1 and is a leading-order surrogate
    nearby; callers test it at that point.
    """
    if M < 0:
        raise ValueError("need M >= 0")
    z = np.asarray(clean_coords, dtype=float)
    if z.ndim != 1:
        raise ValueError("expansion takes one signal coordinate (d = 1)")
    t0 = mehler_t0(beta, upsilon)
    g = (3.0 * t0 * t0 - 2.0) / (2.0 * (1.0 - t0 * t0))
    w = np.exp(g * z * z)
    terms = []
    prev = np.ones_like(z)
    cur = None
    for m in range(M + 1):
        if m == 0:
            val = prev
        elif m == 1:
            cur = z.copy()
            val = cur
        else:
            prev, cur = cur, z * cur - (m - 1) * prev
            val = cur
        terms.append(w * val)
    return MehlerExpansion(
        float(t0), float(beta), terms, float(np.sqrt(1.0 - t0 * t0)), z, w
    )


def mehler_coefficient(t0, m):
    """t0^m / m! evaluated in log space."""
    return np.exp(m * np.log(t0) - lgamma(m + 1))
