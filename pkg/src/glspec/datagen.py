"""Synthetic point clouds: the spiked Gaussian model and noisy manifolds.

Every generator is deterministic given (parameters, seed).  A single Philox
counter splits into three fixed substreams per seed: noise draws, the
standardized signal draws, and the random rotation.  Because noise and
standardized signal live on their own substreams, the same seed reuses one
noise realization across a whole grid of signal strengths.
"""

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

SPIKED = "spiked"
CIRCLE = "circle"
CURVE_M1 = "curve_m1"
KLEIN_BOTTLE = "klein_bottle"

KINDS = (SPIKED, CIRCLE, CURVE_M1, KLEIN_BOTTLE)

# Centered covariance spectrum of the M1 curve parametrization (unit scale),
# frozen from an adaptive quadrature of its second moments over one period.
M1_COV_EIGS = (4.111805200191003, 1.2132851412757304, 0.04452553286536444)

# Centered covariance spectrum of the Klein bottle parametrization (unit
# scale): diag(3/2, 3/2, 1, 1) by direct trigonometric moments, trace 5.
KB_COV_EIGS = (1.5, 1.5, 1.0, 1.0)


@dataclass
class PointCloud:
    """A noisy point cloud split into its clean and noise parts.

    The observed data is always ``clean + noise`` (see :meth:`noisy`); it is
    never stored redundantly.  ``lambdas`` holds the spectrum of the clean
    part's population covariance (the signal strengths), ``d`` its rank.
    Loaded clouds may carry ``lambdas=None`` when the source format has no
    strength metadata.
    """

    clean: np.ndarray
    noise: np.ndarray
    n: int
    p: int
    d: int
    lambdas: tuple
    seed: int
    kind: str

    def noisy(self):
        """Observed matrix x = z + y, one observation per row."""
        return self.clean + self.noise

    def lambda_total(self):
        """Total signal strength (trace of the clean covariance)."""
        if self.lambdas is None:
            raise ValueError("cloud carries no signal-strength metadata")
        return float(sum(self.lambdas))


@dataclass
class GeneratorConfig:
    """Parameters of the spiked generator.

    Signal strengths come either from ``lambdas`` directly or from exponents
    ``alphas`` via lambda_l = base**alpha_l, with ``alpha_base`` selecting
    the base ("p", the figure convention, or "n").
    """

    n: int
    p: int
    d: int = 1
    lambdas: tuple = None
    alphas: tuple = None
    alpha_base: str = "p"
    noise_dist: str = "gaussian"
    rotate: bool = False
    seed: int = 0

    def resolve_lambdas(self):
        if (self.lambdas is None) == (self.alphas is None):
            raise ValueError("specify exactly one of lambdas / alphas")
        if self.lambdas is not None:
            lams = tuple(float(l) for l in self.lambdas)
        else:
            if self.alpha_base == "p":
                base = self.p
            elif self.alpha_base == "n":
                base = self.n
            else:
                raise ValueError("alpha_base must be 'p' or 'n'")
            lams = tuple(float(base) ** float(a) for a in self.alphas)
        if len(lams) != self.d:
            raise ValueError("need one signal strength per signal dimension")
        if any(l < 0 for l in lams):
            raise ValueError("signal strengths must be nonnegative")
        return lams

    def validate(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if not (self.p >= self.d >= 1):
            raise ValueError("need p >= d >= 1")
        if self.noise_dist != "gaussian":
            raise ValueError("only standard Gaussian noise is implemented")


def _streams(seed):
    # Fixed substream layout: 0 = noise, 1 = standardized signal, 2 = rotation.
    root = np.random.Philox(key=int(seed))
    return (
        np.random.Generator(root),
        np.random.Generator(root.jumped(1)),
        np.random.Generator(root.jumped(2)),
    )


def _haar_orthogonal(rng, p):
    m = rng.standard_normal((p, p))
    q, r = np.linalg.qr(m)
    sign = np.sign(np.diag(r))
    sign[sign == 0] = 1.0
    return q * sign


def random_rotation(p, seed):
    """Haar-distributed orthogonal p x p matrix.

    Uses the rotation substream of ``seed``, so it reproduces exactly the
    rotation applied by the manifold generators called with the same seed.
    """
    if p < 1:
        raise ValueError("need p >= 1")
    _, _, rot = _streams(seed)
    return _haar_orthogonal(rot, p)


def gen_spiked(cfg):
    """Spiked model: x_i = z_i + y_i with cov(z) = diag(lambda_1..lambda_d, 0..)
    and standard Gaussian noise."""
    cfg.validate()
    lams = cfg.resolve_lambdas()
    noise_rng, signal_rng, rot_rng = _streams(cfg.seed)
    noise = noise_rng.standard_normal((cfg.n, cfg.p))
    xi = signal_rng.standard_normal((cfg.n, cfg.d))
    clean = np.zeros((cfg.n, cfg.p))
    clean[:, : cfg.d] = xi * np.sqrt(lams)
    if cfg.rotate:
        clean = clean @ _haar_orthogonal(rot_rng, cfg.p).T
    return PointCloud(clean, noise, cfg.n, cfg.p, cfg.d, lams, cfg.seed, SPIKED)


def gen_circle(n, p, lam, seed):
    """Circle of radius sqrt(lam) in the first two coordinates plus noise."""
    if p < 2:
        raise ValueError("need p >= 2 for the circle")
    if lam <= 0:
        raise ValueError("need lam > 0")
    noise_rng, signal_rng, _ = _streams(seed)
    noise = noise_rng.standard_normal((n, p))
    theta = signal_rng.uniform(0.0, TWO_PI, n)
    clean = np.zeros((n, p))
    clean[:, 0] = np.sqrt(lam) * np.cos(theta)
    clean[:, 1] = np.sqrt(lam) * np.sin(theta)
    # clean covariance is (lam/2) I on the circle plane
    return PointCloud(clean, noise, n, p, 2, (lam / 2.0, lam / 2.0), seed, CIRCLE)


def _m1_embedding(u):
    g = 1.0 - 0.8 * np.exp(-8.0 * np.cos(u) ** 2)
    out = np.empty((u.size, 3))
    out[:, 0] = 2.0 * np.cos(u)
    out[:, 1] = 3.0 * g * np.cos(u ** 2 / TWO_PI)
    out[:, 2] = g * np.sin(u)
    return out


def gen_curve_m1(n, p, a, seed, rotate=True):
    """Closed curve M1: a * R * Phi(u) with u uniform on (0, 2pi]."""
    if p < 3:
        raise ValueError("need p >= 3 for the M1 curve")
    if a <= 0:
        raise ValueError("need a > 0")
    noise_rng, signal_rng, rot_rng = _streams(seed)
    noise = noise_rng.standard_normal((n, p))
    u = signal_rng.uniform(0.0, TWO_PI, n)
    clean = np.zeros((n, p))
    clean[:, :3] = a * _m1_embedding(u)
    if rotate:
        clean = clean @ _haar_orthogonal(rot_rng, p).T
    lams = tuple(a * a * v for v in M1_COV_EIGS)
    return PointCloud(clean, noise, n, p, 3, lams, seed, CURVE_M1)


def gen_klein_bottle(n, p, a, seed, rotate=True):
    """Klein bottle sample: a * R * Psi(u1, u2) with u uniform on [0, 2pi]^2."""
    if p < 4:
        raise ValueError("need p >= 4 for the Klein bottle")
    if a <= 0:
        raise ValueError("need a > 0")
    noise_rng, signal_rng, rot_rng = _streams(seed)
    noise = noise_rng.standard_normal((n, p))
    u1 = signal_rng.uniform(0.0, TWO_PI, n)
    u2 = signal_rng.uniform(0.0, TWO_PI, n)
    clean = np.zeros((n, p))
    ring = 2.0 * np.cos(u1) + 1.0
    clean[:, 0] = ring * np.cos(u2)
    clean[:, 1] = ring * np.sin(u2)
    clean[:, 2] = 2.0 * np.sin(u1) * np.cos(u2 / 2.0)
    clean[:, 3] = 2.0 * np.sin(u1) * np.sin(u2 / 2.0)
    clean[:, :4] *= a
    if rotate:
        clean = clean @ _haar_orthogonal(rot_rng, p).T
    lams = tuple(a * a * v for v in KB_COV_EIGS)
    return PointCloud(clean, noise, n, p, 4, lams, seed, KLEIN_BOTTLE)


def save_cloud_csv(cloud, path):
    """Dump a cloud: header row `n,p,d,kind,seed`, a value row, then n clean
    rows and n noise rows of p values each."""
    with open(path, "w") as fh:
        fh.write("n,p,d,kind,seed\n")
        fh.write("%d,%d,%d,%s,%d\n" % (cloud.n, cloud.p, cloud.d, cloud.kind, cloud.seed))
        for block in (cloud.clean, cloud.noise):
            for row in block:
                fh.write(",".join("%.17g" % v for v in row))
                fh.write("\n")


def load_cloud_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "n,p,d,kind,seed":
            raise ValueError("not a cloud CSV: %r" % header)
        n_s, p_s, d_s, kind, seed_s = fh.readline().strip().split(",")
        n, p, d, seed = int(n_s), int(p_s), int(d_s), int(seed_s)
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (2 * n, p):
        raise ValueError("cloud CSV body has shape %s, expected %s" % (data.shape, (2 * n, p)))
    return PointCloud(data[:n], data[n:], n, p, d, None, seed, kind)


def save_cloud_npz(cloud, path):
    """Binary dump; unlike the CSV it keeps the signal-strength metadata."""
    np.savez(
        path,
        clean=cloud.clean,
        noise=cloud.noise,
        d=cloud.d,
        lambdas=np.asarray(cloud.lambdas, dtype=float),
        seed=cloud.seed,
        kind=cloud.kind,
    )


def load_cloud_npz(path):
    with np.load(path) as z:
        clean = z["clean"]
        noise = z["noise"]
        n, p = clean.shape
        return PointCloud(
            clean,
            noise,
            n,
            p,
            int(z["d"]),
            tuple(float(v) for v in z["lambdas"]),
            int(z["seed"]),
            str(z["kind"]),
        )
