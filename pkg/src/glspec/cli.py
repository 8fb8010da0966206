"""Command-line front end: generate point clouds, run named experiments,
select bandwidth quantiles, and dump spectra."""

import os

import click
import numpy as np

from .bandwidth import resample_threshold, save_selection_json, select_omega
from .datagen import (
    GeneratorConfig,
    gen_circle,
    gen_curve_m1,
    gen_klein_bottle,
    gen_spiked,
    load_cloud_csv,
    load_cloud_npz,
    save_cloud_csv,
    save_cloud_npz,
)
from .experiments import (
    EXPERIMENT_NAMES,
    ExperimentConfig,
    parse_config_file,
    run as run_experiment,
    zeroing_comparison,
)
from .kernels import (
    KernelParams,
    affinity,
    gram,
    laplacian,
    pairwise_sq_dists,
    transition,
    zeroed_transition,
)
from .spectrum import save_spectrum_csv, sym_eigs


def _load_cloud(path):
    if path.endswith(".npz"):
        return load_cloud_npz(path)
    return load_cloud_csv(path)


def _parse_floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


@click.group()
def main():
    """Kernel-affinity spectra for noisy high-dimensional point clouds."""


@main.command()
@click.option("--kind", type=click.Choice(["spiked", "circle", "m1", "kb"]),
              default="spiked", show_default=True)
@click.option("--n", type=int, required=True, help="Points.")
@click.option("--p", type=int, required=True, help="Ambient dimension.")
@click.option("--d", type=int, default=1, show_default=True,
              help="Signal dimension (spiked only).")
@click.option("--lam", default=None,
              help="Comma-separated signal strengths (spiked/circle).")
@click.option("--alpha", default=None,
              help="Comma-separated exponents; strengths are base**alpha.")
@click.option("--alpha-base", type=click.Choice(["n", "p"]), default="p",
              show_default=True)
@click.option("--scale", type=float, default=None,
              help="Manifold scale a (m1/kb); default 20*sqrt(p).")
@click.option("--rotate/--no-rotate", default=None,
              help="Random orthogonal map; default on for manifolds.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(),
              help="Output path (.csv or .npz).")
def gen(kind, n, p, d, lam, alpha, alpha_base, scale, rotate, seed, out):
    """Generate a point cloud and write it to disk."""
    if kind == "spiked":
        cfg = GeneratorConfig(
            n=n,
            p=p,
            d=d,
            lambdas=_parse_floats(lam) if lam else None,
            alphas=_parse_floats(alpha) if alpha else None,
            alpha_base=alpha_base,
            rotate=bool(rotate),
            seed=seed,
        )
        cloud = gen_spiked(cfg)
    elif kind == "circle":
        if lam is None and alpha is None:
            raise click.UsageError("circle needs --lam or --alpha")
        if lam is not None:
            strength = _parse_floats(lam)[0]
        else:
            base = n if alpha_base == "n" else p
            strength = float(base) ** _parse_floats(alpha)[0]
        cloud = gen_circle(n, p, strength, seed)
    else:
        a = scale if scale is not None else 20.0 * np.sqrt(p)
        maker = gen_curve_m1 if kind == "m1" else gen_klein_bottle
        kwargs = {} if rotate is None else {"rotate": rotate}
        cloud = maker(n, p, a, seed, **kwargs)
    if out.endswith(".npz"):
        save_cloud_npz(cloud, out)
    else:
        save_cloud_csv(cloud, out)
    click.echo("wrote %s cloud (n=%d, p=%d) to %s" % (cloud.kind, n, p, out))


@main.command(name="run")
@click.option("--experiment", "experiment",
              type=click.Choice(EXPERIMENT_NAMES + ("ZeroingComparison",)),
              default=None, help="Experiment name (or set it in the config).")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Flat key = value config file.")
@click.option("--out", default=None, type=click.Path(),
              help="Output directory (overrides the config).")
@click.option("--fast", is_flag=True, help="Reduced grids and repetitions.")
def run_cmd(experiment, config_path, out, fast):
    """Run a named experiment and write CSV + gnuplot artifacts."""
    zeroing = experiment == "ZeroingComparison"
    if config_path is not None:
        cfg = parse_config_file(
            config_path,
            default_name="PhaseSweep" if zeroing else experiment,
        )
        if experiment is not None and not zeroing:
            cfg = ExperimentConfig(**{**cfg.to_dict(), "name": experiment})
            cfg.c_grid = None if cfg.c_grid is None else tuple(cfg.c_grid)
            cfg.alpha_grid = (
                None if cfg.alpha_grid is None else tuple(cfg.alpha_grid)
            )
            cfg.seeds = tuple(cfg.seeds)
    else:
        if experiment is None:
            raise click.UsageError("give --experiment or --config")
        cfg = ExperimentConfig(name="PhaseSweep" if zeroing else experiment)
    if out is not None:
        cfg.output_dir = out
    if zeroing:
        manifest = zeroing_comparison(cfg, fast=fast)
    else:
        manifest = run_experiment(cfg, fast=fast)
    click.echo(
        "%s finished in %.1fs; %d artifacts in %s"
        % (
            manifest.experiment,
            manifest.wall_clock_s,
            len(manifest.files),
            cfg.output_dir,
        )
    )


@main.command()
@click.option("--cloud", "cloud_path", required=True,
              type=click.Path(exists=True), help="Cloud file from 'gen'.")
@click.option("--upsilon", type=float, default=0.5, show_default=True)
@click.option("--s", "threshold", type=float, default=None,
              help="Outlier-ratio threshold; resampled when omitted.")
@click.option("--grid", default="0.05,0.95,91", show_default=True,
              help="omega_L,omega_U,T.")
@click.option("--matrix", type=click.Choice(["affinity", "transition"]),
              default="affinity", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Resampling seed.")
@click.option("--out", default=None, type=click.Path(),
              help="Write the selection as JSON.")
def omega(cloud_path, upsilon, threshold, grid, matrix, seed, out):
    """Pick the bandwidth quantile that maximizes the outlier count."""
    cloud = _load_cloud(cloud_path)
    lo, hi, t = grid.split(",")
    grid = (float(lo), float(hi), int(t))
    if threshold is None:
        threshold = resample_threshold(
            cloud.n / float(cloud.p), cloud.n, upsilon, seed=seed
        )
        click.echo("resampled s = %.4f" % threshold)
    sel = select_omega(cloud, upsilon, threshold, grid=grid, matrix=matrix)
    click.echo(
        "omega = %.4f, h = %.6g (h/p = %.4g), outliers = %d"
        % (sel.omega, sel.h, sel.h / cloud.p, int(sel.k_per_omega.max()))
    )
    if out is not None:
        save_selection_json(sel, out)
        click.echo("selection written to %s" % out)


@main.command()
@click.option("--cloud", "cloud_path", required=True,
              type=click.Path(exists=True), help="Cloud file from 'gen'.")
@click.option("--matrix", "which",
              type=click.Choice(
                  ["affinity", "transition", "laplacian", "zeroed", "gram"]
              ),
              default="affinity", show_default=True)
@click.option("--upsilon", type=float, default=0.5, show_default=True)
@click.option("--h", "bandwidth", type=float, default=None,
              help="Bandwidth; default p.")
@click.option("--clean", is_flag=True, help="Use the clean rows instead.")
@click.option("--top", type=int, default=5, show_default=True,
              help="Eigenvalues to print.")
@click.option("--out", default=None, type=click.Path(),
              help="Write the full descending spectrum as CSV.")
def spectra(cloud_path, which, upsilon, bandwidth, clean, top, out):
    """Eigenvalues of a kernel matrix built from a stored cloud."""
    cloud = _load_cloud(cloud_path)
    X = cloud.clean if clean else cloud.noisy()
    h = bandwidth if bandwidth is not None else float(cloud.p)
    if which == "gram":
        M = gram(X)
    else:
        W = affinity(pairwise_sq_dists(X), KernelParams(upsilon, h))
        if which == "affinity":
            M = W
        elif which == "transition":
            M = transition(W)
        elif which == "laplacian":
            M = laplacian(W, h)
        else:
            M = zeroed_transition(W)
    if which in ("transition", "laplacian", "zeroed"):
        # row normalization breaks symmetry; the spectra are still real
        eigs = np.sort(np.linalg.eigvals(M).real)[::-1]
    else:
        eigs = sym_eigs(M).eigenvalues
    shown = ", ".join("%.6g" % v for v in eigs[: max(1, top)])
    click.echo("%s spectrum (n=%d): %s, ..." % (which, cloud.n, shown))
    if out is not None:
        save_spectrum_csv(eigs, out)
        click.echo("spectrum written to %s" % out)


if __name__ == "__main__":
    main()
