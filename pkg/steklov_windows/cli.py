"""Command-line interface for the Steklov window engine."""

from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import typer

from .config import RunConfig, describe_keys, get_config, parse_config
from .errors import ConfigError, SteklovError

KEYS_EPILOG = "Configuration keys and defaults:\n\n" + describe_keys()

app = typer.Typer(
    name="steklov",
    help="Optimal Sobolev trace constants with boundary windows on oscillating domains.",
    epilog=KEYS_EPILOG,
    no_args_is_help=True,
)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """ConfigError exits 2, any other engine error exits 1."""
    try:
        yield
    except ConfigError as e:
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(2) from e
    except SteklovError as e:
        typer.echo(f"❌ {type(e).__name__}: {e}", err=True)
        raise typer.Exit(1) from e


def _config_option():
    return typer.Option(None, "--config", "-c", help="JSON or TOML configuration file")


def _load(config_file: Path | None, **overrides) -> RunConfig:
    if overrides.get("k") is not None:
        overrides["k"] = list(overrides["k"]) or None
    if overrides.get("eps") is not None:
        overrides["eps"] = list(overrides["eps"]) or None
    return parse_config(config_file, overrides)


def _problem(run: RunConfig, k: int | None):
    """Mesh and surface measure of Ω (``k`` is None) or Ω_ε with ε = 1/k."""
    from .geometry import build_base_domain, build_perturbed_boundary, generate_mesh
    from .measures import surface_measure

    if k is None:
        domain = build_base_domain(run.domain, run.chart(), run.resolution)
        h = run.h
    else:
        if run.domain != "square":
            raise ConfigError("domain", "oscillating boundaries need the square domain")
        base = build_base_domain(run.domain, run.chart(), run.resolution)
        domain = build_perturbed_boundary(base, run.oscillation(), 1.0 / k)
        h = min(run.h, max(1.0 / (run.h_factor * k), run.h_min))
    mesh = generate_mesh(domain, h, run.h_far or None, run.grading)
    return mesh, surface_measure(mesh)


@app.command()
def weight(
    config_file: Path | None = _config_option(),
    profile: str | None = typer.Option(None, "--profile", help="Oscillation profile: sin2 or fourier"),
    phi_offset: float | None = typer.Option(None, "--phi-offset", help="Chart height Φ(0)"),
    phi_slope: float | None = typer.Option(None, "--phi-slope", help="Chart slope Φ'"),
    points: int = typer.Option(11, "--points", "-n", help="Number of x' grid points"),
):
    """Print the homogenized weight m on an x' grid of the chart."""
    from .geometry import build_base_domain
    from .transforms import homogenized_weights, weight_field

    with _exit_codes():
        run = _load(config_file, profile=profile, phi_offset=phi_offset, phi_slope=phi_slope)
        if points < 2:
            raise ConfigError("points", f"need at least 2, got {points}")
        chart = run.chart()
        osc = run.oscillation()
        x = np.linspace(0.0, 1.0, points)
        slopes = chart.derivative(x)
        m = homogenized_weights(slopes, osc)

        print(f"{'x':>10} {'phi_slope':>12} {'m':>18}")
        for xi, si, mi in zip(x, slopes, m):
            print(f"{xi:>10.4f} {si:>12.6f} {mi:>18.12f}")

        field = weight_field(build_base_domain("square", chart, run.resolution), osc)
        print(f"mu*(boundary) = {field.total_weighted_length:.12f}")


@app.command()
def solve(
    config_file: Path | None = _config_option(),
    domain: str | None = typer.Option(None, "--domain", help="square or disk"),
    h: float | None = typer.Option(None, "--h", help="Mesh size"),
    p: float | None = typer.Option(None, "--p", help="Exponent p >= 2"),
    alpha: float | None = typer.Option(None, "--alpha", help="Pin an initial arc of this fraction (default: none)"),
    k: int | None = typer.Option(None, "--k", help="Solve on Ω_ε with ε = 1/k instead of Ω"),
    a: float | None = typer.Option(None, "--a", help="Amplitude exponent"),
    output: Path | None = typer.Option(None, "--output", "-o", help="Eigenpair CSV (JSON summary written beside it)"),
    vtu: Path | None = typer.Option(None, "--vtu", help="Also write the eigenfunction as a VTU file"),
):
    """Compute one minimal trace eigenpair with a fixed window."""
    from .fem import solve_p2, solve_p_general, write_eigenpair
    from .geometry import write_vtu
    from .windows import initial_arc

    with _exit_codes():
        run = _load(config_file, domain=domain, h=h, p=p, a=a)
        mesh, measure = _problem(run, k)
        window = initial_arc(measure, alpha) if alpha is not None else None
        if run.p == 2.0:
            pair = solve_p2(mesh, window, measure, run.solver())
        else:
            pair = solve_p_general(mesh, window, measure, run.p, run.solver())

        print(f"✅ lambda = {pair.lam!r}")
        print(f"   nodes={mesh.n_nodes} iterations={pair.iterations} residual={pair.residual:.2e}")
        if output is not None:
            write_eigenpair(mesh, pair, output, alpha)
            print(f"📁 {output}")
        if vtu is not None:
            write_vtu(mesh, vtu, {"u": pair.u})
            print(f"📁 {vtu}")


@app.command()
def optimize(
    config_file: Path | None = _config_option(),
    domain: str | None = typer.Option(None, "--domain", help="square or disk"),
    h: float | None = typer.Option(None, "--h", help="Mesh size"),
    p: float | None = typer.Option(None, "--p", help="Exponent p >= 2"),
    alpha: float | None = typer.Option(None, "--alpha", help="Window fraction in (0, 1)"),
    k: int | None = typer.Option(None, "--k", help="Optimize on Ω_ε with ε = 1/k instead of Ω"),
    a: float | None = typer.Option(None, "--a", help="Amplitude exponent"),
    restarts: int | None = typer.Option(None, "--restarts", help="Rotated-arc restarts"),
    arc_scan: int | None = typer.Option(None, "--arc-scan", help="Contiguous arcs to scan before the first step"),
    output: Path | None = typer.Option(None, "--output", "-o", help="Window CSV (eigenpair written beside it)"),
    vtu: Path | None = typer.Option(None, "--vtu", help="Also write the eigenfunction as a VTU file"),
):
    """Find the optimal window of measure α|∂Ω| and its trace constant."""
    from .fem import write_eigenpair
    from .geometry import write_vtu
    from .windows import optimize_window, write_window

    with _exit_codes():
        run = _load(config_file, domain=domain, h=h, p=p, alpha=alpha, a=a, restarts=restarts, arc_scan=arc_scan)
        mesh, measure = _problem(run, k)
        window, pair, trace = optimize_window(
            mesh, run.alpha, run.p, measure, run.solver(), restarts=run.restarts, arc_scan=run.arc_scan
        )

        print(f"✅ lambda(alpha={run.alpha}) = {pair.lam!r}")
        print(f"   solves={trace.iterations} restarts={trace.restarts} fractional edges={window.n_fractional}")
        if output is not None:
            write_window(mesh, window, output, pair.lam, trace.iterations, trace.restarts)
            eigenpair = output.with_name(output.stem + "_eigenpair.csv")
            write_eigenpair(mesh, pair, eigenpair, run.alpha)
            print(f"📁 {output}")
            print(f"📁 {eigenpair}")
        if vtu is not None:
            write_vtu(mesh, vtu, {"u": pair.u})
            print(f"📁 {vtu}")


@app.command(epilog=KEYS_EPILOG)
def sweep(
    config_file: Path | None = _config_option(),
    regime: str | None = typer.Option(None, "--regime", help="subcritical, critical or supercritical"),
    a: float | None = typer.Option(None, "--a", help="Amplitude exponent"),
    alpha: float | None = typer.Option(None, "--alpha", help="Window fraction in (0, 1)"),
    p: float | None = typer.Option(None, "--p", help="Exponent p >= 2"),
    k: list[int] | None = typer.Option(None, "--k", help="Number of cells; repeat for several"),
    eps: list[float] | None = typer.Option(None, "--eps", help="Period 1/k; repeat for several"),
    profile: str | None = typer.Option(None, "--profile", help="Oscillation profile: sin2 or fourier"),
    restarts: int | None = typer.Option(None, "--restarts", help="Rotated-arc restarts"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (0 = STEKLOV_THREADS or one per CPU)"),
    seed: int | None = typer.Option(None, "--seed", help="Seed of the initial iterate"),
    verbosity: int | None = typer.Option(None, "--verbosity", help="0 silences progress"),
    output: Path | None = typer.Option(
        None, "--output", "-o", help="Report CSV (default: results/sweep_<regime>_a<a>.csv)"
    ),
):
    """Run an ε-sweep in one regime and write the report."""
    from .experiments import default_output, emit_measures, emit_report, run_sweep

    with _exit_codes():
        run = _load(
            config_file,
            regime=regime,
            a=a,
            alpha=alpha,
            p=p,
            k=k,
            eps=eps,
            profile=profile,
            restarts=restarts,
            threads=threads,
            seed=seed,
            verbosity=verbosity,
            output=output,
        )
        sweep_config = run.to_sweep()
        target = run.output
        if target is None:
            get_config().ensure_dirs()
            target = default_output(sweep_config, get_config().results_dir)
        result = run_sweep(sweep_config)
        path = emit_report(result, target)
        measures = emit_measures(result, path)
        if run.verbosity > 0:
            print(f"📁 {path}")
            print(f"📁 {measures}")
        if not result.ok_rows:
            typer.echo("❌ every row of the sweep failed", err=True)
            raise typer.Exit(1)


@app.command(name="check-transform")
def check_transform(
    output: Path | None = typer.Option(None, "--output", "-o", help="Also write the weak-* error table as CSV"),
):
    """Run the invariant suite of the perturbation map and the weight."""
    from .checks import run_checks, weakstar_rows
    from .transforms import write_weakstar_csv

    results = run_checks()
    if output is not None:
        with _exit_codes():
            print(f"📁 {write_weakstar_csv(weakstar_rows(), output)}")
    if not all(r.passed for r in results):
        raise typer.Exit(1)


@app.command()
def report(
    sidecar: Path = typer.Argument(..., help="Sweep CSV or its JSON sidecar"),
    output: Path | None = typer.Option(None, "--output", "-o", help="CSV to write (default: beside the sidecar)"),
):
    """Rebuild a sweep CSV from its JSON sidecar."""
    from .experiments import emit_report, load_sidecar

    with _exit_codes():
        result = load_sidecar(sidecar)
        path = emit_report(result, output or sidecar.with_suffix(".csv"))
        print(f"✅ {len(result.rows)} rows, reference {result.reference_kind or 'none'}")
        if result.fit is not None:
            print(f"🔧 slope {result.fit.slope:.4f} over {result.fit.n_rows} rows")
        print(f"📁 {path}")


if __name__ == "__main__":
    app()
