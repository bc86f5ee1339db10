import functools
import logging
from fractions import Fraction
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from .config import BRANCH_CHOICES, RunConfig, load_config_file
from .core.classical import (
    ClassicalState,
    branch_crossings,
    detect_period,
    emden_to_canonical,
    integrate_emden,
    integrate_hamiltonian,
    natural_period,
)
from .core.eigensolver import (
    Grid,
    SolverConfig,
    default_domain,
    eigenfunction,
    linear_fit,
    solve_branches,
    solve_levels,
    spacing_deviation,
)
from .core.errors import (
    ConfigurationError,
    ConsistencyError,
    ConvergenceError,
    DetectionError,
    DomainError,
    IntegrationAbort,
)
from .core.export import to_json, write_output
from .core.model import Branch, potential_table
from .core.perturbation import corrected_energies, perturbation_table
from .core.polyalgebra import (
    DEFAULT_SAMPLES,
    Polynomial,
    affine_obstruction,
    chiellini_check,
    isochronous_g,
    uniqueness_scan,
)
from .core.quantize import QuantizeConfig, quantize_pcf
from .core.reproduce import TABLE_IDS, reproduce_table
from .logs import setup_logging

try:
    import polars as pl
except ImportError:
    pl = None

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_DEVIATION = 4

FORMAT_CHOICE = click.Choice(["json", "csv"])


class CommandError(click.ClickException):
    """A failure reported on stderr with a specific exit code."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def reports_errors(func):
    """Translate package errors into exit codes 2 (bad input) and 3 (numerical failure)."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (DomainError, ConfigurationError) as e:
            raise CommandError(str(e), EXIT_USAGE) from e
        except (ConvergenceError, IntegrationAbort, DetectionError, ConsistencyError) as e:
            logger.error("%s: %s", type(e).__name__, e)
            raise CommandError(str(e), EXIT_NUMERICAL) from e

    return wrapper


def _number_list(text: str) -> list[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from e
    if not values:
        raise click.BadParameter("expected at least one number")
    return values


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise click.BadParameter(f"expected a rational number like 100 or 2/9, got {text!r}") from e


def _symbols(assignments: tuple[str, ...]) -> dict[str, Fraction]:
    symbols = {}
    for assignment in assignments:
        name, sep, value = assignment.partition("=")
        if not sep or not name.strip():
            raise click.BadParameter(f"expected NAME=VALUE, got {assignment!r}")
        symbols[name.strip()] = _fraction(value.strip())
    return symbols


def _emit(payload, frame, out: Path | None, fmt: str, table: Table | None) -> None:
    """Write to --out, to stdout for "-", or print the rich table."""
    if out is None:
        if table is not None:
            Console().print(table)
        else:
            click.echo(to_json(payload), nl=False)
    elif str(out) == "-":
        if fmt == "csv":
            if frame is None:
                raise ConfigurationError("this result has no tabular form; use --format json")
            click.echo(frame.write_csv(), nl=False)
        else:
            click.echo(to_json(payload), nl=False)
    else:
        write_output(payload, out, fmt, frame)


def model_options(func):
    """Shared physical-parameter flags."""
    func = click.option(
        "--eps",
        type=click.FloatRange(min=0.0),
        default=0.25,
        show_default=True,
        help="Ordering parameter epsilon = 4*alpha*gamma [dimensionless].",
    )(func)
    func = click.option(
        "--k",
        type=click.FloatRange(min=0.0),
        default=1.0,
        show_default=True,
        help="Anharmonicity k [1/(length*time)].",
    )(func)
    func = click.option(
        "--omega",
        type=click.FloatRange(min=0.0, min_open=True),
        default=10.0,
        show_default=True,
        help="Angular frequency omega [1/time].",
    )(func)
    return func


def output_options(default_format: str = "json"):
    def decorate(func):
        func = click.option(
            "--format",
            "fmt",
            type=FORMAT_CHOICE,
            default=default_format,
            show_default=True,
            help="Output file format.",
        )(func)
        func = click.option(
            "--out",
            type=click.Path(dir_okay=False, path_type=Path),
            default=None,
            help="Output file ('-' for stdout); a table is printed when omitted.",
        )(func)
        return func

    return decorate


@click.group()
@click.version_option(package_name="branched-spectra")
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="JSON file of option defaults keyed by subcommand; flags take precedence.",
)
@click.option("--verbose", "-v", is_flag=True, help="Log progress to stderr.")
@click.option(
    "--log-file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Append a DEBUG log to this file.",
)
@click.pass_context
def main(ctx: click.Context, config_file: Path | None, verbose: bool, log_file: Path | None):
    """Branched - quasi-harmonic spectra of the branched Emden Hamiltonians."""
    setup_logging(verbose=verbose, log_file=log_file)
    if config_file is not None:
        try:
            ctx.default_map = load_config_file(config_file)
        except ConfigurationError as e:
            raise CommandError(str(e), EXIT_USAGE) from e
        logger.info("Loaded option defaults from %s", config_file)


@main.command()
@model_options
@click.option("--branch", type=click.Choice(BRANCH_CHOICES), default="plus", show_default=True)
@click.option(
    "--levels", type=click.IntRange(1, 20), default=6, show_default=True, help="Number of levels."
)
@click.option(
    "--grid-n",
    type=click.IntRange(min=500),
    default=4000,
    show_default=True,
    help="Grid intervals on (0, xi_max].",
)
@click.option(
    "--xi-max",
    type=click.FloatRange(min=0.0, min_open=True),
    default=None,
    help="Outer Dirichlet wall [length]; sized from the levels when omitted.",
)
@click.option(
    "--richardson/--no-richardson",
    default=True,
    show_default=True,
    help="Extrapolate in h^2 from a second solve on a doubled grid.",
)
@output_options()
@reports_errors
def spectrum(omega, k, eps, branch, levels, grid_n, xi_max, richardson, out, fmt):
    """Finite-difference eigenvalues E_n of the branched half-line problems."""
    run = RunConfig(
        command="spectrum",
        omega=omega,
        k=k,
        epsilon=eps,
        branch=branch,
        levels=levels,
        solver=SolverConfig(n_points=grid_n, richardson=richardson),
        out=out,
        format=fmt,
    )
    base = run.params_for(Branch.PLUS)
    grid = (
        Grid(xi_max, grid_n) if xi_max is not None else default_domain(base, levels, run.solver)
    )
    spectra = _solve(run, grid)

    payload = {"spectra": [s.to_dict() for s in spectra]}
    for s in spectra:
        if s.n_levels >= 2:
            fit = linear_fit(s)
            logger.info(
                "%s: slope %.6f, delta %.6f, max spacing deviation %.3e",
                s.params.branch.value,
                fit.slope,
                fit.delta,
                spacing_deviation(s),
            )
    frame = None
    if pl is not None:
        frame = pl.concat(
            [
                s.to_frame().with_columns(pl.lit(s.params.branch.value).alias("branch"))
                for s in spectra
            ]
        ).select(["branch", "n", "energy", "est_error"])

    table = Table(title=f"E_n (omega={omega:g}, k={k:g}, eps={eps:g}, xi_max={grid.xi_max:.4g})")
    table.add_column("n", justify="right")
    for s in spectra:
        table.add_column(f"E ({s.params.branch.value})", justify="right")
        table.add_column("est. error", justify="right")
    for n in range(levels):
        row = [str(n)]
        for s in spectra:
            row += [f"{s.energies[n]:.8f}", f"{s.est_error[n]:.1e}"]
        table.add_row(*row)
    _emit(payload, frame, out, fmt, table)


def _solve(run: RunConfig, grid: Grid):
    """One spectrum per requested branch, concurrently for both."""
    if len(run.branches) == 1:
        return [
            solve_levels(
                run.params_for(run.branches[0]), grid, run.levels, run.solver.richardson, run.solver
            )
        ]
    solved = solve_branches(run.params_for(Branch.PLUS), run.levels, grid, run.solver)
    return [solved[Branch.PLUS], solved[Branch.MINUS]]


@main.command()
@model_options
@click.option("--branch", type=click.Choice(BRANCH_CHOICES), default="plus", show_default=True)
@click.option("--levels", type=click.IntRange(1, 20), default=6, show_default=True)
@click.option(
    "--mu-step",
    type=click.FloatRange(min=0.0, max=1.0, min_open=True),
    default=0.25,
    show_default=True,
    help="Bracketing scan step in the order mu.",
)
@output_options()
@reports_errors
def quantize(omega, k, eps, branch, levels, mu_step, out, fmt):
    """Energies from the zeros of D_mu(-+sqrt(omega/4) xi0) (epsilon = 1/4 only)."""
    run = RunConfig(
        command="quantize", omega=omega, k=k, epsilon=eps, branch=branch, levels=levels,
        out=out, format=fmt,
    )
    config = QuantizeConfig(mu_step=mu_step)
    results = {b.value: quantize_pcf(run.params_for(b), levels, config) for b in run.branches}

    payload = {
        "params": run.params_for(run.branches[0]).to_dict(),
        "roots": {name: [r.to_dict() for r in roots] for name, roots in results.items()},
    }
    frame = None
    if pl is not None:
        frame = pl.DataFrame(
            {
                "branch": [name for name, roots in results.items() for _ in roots],
                "n": [r.n for roots in results.values() for r in roots],
                "mu": [r.mu for roots in results.values() for r in roots],
                "energy": [r.energy for roots in results.values() for r in roots],
                "residual": [r.residual for roots in results.values() for r in roots],
            }
        )
    table = Table(title=f"D_mu roots (omega={omega:g}, k={k:g})")
    for column in ("branch", "n", "mu", "E", "|D_mu|"):
        table.add_column(column, justify="right")
    for name, roots in results.items():
        for r in roots:
            table.add_row(name, str(r.n), f"{r.mu:.10f}", f"{r.energy:.8f}", f"{r.residual:.1e}")
    _emit(payload, frame, out, fmt, table)


@main.command()
@model_options
@click.option("--levels", type=click.IntRange(1, 60), default=6, show_default=True)
@output_options()
@reports_errors
def perturb(omega, k, eps, levels, out, fmt):
    """First-order energies omega(2n + sqrt(eps) + 1) -+ sqrt(k/24) <xi>_n for both branches."""
    run = RunConfig(
        command="perturb", omega=omega, k=k, epsilon=eps, branch="both", levels=levels,
        out=out, format=fmt,
    )
    results = [corrected_energies(run.params_for(b), levels) for b in run.branches]
    payload = {
        "params": run.params_for(Branch.PLUS).to_dict(),
        "levels": [r.to_dict() for branch_results in results for r in branch_results],
    }
    frame = perturbation_table(run.params_for(Branch.PLUS), levels) if pl is not None else None

    table = Table(title=f"First-order energies (omega={omega:g}, k={k:g}, eps={eps:g})")
    for column in ("n", "E0", "delta+", "E+", "E-", "valid"):
        table.add_column(column, justify="right")
    for plus, minus in zip(*results):
        table.add_row(
            str(plus.n),
            f"{plus.e0:.6f}",
            f"{plus.delta:.6f}",
            f"{plus.e1:.3f}",
            f"{minus.e1:.3f}",
            "yes" if plus.valid else "no",
        )
    _emit(payload, frame, out, fmt, table)


@main.command()
@click.option("--omega", type=click.FloatRange(min=0.0, min_open=True), default=10.0,
              show_default=True, help="Angular frequency omega [1/time].")
@click.option("--k", type=click.FloatRange(min=0.0), default=1.0, show_default=True,
              help="Anharmonicity k [1/(length*time)].")
@click.option("--amplitudes", default="0.1,1,5", show_default=True,
              help="Comma-separated initial positions x0 [length] (v0 = 0).")
@click.option("--periods", type=click.IntRange(2, 1000), default=3, show_default=True,
              help="Integration length in units of 2*pi/omega.")
@click.option("--dt", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="RK4 step [time]; defaults to T/2000.")
@click.option("--hamiltonian/--no-hamiltonian", default=True, show_default=True,
              help="Also evolve the branched Hamiltonian over one period and compare.")
@click.option("--trajectory", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write the t,x,v samples of the first amplitude to this CSV file.")
@output_options()
@reports_errors
def classical(omega, k, amplitudes, periods, dt, hamiltonian, trajectory, out, fmt):
    """Integrate the modified Emden equation and measure its period for several amplitudes."""
    run = RunConfig(
        command="classical", omega=omega, k=k, out=out, format=fmt,
        extra={"amplitudes": _number_list(amplitudes)},
    )
    params = run.params_for(Branch.PLUS)
    period = natural_period(omega)
    rows = []
    for index, x0 in enumerate(run.extra["amplitudes"]):
        path = integrate_emden(x0, 0.0, params, periods * period, dt)
        measured = detect_period(path)
        row = {
            "amplitude": x0,
            "period": measured,
            "relative_error": abs(measured - period) / period,
            "branch_crossings": branch_crossings(path, params) if k > 0 else None,
        }
        if hamiltonian and k > 0:
            state = emden_to_canonical(ClassicalState(x0, 0.0), params)
            flow = integrate_hamiltonian(state, params, period, dt)
            one_period = integrate_emden(x0, 0.0, params, period, dt)
            row["branch"] = state.branch.value
            row["energy_drift"] = flow.relative_drift
            row["max_position_gap"] = float(abs(flow.x - one_period.x).max())
        rows.append(row)
        if index == 0 and trajectory is not None:
            path.to_frame().write_csv(trajectory)
    if hamiltonian and k == 0:
        logger.warning("the branched Hamiltonians are singular at k = 0; comparison skipped")

    payload = {"omega": omega, "k": k, "expected_period": period, "runs": rows}
    frame = None
    if pl is not None:
        frame = pl.DataFrame(
            {
                "amplitude": [r["amplitude"] for r in rows],
                "period": [r["period"] for r in rows],
                "relative_error": [r["relative_error"] for r in rows],
            }
        )
    table = Table(title=f"Periods (omega={omega:g}, k={k:g}, 2*pi/omega={period:.7f})")
    for column in ("x0", "T", "rel. error", "H drift", "max |x_H - x|"):
        table.add_column(column, justify="right")
    for r in rows:
        table.add_row(
            f"{r['amplitude']:g}",
            f"{r['period']:.7f}",
            f"{r['relative_error']:.1e}",
            f"{r['energy_drift']:.1e}" if "energy_drift" in r else "-",
            f"{r['max_position_gap']:.1e}" if "max_position_gap" in r else "-",
        )
    _emit(payload, frame, out, fmt, table)


@main.command()
@click.argument("poly")
@click.option("--omega-sq", default="1", show_default=True,
              help="omega^2 as an exact rational, e.g. 100 or 1/4 [1/time^2].")
@click.option("--g", "g_text", default=None,
              help="Check this g instead of the isochronous g built from f.")
@click.option("--set", "assignments", multiple=True,
              help="Substitute a named coefficient, e.g. --set k=1 (repeatable).")
@output_options()
@reports_errors
def polycheck(poly, omega_sq, g_text, assignments, out, fmt):
    """Chiellini check of x'' + f(x) x' + g(x) = 0 for a polynomial f, e.g. "k*x"."""
    symbols = _symbols(assignments)
    f = Polynomial.parse(poly, symbols)
    g = Polynomial.parse(g_text, symbols) if g_text else isochronous_g(f, _fraction(omega_sq))
    report = chiellini_check(f, g)

    if report.compatible:
        verdict = f"compatible, L = {report.chiellini_constant}"
        if report.roots is not None and report.roots.reason:
            verdict += f" (excluded: {report.roots.reason})"
    else:
        verdict = "incompatible"
    payload = {
        "f": str(f),
        "g": str(g),
        "compatible": report.compatible,
        "chiellini_constant": report.chiellini_constant,
        "l_roots": list(report.roots.roots) if report.roots else None,
        "excluded": report.roots.reason if report.roots else None,
        "least_squares_constant": report.least_squares_constant,
        "residual": str(report.residual),
        "verdict": verdict,
    }
    if out is None:
        click.echo(f"f(x) = {f}")
        click.echo(f"g(x) = {g}")
        if not report.compatible:
            click.echo(f"residual at L* = {report.least_squares_constant}: {report.residual}")
        click.echo(verdict)
        return
    _emit(payload, None, out, fmt, None)


@main.command()
@click.option("--max-degree", type=click.IntRange(0, 6), default=3, show_default=True)
@click.option("--samples", default=",".join(str(s) for s in DEFAULT_SAMPLES), show_default=True,
              help="Comma-separated rational values for every coefficient.")
@click.option("--omega-sq", default="1", show_default=True, help="omega^2 as an exact rational.")
@click.option("--affine-b", default="-2,-1,0,1,2", show_default=True,
              help="b values for the symbolic check of f = kx + b.")
@output_options()
@reports_errors
def scan(max_degree, samples, omega_sq, affine_b, out, fmt):
    """Search polynomial f up to a degree for Chiellini-compatible isochronous systems."""
    sample_values = [_fraction(s.strip()) for s in samples.split(",") if s.strip()]
    omega_sq_value = _fraction(omega_sq)
    report = uniqueness_scan(max_degree, sample_values, omega_sq=omega_sq_value)
    affine = affine_obstruction(
        omega_sq_value,
        [v for v in sample_values if v != 0] or [1],
        [_fraction(s.strip()) for s in affine_b.split(",") if s.strip()],
    )
    payload = {
        "max_degree": max_degree,
        "tested": report.tested,
        "compatible": [str(p) for p in report.compatible],
        "excluded": [str(p) for p in report.excluded],
        "only_linear": report.only_linear,
        "affine_identity_holds": affine.identity_holds,
        "affine_certified": affine.certified,
        "affine_real_roots": list(affine.real_roots),
    }
    if out is None:
        click.echo(f"tested {report.tested} polynomials up to degree {max_degree}")
        click.echo("compatible: " + (", ".join(str(p) for p in report.compatible) or "none"))
        click.echo(
            "excluded (complex or degenerate l): "
            + (", ".join(str(p) for p in report.excluded) or "none")
        )
        click.echo(
            f"affine obstruction b(b^2/36 + omega^2): "
            f"{'certified' if affine.certified else 'holds' if affine.identity_holds else 'FAILS'}"
        )
        return
    _emit(payload, None, out, fmt, None)


@main.command("eigenfunction")
@model_options
@click.option("--branch", type=click.Choice(["plus", "minus"]), default="plus", show_default=True)
@click.option("--level", type=click.IntRange(0, 19), default=0, show_default=True)
@click.option("--grid-n", type=click.IntRange(min=500), default=4000, show_default=True)
@click.option("--xi-max", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="Outer Dirichlet wall [length].")
@output_options(default_format="csv")
@reports_errors
def eigenfunction_command(omega, k, eps, branch, level, grid_n, xi_max, out, fmt):
    """Normalised eigenfunction phi_n(xi) on the grid (CSV columns xi,phi)."""
    run = RunConfig(
        command="eigenfunction", omega=omega, k=k, epsilon=eps, branch=branch,
        levels=level + 1, solver=SolverConfig(n_points=grid_n), out=out, format=fmt,
    )
    params = run.params_for(run.branches[0])
    grid = Grid(xi_max, grid_n) if xi_max is not None else default_domain(
        params, run.levels, run.solver
    )
    table_data = eigenfunction(params, grid, level, run.solver)

    table = Table(title=f"phi_{level} ({branch})")
    for column in ("E", "interior nodes", "xi_max", "points"):
        table.add_column(column, justify="right")
    table.add_row(
        f"{table_data.energy:.8f}",
        str(table_data.interior_nodes()),
        f"{grid.xi_max:.6g}",
        str(grid.n_points + 1),
    )
    frame = table_data.to_frame() if pl is not None else None
    _emit(table_data, frame, out, fmt, table)


@main.command("table")
@click.argument("which", type=click.Choice(list(TABLE_IDS)))
@click.option("--grid-n", type=click.IntRange(min=500), default=4000, show_default=True)
@output_options()
@reports_errors
def table_command(which, grid_n, out, fmt):
    """Recompute reference table 1, 2 or 3 and report the deviations (exit 4 if too large)."""
    report = reproduce_table(which, SolverConfig(n_points=grid_n))
    table = Table(title=f"Table {which}: {report.reference.title}")
    for column in ("n", "ref E+", "E+", "ref E-", "E-"):
        table.add_column(column, justify="right")
    for n, (rp, cp, rm, cm) in enumerate(
        zip(report.reference.plus, report.plus, report.reference.minus, report.minus)
    ):
        table.add_row(str(n), f"{rp:.8f}", f"{cp:.8f}", f"{rm:.8f}", f"{cm:.8f}")
    frame = report.to_frame() if pl is not None else None
    _emit(report, frame, out, fmt, table)

    summary = (
        f"max |deviation| = {report.max_deviation:.3e} (tolerance {report.reference.tolerance:g})"
    )
    if report.reference.splitting_tolerance is not None:
        summary += (
            f", splitting deviation = {report.splitting_deviation:.3e} "
            f"(tolerance {report.reference.splitting_tolerance:g})"
        )
    click.echo(summary, err=True)
    if not report.passed:
        raise CommandError(f"table {which} deviates beyond its tolerance", EXIT_DEVIATION)


@main.command()
@model_options
@click.option("--xi-min", type=click.FloatRange(min=0.0, min_open=True), default=0.01,
              show_default=True, help="First sample [length].")
@click.option("--xi-max", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="Last sample [length]; defaults to the six-level domain.")
@click.option("--points", type=click.IntRange(2, 100000), default=400, show_default=True)
@output_options(default_format="csv")
@reports_errors
def potential(omega, k, eps, xi_min, xi_max, points, out, fmt):
    """Effective potentials of both branches (CSV columns xi,v_plus,v_minus)."""
    run = RunConfig(command="potential", omega=omega, k=k, epsilon=eps, out=out, format=fmt)
    params = run.params_for(Branch.PLUS)
    xi_max = xi_max if xi_max is not None else default_domain(params, run.levels).xi_max
    frame = potential_table(params, xi_min, xi_max, points)
    payload = {"params": params.to_dict(), "xi_min": xi_min, "xi_max": xi_max,
               "columns": frame.to_dict(as_series=False)}
    table = Table(title=f"V_eff on [{xi_min:g}, {xi_max:.4g}]")
    for column in ("xi", "V+", "V-"):
        table.add_column(column, justify="right")
    for xi, vp, vm in frame.gather_every(max(1, points // 20)).iter_rows():
        table.add_row(f"{xi:.4f}", f"{vp:.6f}", f"{vm:.6f}")
    _emit(payload, frame, out, fmt, table)


@main.command()
@click.option("--omega", type=click.FloatRange(min=0.0, min_open=True), default=10.0,
              show_default=True, help="Angular frequency omega [1/time].")
@click.option("--eps", type=click.FloatRange(min=0.0), default=0.25, show_default=True,
              help="Ordering parameter epsilon [dimensionless].")
@click.option("--k-values", default="0,0.5,1,2,5", show_default=True,
              help="Comma-separated anharmonicities k [1/(length*time)].")
@click.option("--levels", type=click.IntRange(1, 20), default=6, show_default=True)
@click.option("--grid-n", type=click.IntRange(min=500), default=4000, show_default=True)
@click.option("--db", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="DuckDB file the levels are appended to.")
@click.option("--run-id", default="sweep", show_default=True, help="Label stored with each row.")
@output_options()
@reports_errors
def sweep(omega, eps, k_values, levels, grid_n, db, run_id, out, fmt):
    """Finite-difference spectra of both branches over a range of k."""
    solver = SolverConfig(n_points=grid_n)
    spectra = []
    for k in _number_list(k_values):
        run = RunConfig(command="sweep", omega=omega, k=k, epsilon=eps, branch="both",
                        levels=levels, solver=solver, out=out, format=fmt)
        spectra.extend(_solve(run, default_domain(run.params_for(Branch.PLUS), levels, solver)))

    if db is not None:
        from .integrations import create_file_store

        store = create_file_store(db)
        try:
            written = sum(store.write_spectrum(s, run_id) for s in spectra)
        finally:
            store.close()
        logger.info("Stored %d levels in %s under run %r", written, db, run_id)

    payload = {"run_id": run_id, "spectra": [s.to_dict() for s in spectra]}
    frame = None
    if pl is not None:
        frame = pl.concat(
            [
                s.to_frame().with_columns(
                    pl.lit(s.params.k).alias("k"), pl.lit(s.params.branch.value).alias("branch")
                )
                for s in spectra
            ]
        ).select(["k", "branch", "n", "energy", "est_error"])
    table = Table(title=f"Sweep over k (omega={omega:g}, eps={eps:g})")
    for column in ("k", "branch", "E_0", f"E_{levels - 1}", "max |dE - 2 omega|"):
        table.add_column(column, justify="right")
    for s in spectra:
        table.add_row(
            f"{s.params.k:g}",
            s.params.branch.value,
            f"{s.energies[0]:.6f}",
            f"{s.energies[-1]:.6f}",
            f"{spacing_deviation(s):.4f}",
        )
    _emit(payload, frame, out, fmt, table)


if __name__ == "__main__":
    main()
