"""Command-line front end.

Results go to stdout (or --out); progress banners go to stderr. Exit codes:
0 pass, 1 numerical or assertion failure, 2 usage error.
"""
import math
import os
import sys
from dataclasses import asdict
from functools import wraps

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import click
import numpy as np
import pandas as pd
from joblib import Parallel, delayed

import console
from acceptance import AcceptanceSuite
from comparison import bounds_check, check_corollary, corollary_intervals
from complex_geometry import audit_curvature, resolve_charge_ratio
from config import FORMATS, METHODS, NORMALIZATIONS, RunConfig
from errors import ConfigError, HopfLabError
from extremal_flow import closed_form_gap, initial_covector, integrate_extremal
from jacobi_conjugate import (closed_form_conjugate_times, compare_reports, conjugate_times_structural,
                              conjugate_times_variational)
from result_writer import ResultWriter

AGREEMENT_TOL = 1e-4


def run_options(func):
    """Flags shared by every experiment command"""
    options = [
        click.option('--n', 'n', type=int, default=2, show_default=True, help='Fibration index: S^{2n+1} over CP^n'),
        click.option('--u0', 'u0', type=float, default=0.0, show_default=True, help='Charge ū of the extremal'),
        click.option('--T', 'T', type=float, default=2 * math.pi, help='Time horizon  [default: 2π]'),
        click.option('--steps', type=int, default=None, help='Grid steps  [default: ceil(4000·T)]'),
        click.option('--tol', type=float, default=1e-6, show_default=True, help='Relative rank tolerance'),
        click.option('--seed', type=int, default=0, show_default=True),
        click.option('--method', type=click.Choice(METHODS), default='all', show_default=True),
        click.option('--format', 'fmt', type=click.Choice(FORMATS), default='json', show_default=True),
        click.option('--out', type=click.Path(dir_okay=False, writable=True), default=None),
        click.option('--normalization', type=click.Choice(NORMALIZATIONS), default='measured', show_default=True,
                     help='Charge normalization of the curvature maps'),
        click.option('--jobs', type=int, default=1, show_default=True, help='Parallel workers for sweeps'),
        click.option('--quiet', is_flag=True, help='Silence progress output'),
    ]
    for option in reversed(options):
        func = option(func)

    @wraps(func)
    def wrapper(n, u0, T, steps, tol, seed, method, fmt, out, normalization, jobs, quiet, **kwargs):
        console.set_quiet(quiet)
        try:
            config = RunConfig(n=n, u0=u0, T=T, steps=steps, tol=tol, seed=seed, method=method, format=fmt,
                               out=out, normalization=normalization, jobs=jobs).validate()
        except ConfigError as exc:
            raise click.UsageError(str(exc))
        try:
            passed = func(config, **kwargs)
        except ConfigError as exc:
            raise click.UsageError(str(exc))
        except HopfLabError as exc:
            console.fail(str(exc))
            click.get_current_context().exit(1)
        click.get_current_context().exit(0 if passed else 1)

    return wrapper


@click.group()
def cli():
    """Sub-Riemannian geodesics, Jacobi equations and conjugate points on Hopf spheres."""


@cli.command('curvature-audit')
@run_options
@click.option('--samples', type=int, default=100_000, show_default=True)
@click.option('--bad-tensor', is_flag=True, hidden=True)
def cmd_curvature_audit(config, samples, bad_tensor):
    console.banner("🔬 CURVATURE AUDIT")
    report = audit_curvature(config.n, samples=samples, seed=config.seed, j_sign=-1.0 if bad_tensor else 1.0)
    console.bullet(f"sectional curvature in [{report['min']:.12f}, {report['max']:.12f}]")
    console.bullet(f"dω / g(J.,.) ratio: {report['charge_ratio']:.10f}")
    if report['violations']:
        console.warn(f"{report['violations']} planes outside [1, 4]")
    else:
        console.ok("no violations")
    ResultWriter(config.out, config.format).write(report)
    return report['violations'] == 0


@cli.command('geodesic')
@run_options
@click.option('--direction', type=int, default=None,
              help='Horizontal direction index at e_1 (even: e_k, odd: i e_k); random from --seed if omitted')
def cmd_geodesic(config, direction):
    if direction is not None and not 0 <= direction < 2 * config.n:
        raise ConfigError(f"--direction must lie in [0, {2 * config.n}), got {direction}")
    console.banner("🧭 NORMAL EXTREMAL")
    ratio = resolve_charge_ratio(config.normalization, config.n, seed=config.seed)
    lam = initial_covector(config.n, config.u0, ratio, direction=direction, seed=config.seed)
    arc = integrate_extremal(lam, config.T, config.steps)
    conserved = arc.conserved()
    gap = closed_form_gap(arc)

    columns = {'t': arc.times}
    for k in range(config.n + 1):
        columns[f're_z{k}'] = arc.z[:, k].real
        columns[f'im_z{k}'] = arc.z[:, k].imag
    for k in range(config.n + 1):
        columns[f're_p{k}'] = arc.p[:, k].real
        columns[f'im_p{k}'] = arc.p[:, k].imag
    columns['h'] = conserved['h']
    columns['u0'] = conserved['u0']
    columns['closed_form_gap'] = gap
    table = pd.DataFrame(columns)

    drift = arc.drift()
    console.bullet(f"{len(arc)} nodes, step {arc.step:.2e}")
    console.bullet("drift: " + ", ".join(f"{k} {v:.1e}" for k, v in drift.items()))
    console.bullet(f"closed-form gap: {float(np.max(gap)):.2e}")

    payload = {'config': asdict(config), 'drift': drift, 'series': table.to_dict(orient='list')}
    ResultWriter(config.out, config.format).write(payload, table=table)
    return True


def conjugate_reports(config, ratio, lam):
    reports = {}
    if config.method in ('structural', 'all'):
        reports['structural'] = conjugate_times_structural(lam, config.T, config.steps, config.tol, ratio)
    if config.method in ('variational', 'all'):
        reports['variational'] = conjugate_times_variational(lam, config.T, config.steps, config.tol, ratio)
    if config.method in ('closed', 'all'):
        u_sq = config.u0 ** 2
        reports['closed_form'] = closed_form_conjugate_times(4 + u_sq, 1 + u_sq / 4, 2 * config.n - 2, config.T)
    return reports


@cli.command('conjugate')
@run_options
def cmd_conjugate(config):
    console.banner("📍 CONJUGATE TIMES")
    ratio = resolve_charge_ratio(config.normalization, config.n, seed=config.seed)
    lam = initial_covector(config.n, config.u0, ratio, seed=config.seed)
    reports = conjugate_reports(config, ratio, lam)

    names = list(reports)
    agreement = [compare_reports(reports[a], reports[b], time_tol=AGREEMENT_TOL)
                 for i, a in enumerate(names) for b in names[i + 1:]]
    for name, report in reports.items():
        console.bullet(f"{name}: {report.entries}")
    for item in agreement:
        if item['agree']:
            console.ok(f"{item['methods'][0]} / {item['methods'][1]} agree")
        else:
            console.warn(f"{item['methods'][0]} / {item['methods'][1]} disagree: "
                         f"max gap {item['max_time_gap']}, {item['multiplicity_mismatches']} mismatches")

    rows = [{'method': name, 'time': t, 'multiplicity': mult}
            for name, report in reports.items() for t, mult in report.entries]
    payload = {
        'config': asdict(config),
        'charge_ratio': ratio,
        'reports': {name: report.to_dict() for name, report in reports.items()},
        'agreement': agreement,
    }
    table = pd.DataFrame(rows, columns=['method', 'time', 'multiplicity'])
    ResultWriter(config.out, config.format).write(payload, table=table)
    return all(item['agree'] for item in agreement)


def _parse_grid(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise ConfigError(f"Grid must be a comma-separated list of numbers, got {text!r}")


def bounds_row(config, u0, T):
    """One sweep point: measured count, comparison bounds and corollary checks"""
    point = config.with_overrides(u0=u0, T=T)
    ratio = resolve_charge_ratio(point.normalization, point.n, seed=point.seed)
    lam = initial_covector(point.n, u0, ratio, seed=point.seed)
    if point.method == 'structural':
        measured = conjugate_times_structural(lam, T, point.steps, point.tol, ratio)
    else:
        measured = conjugate_times_variational(lam, T, point.steps, point.tol, ratio)
    row = bounds_check(measured, u0, point.n, T).row()
    corollary = check_corollary(measured, corollary_intervals(u0, point.n))
    row.update(corollary)
    row['pass'] = row['pass'] and False not in corollary.values()
    return row


@cli.command('bounds')
@run_options
@click.option('--u0-grid', default='0,1,2', show_default=True, help='Comma-separated charges')
@click.option('--T-grid', 't_grid', default='2,4,6', show_default=True, help='Comma-separated horizons')
def cmd_bounds(config, u0_grid, t_grid):
    console.banner("📏 COMPARISON BOUNDS")
    charges, horizons = _parse_grid(u0_grid), _parse_grid(t_grid)
    if not charges or not horizons or min(horizons) <= 0:
        raise ConfigError("Sweep grids must be non-empty with positive horizons")
    grid = [(u0, T) for u0 in charges for T in horizons]
    console.bullet(f"{len(grid)} grid points, {config.jobs} worker(s)")

    rows = Parallel(n_jobs=config.jobs)(delayed(bounds_row)(config, u0, T) for u0, T in grid)
    table = pd.DataFrame(rows, columns=['u0', 'T', 'dc', 'z_lower', 'predicted', 'measured', 'z_upper', 'pass',
                                        'conjugate_free', 'first_guarantee', 'second_guarantee'])
    for row in rows:
        mark = "✅" if row['pass'] else "❌"
        console.say(f"   {mark} ū={row['u0']:g} T={row['T']:g}: "
                    f"{row['z_lower']} <= {row['measured']} <= {row['z_upper']} (predicted {row['predicted']})")
    payload = {'config': asdict(config), 'rows': rows}
    ResultWriter(config.out, config.format).write(payload, table=table)
    return all(row['pass'] for row in rows)


@cli.command('selftest')
@click.option('--format', 'fmt', type=click.Choice(FORMATS), default=None,
              help='Machine-readable summary; text banner only if omitted')
@click.option('--out', type=click.Path(dir_okay=False, writable=True), default=None)
@click.option('--normalization', type=click.Choice(NORMALIZATIONS), default='measured', show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--samples', type=int, default=100_000, show_default=True, hidden=True)
@click.option('--quiet', is_flag=True)
def cmd_selftest(fmt, out, normalization, seed, samples, quiet):
    console.set_quiet(quiet)
    suite = AcceptanceSuite(normalization=normalization, seed=seed, samples=samples)
    results = suite.run()
    if fmt is not None:
        ResultWriter(out, fmt).write(results, table=pd.DataFrame(results))
    click.get_current_context().exit(0 if suite.passed else 1)


if __name__ == "__main__":
    cli()
