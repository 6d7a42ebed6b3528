"""Command-line surface.

Thin orchestration over the library: every subcommand loads a validated
config (or the defaults), runs one experiment or fit, and writes
deterministic CSV/SVG/JSON artifacts into the output directory.

Exit codes: 0 success, 2 configuration problem, 3 numerical failure.
"""

import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import acceptance
from .analytics import lc_solution, normal_mode_rates
from .calibration import (HashMap, gain_profile_fit, hashmap_build,
                          hashmap_lookup, s11_fit)
from .config import RunConfig, load_config, summary_line, write_config
from .errors import (ConfigError, FitFailed, IntegrationError, NhdimerError,
                     RangeError)
from .experiments import (lc_phase_diagram, sync_power_contours,
                          transmission_sweep)
from .integrator import integrate
from .params import TWO_PI, OperatingPoint, rate_to_mhz
from .render import render_heatmap, write_svg
from .spectral import lc_extract, spectrum_of
from .stability import boundary_curve, is_stable, threshold_gain

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load(config_path) -> RunConfig:
    if config_path is None:
        return RunConfig()
    return load_config(config_path)


def _out_dir(flag_value) -> Path:
    """Output directory: NHDIMER_OUT env var wins over --out."""
    out = os.environ.get("NHDIMER_OUT") or flag_value or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_grid(grid, out: Path, stem: str, formats, overlay=None) -> list:
    written = []
    if "csv" in formats:
        p = out / f"{stem}.csv"
        grid.to_csv(p)
        written.append(p)
    if "json" in formats:
        p = out / f"{stem}.meta.json"
        grid.write_metadata(p)
        written.append(p)
    if "svg" in formats:
        p = out / f"{stem}.svg"
        write_svg(render_heatmap(grid, overlay=overlay), p)
        written.append(p)
    return written


def _report_invalid(grid) -> None:
    bad = np.argwhere(~grid.valid)
    if bad.size:
        i, j = bad[0]
        click.echo(f"warning: {len(bad)} invalid cell(s); first at "
                   f"{grid.axis1_name}={grid.axis1[i]:g}, "
                   f"{grid.axis2_name}={grid.axis2[j]:g}", err=True)


config_option = click.option("--config", "config_path", default=None,
                             type=click.Path(), help="JSON config file.")
out_option = click.option("--out", "out_flag", default=None,
                          help="Output directory (NHDIMER_OUT overrides).")
workers_option = click.option("--workers", default=1, show_default=True,
                              type=int, help="Parallel worker threads.")
format_option = click.option("--format", "fmt", default="csv",
                             type=click.Choice(["csv", "json"]),
                             show_default=True, help="Stdout table format.")


@click.group(name="nhdimer")
def cli_group():
    """Two-cavity dimer simulations, phase diagrams, and fits."""


@cli_group.command()
@config_option
@out_option
@click.option("--phi", default=math.pi, show_default=True, type=float,
              help="Hopping phase, rad.")
@click.option("--delta-g", default=8.4, show_default=True, type=float,
              help="Net gain, dB.")
@click.option("--pd-dbm", default=None, type=float,
              help="Drive power, dBm (omit for the undriven system).")
@click.option("--drive-offset-mhz", default=0.0, show_default=True,
              type=float, help="Drive detuning from the cavity, MHz.")
def simulate(config_path, out_flag, phi, delta_g, pd_dbm, drive_offset_mhz):
    """Integrate a single trajectory and dump it as CSV."""
    cfg = _load(config_path)
    out = _out_dir(out_flag)
    omega_d = cfg.params.omega_c + TWO_PI * drive_offset_mhz * 1e6
    op = OperatingPoint(delta_g, phi, omega_d, p_drive_dbm=pd_dbm)
    traj = integrate(cfg.params, op, cfg.integrator)
    path = out / "trajectory.csv"
    traj.write_csv(path)
    report = is_stable(cfg.params, op)
    click.echo(f"wrote {path}")
    click.echo(f"vacuum {'stable' if report.stable else 'unstable'} "
               f"(max Re eig = {report.max_re_eigenvalue:.6g} 1/s)")
    if not traj.driven:
        obs = lc_extract(cfg.params, traj)
        if obs.present:
            click.echo(f"limit cycle: {obs.amp_dbm:.2f} dBm at offset "
                       f"{obs.freq_offset / 1e6:.4f} MHz")
        else:
            click.echo("no limit cycle (decayed to vacuum)")
    else:
        spec = spectrum_of(cfg.params, traj, snap_to_tone=True)
        spath = out / "spectrum.csv"
        spec.write_csv(spath)
        click.echo(f"wrote {spath}")


@cli_group.command()
@config_option
@out_option
@click.option("--phi", default=None, type=float,
              help="Hopping phase, rad (default 0).")
@click.option("--pd-dbm", default=None, type=float,
              help="Probe power, dBm (default from config grid).")
@workers_option
def transmission(config_path, out_flag, phi, pd_dbm, workers):
    """Weak-drive S21 map over (delta_g, drive frequency)."""
    cfg = _load(config_path)
    out = _out_dir(out_flag)
    phi_val = 0.0 if phi is None else phi
    p_d = cfg.grid.p_d_dbm[0] if pd_dbm is None else pd_dbm
    grid = transmission_sweep(cfg.params, phi_val,
                              cfg.grid.delta_g_grid(),
                              cfg.grid.drive_grid_hz(cfg.params),
                              p_d_dbm=p_d, workers=workers,
                              cfg=cfg.integrator)
    for p in _write_grid(grid, out, "transmission", cfg.output.formats):
        click.echo(f"wrote {p}")
    _report_invalid(grid)


@cli_group.command(name="phase-diagram")
@config_option
@out_option
@workers_option
def phase_diagram(config_path, out_flag, workers):
    """Limit-cycle amplitude and frequency maps over (delta_g, phi)."""
    cfg = _load(config_path)
    out = _out_dir(out_flag)
    amp, freq = lc_phase_diagram(cfg.params, cfg.grid.phi_grid(),
                                 cfg.grid.delta_g_grid(), workers=workers,
                                 cfg=cfg.integrator)
    overlay = boundary_curve(cfg.params)
    written = _write_grid(amp, out, "lc_amplitude_dbm", cfg.output.formats,
                          overlay=overlay)
    written += _write_grid(freq, out, "lc_freq_offset_hz",
                           cfg.output.formats, overlay=overlay)
    for p in written:
        click.echo(f"wrote {p}")
    _report_invalid(amp)


@cli_group.command()
@config_option
@out_option
@workers_option
def sync(config_path, out_flag, workers):
    """Spectral peak-count maps versus drive power (locking contours)."""
    cfg = _load(config_path)
    out = _out_dir(out_flag)
    grids = sync_power_contours(cfg.params, cfg.grid.phi_grid(),
                                cfg.grid.delta_g_grid(),
                                cfg.grid.p_d_dbm, workers=workers,
                                cfg=cfg.integrator)
    for p_d, grid in zip(cfg.grid.p_d_dbm, grids):
        tag = f"{p_d:+.1f}dbm".replace("+", "p").replace("-", "m")
        tag = tag.replace(".", "_")
        for p in _write_grid(grid, out, f"peak_count_{tag}",
                             cfg.output.formats):
            click.echo(f"wrote {p}")
        _report_invalid(grid)


@cli_group.command()
@config_option
@click.option("--phi", required=True, type=float, help="Hopping phase, rad.")
@click.option("--delta-g", required=True, type=float, help="Net gain, dB.")
@format_option
def analytics(config_path, phi, delta_g, fmt):
    """Print the closed-form limit-cycle and normal-mode numbers."""
    cfg = _load(config_path)
    params = cfg.params
    op = OperatingPoint.undriven(params, delta_g, phi)
    rates = normal_mode_rates(params, op)
    sol = lc_solution(params, op)
    dg_star = threshold_gain(params, phi)
    rows = {
        "phi_rad": phi,
        "delta_g_db": delta_g,
        "threshold_gain_db": dg_star,
        "kappa_plus0_mhz": rate_to_mhz(rates.kappa_plus0),
        "kappa_minus0_mhz": rate_to_mhz(rates.kappa_minus0),
        "n_lc": None if sol is None else sol.n_lc,
        "domega_lc_mhz": None if sol is None else rate_to_mhz(sol.domega_lc),
        "kappa_lc_mhz": None if sol is None else rate_to_mhz(sol.kappa_lc),
    }
    if fmt == "json":
        click.echo(json.dumps(rows, sort_keys=True, indent=2))
    else:
        click.echo("quantity,value")
        for key, value in rows.items():
            click.echo(f"{key},{'' if value is None else repr(value)}")


@cli_group.command(name="fit-s11")
@click.argument("csv_path", type=click.Path(exists=True))
@format_option
def fit_s11(csv_path, fmt):
    """Fit a reflection trace CSV with columns freq_hz, mag_linear."""
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    fit = s11_fit(data[:, 0], data[:, 1])
    rows = {
        "omega_res_ghz": fit.omega_res / TWO_PI / 1e9,
        "q_int": fit.q_int,
        "q_c": fit.q_c,
        "kappa_int_mhz": rate_to_mhz(fit.kappa_int),
        "kappa_c_mhz": rate_to_mhz(fit.kappa_c),
        "baseline": fit.baseline,
    }
    if fmt == "json":
        click.echo(json.dumps(rows, sort_keys=True, indent=2))
    else:
        click.echo("quantity,value")
        for key, value in rows.items():
            click.echo(f"{key},{value!r}")


@cli_group.command(name="fit-gain")
@click.argument("csv_path", type=click.Path(exists=True))
@format_option
def fit_gain(csv_path, fmt):
    """Fit an amplifier sweep CSV with columns p_in_w, p_out_w."""
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    fit = gain_profile_fit(data[:, 0], data[:, 1])
    rows = {"g0_db": fit.g0_db, "p_sat_mw": fit.p_sat * 1e3,
            "b_g_mw": fit.b_g * 1e3}
    if fmt == "json":
        click.echo(json.dumps(rows, sort_keys=True, indent=2))
    else:
        click.echo("quantity,value")
        for key, value in rows.items():
            click.echo(f"{key},{value!r}")


@cli_group.group()
def hashmap():
    """Build or query the settings lookup table."""


@hashmap.command(name="build")
@click.argument("calib_csv", type=click.Path(exists=True))
@out_option
@click.option("--g0-db", required=True, type=float,
              help="Small-signal chain gain, dB.")
@click.option("--l-fwd-db", default=0.0, show_default=True, type=float,
              help="Forward-arm insertion loss, dB.")
def hashmap_build_cmd(calib_csv, out_flag, g0_db, l_fwd_db):
    """Build the lookup table from phi_exp_deg, s21_db_at_gamma0 rows."""
    out = _out_dir(out_flag)
    data = np.loadtxt(calib_csv, delimiter=",", skiprows=1)
    hmap = hashmap_build([(row[0], row[1]) for row in data], g0_db,
                         l_fwd_db)
    csv_path = out / "hashmap.csv"
    hmap.to_csv(csv_path)
    hmap.write_metadata(out / "hashmap.meta.json", source=str(calib_csv))
    n_out = sum(r.outlier for r in hmap.rows)
    click.echo(f"wrote {csv_path} ({len(hmap.rows)} rows, "
               f"{n_out} outlier(s) excluded)")


@hashmap.command(name="lookup")
@click.argument("map_csv", type=click.Path(exists=True))
@click.option("--g0-db", required=True, type=float,
              help="Small-signal chain gain, dB.")
@click.option("--delta-g", required=True, type=float, help="Net gain, dB.")
@click.option("--phi", required=True, type=float, help="Hopping phase, rad.")
@click.option("--l-fwd-db", default=0.0, show_default=True, type=float)
@format_option
def hashmap_lookup_cmd(map_csv, g0_db, delta_g, phi, l_fwd_db, fmt):
    """Print device settings realizing (delta_g, phi)."""
    hmap = HashMap.from_csv(map_csv, g0_db=g0_db, l_fwd_db=l_fwd_db)
    settings = hashmap_lookup(hmap, delta_g, phi)
    rows = {"gamma_fwd_db": settings.gamma_fwd_db,
            "gamma_bwd_db": settings.gamma_bwd_db,
            "phi_exp_deg": settings.phi_exp_deg}
    if fmt == "json":
        click.echo(json.dumps(rows, sort_keys=True, indent=2))
    else:
        click.echo("quantity,value")
        for key, value in rows.items():
            click.echo(f"{key},{value!r}")


@cli_group.command()
@config_option
@workers_option
def validate(config_path, workers):
    """Run the acceptance suite and report pass/fail per criterion."""
    _load(config_path)  # config errors surface before the long run
    results = acceptance.run_all(workers=workers, stream=sys.stdout)
    if not all(r.passed for r in results):
        raise IntegrationError("one or more acceptance criteria failed")


@cli_group.command(name="write-config")
@out_option
def write_config_cmd(out_flag):
    """Write the default config (all calibrated values) as JSON."""
    out = _out_dir(out_flag)
    path = out / "default.json"
    write_config(RunConfig(), path)
    click.echo(f"wrote {path}")
    click.echo(summary_line(RunConfig()))


def main(argv=None) -> int:
    """Entry point returning an exit code instead of raising."""
    try:
        cli_group.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except click.exceptions.Abort:
        return EXIT_CONFIG
    except (IntegrationError, FitFailed, RangeError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERICAL
    except NhdimerError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        # malformed input files and out-of-domain arguments
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())
