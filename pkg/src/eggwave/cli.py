"""Command-line pipeline: simulate, compress, surface, match, stats, sweep.

Every subcommand writes deterministic artifacts for a given seed, so runs
are byte-for-byte reproducible.  Data errors exit with status 1 and a
single-line diagnostic; usage errors exit with status 2.
"""

from __future__ import annotations

import functools
import math
from pathlib import Path

import click

from . import __version__
from .compression import CompressionConfig, compress
from .io import load_cohort, read_recording, write_cohort
from .matcher import (
    GridSpec,
    match_cohort,
    minima_to_csv,
    prd_surface,
    refine_surface,
    surface_to_csv,
    surface_to_pgm,
)
from .simulate import CohortSpec, simulate_cohort
from .stats import (
    compare_states,
    comparisons_to_csv,
    comparisons_to_text,
    cr_sweep,
    sweep_to_csv,
)
from .wavelets import Signal

WAVELET_HELP = (
    "Wavelet: haar, daubechies-2, daubechies-3, coiflet-1, or pollen:A,B "
    "with plane angles in radians."
)


def parse_wavelet(text: str):
    if text.startswith("pollen:"):
        body = text[len("pollen:"):]
        parts = body.split(",")
        if len(parts) != 2:
            raise ValueError(f"pollen wavelet needs two angles, got {body!r}")
        try:
            return (float(parts[0]), float(parts[1]))
        except ValueError:
            raise ValueError(f"pollen angles must be numbers, got {body!r}") from None
    return text


def parse_depth(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"depth must be an integer or 'auto', got {text!r}") from None


def data_errors_exit_1(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ValueError, OSError) as error:
            raise click.ClickException(str(error))

    return wrapper


@click.group()
@click.version_option(version=__version__)
def main():
    """Wavelet-compression screening of multichannel EGG recordings."""


@main.command()
@click.option("--out", required=True, type=click.Path(), help="Output dataset directory.")
@click.option("--subjects", default=16, show_default=True, help="Subjects in the cohort.")
@click.option("--channels", default=8, show_default=True, help="EGG channels per subject.")
@click.option("--duration", default=600.0, show_default=True, help="Recording length in seconds.")
@click.option("--rate", default=10.0, show_default=True, help="Sample rate in Hz.")
@click.option("--seed", default=0, show_default=True, help="Cohort seed.")
@data_errors_exit_1
def simulate(out, subjects, channels, duration, rate, seed):
    """Simulate a basal/mild/severe cohort and write it with a manifest."""
    spec = CohortSpec(
        subjects=subjects,
        channels=channels,
        duration_s=duration,
        sample_rate_hz=rate,
        seed=seed,
    )
    manifest = write_cohort(simulate_cohort(spec), out)
    click.echo(f"wrote {spec.subjects * 3} recordings, manifest at {manifest}")


@main.command(name="compress")
@click.option("--data", required=True, type=click.Path(), help="Cohort manifest.")
@click.option("--wavelet", default="daubechies-3", show_default=True, help=WAVELET_HELP)
@click.option("--cr", default=3.0, show_default=True, help="Compression ratio (>= 1).")
@click.option("--depth", default="auto", show_default=True, help="Decomposition depth or 'auto'.")
@click.option("--out", type=click.Path(), default=None, help="Write the PRD table to this CSV.")
@data_errors_exit_1
def compress_command(data, wavelet, cr, depth, out):
    """Per-channel PRD table for every recording of a cohort."""
    cohort = load_cohort(data)
    config = CompressionConfig(
        wavelet=parse_wavelet(wavelet), cr=cr, levels=parse_depth(depth)
    )
    lines = ["subject,state,channel,kept,total_coefficients,prd_percent"]
    for subject in cohort.subjects:
        for state in cohort.states:
            rec = cohort.get(subject, state)
            period = 1.0 / rec.sample_rate_hz
            for ch in rec.channel_ids:
                result = compress(Signal(rec.channel(ch), sample_period_s=period), config)
                lines.append(
                    f"{subject},{state},{ch},{result.kept},"
                    f"{result.total_coefficients},{result.prd_percent:.6f}"
                )
    table = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(table, encoding="ascii", newline="\n")
        click.echo(f"wrote {len(lines) - 1} rows to {out}")
    else:
        click.echo(table, nl=False)


@main.command()
@click.option("--recording", required=True, type=click.Path(), help="Recording CSV.")
@click.option("--channel", required=True, type=int, help="Channel id to scan.")
@click.option("--grid", default=64, show_default=True, help="Grid resolution per axis.")
@click.option("--cr", default=3.0, show_default=True, help="Compression ratio.")
@click.option("--depth", default=6, show_default=True, type=int, help="Decomposition depth.")
@click.option("--workers", default=1, show_default=True, help="Threads for the scan.")
@click.option("--refine", is_flag=True, help="Re-scan one cell around the minimum.")
@click.option("--out-csv", type=click.Path(), default=None, help="Surface CSV output.")
@click.option("--out-pgm", type=click.Path(), default=None, help="Surface PGM raster output.")
@data_errors_exit_1
def surface(recording, channel, grid, cr, depth, workers, refine, out_csv, out_pgm):
    """PRD surface of one recording channel over the filter plane."""
    rec = read_recording(recording)
    signal = Signal(rec.channel(channel), sample_period_s=1.0 / rec.sample_rate_hz)
    scan = prd_surface(signal, GridSpec(resolution=grid), cr=cr, levels=depth, workers=workers)
    if refine:
        scan = refine_surface(signal, scan, workers=workers)
    a, b, value = scan.argmin
    if out_csv:
        surface_to_csv(scan, out_csv)
        click.echo(f"wrote surface CSV to {out_csv}")
    if out_pgm:
        surface_to_pgm(scan, out_pgm)
        click.echo(f"wrote surface raster to {out_pgm}")
    click.echo(
        f"minimum PRD {value:.6f} % at a={a:.6f} rad ({a / math.pi:+.4f} pi), "
        f"b={b:.6f} rad ({b / math.pi:+.4f} pi)"
    )


@main.command()
@click.option("--data", required=True, type=click.Path(), help="Cohort manifest.")
@click.option("--state", default="basal", show_default=True, help="State to match against.")
@click.option("--grid", default=64, show_default=True, help="Grid resolution per axis.")
@click.option("--cr", default=3.0, show_default=True, help="Compression ratio.")
@click.option("--depth", default=6, show_default=True, type=int, help="Decomposition depth.")
@click.option("--channels", default="all", show_default=True,
              help="Comma-separated channel ids, or 'all'.")
@click.option("--workers", default=1, show_default=True, help="Threads for the scans.")
@click.option("--refine", is_flag=True, help="Refine each per-recording minimum.")
@click.option("--out", type=click.Path(), default=None, help="Write per-recording minima CSV.")
@data_errors_exit_1
def match(data, state, grid, cr, depth, channels, workers, refine, out):
    """Best-matching plane point per recording and the cohort aggregate."""
    cohort = load_cohort(data)
    if channels == "all":
        selected = None
    else:
        try:
            selected = [int(t) for t in channels.split(",")]
        except ValueError:
            raise ValueError(f"channels must be comma-separated ids, got {channels!r}")
    result = match_cohort(
        cohort,
        state,
        GridSpec(resolution=grid),
        cr=cr,
        levels=depth,
        channels=selected,
        refine=refine,
        workers=workers,
    )
    if out:
        Path(out).write_text(minima_to_csv(result), encoding="ascii", newline="\n")
        click.echo(f"wrote {len(result.minima)} minima to {out}")
    a_star, b_star = result.aggregate
    click.echo(
        f"aggregate a* = {a_star:.6f} rad ({a_star / math.pi:+.4f} pi), "
        f"b* = {b_star:.6f} rad ({b_star / math.pi:+.4f} pi)"
    )


@main.command(name="stats")
@click.option("--data", required=True, type=click.Path(), help="Cohort manifest.")
@click.option("--pair", default="basal:severe", show_default=True,
              help="State pair to compare, as A:B.")
@click.option("--wavelet", default="daubechies-3", show_default=True, help=WAVELET_HELP)
@click.option("--cr", default=3.0, show_default=True, help="Compression ratio.")
@click.option("--depth", default="auto", show_default=True, help="Decomposition depth or 'auto'.")
@click.option("--alpha", default=0.05, show_default=True, help="Significance level.")
@click.option("--out-csv", type=click.Path(), default=None, help="Comparison table CSV output.")
@click.option("--out-text", type=click.Path(), default=None, help="Aligned text table output.")
@data_errors_exit_1
def stats_command(data, pair, wavelet, cr, depth, alpha, out_csv, out_text):
    """Per-channel paired comparison table between two states."""
    state_a, sep, state_b = pair.partition(":")
    if not sep or not state_a or not state_b:
        raise ValueError(f"pair must look like basal:severe, got {pair!r}")
    cohort = load_cohort(data)
    rows = compare_states(
        cohort,
        state_a,
        state_b,
        wavelet=parse_wavelet(wavelet),
        cr=cr,
        levels=parse_depth(depth),
        alpha=alpha,
    )
    text = comparisons_to_text(rows, alpha=alpha)
    if out_csv:
        Path(out_csv).write_text(comparisons_to_csv(rows), encoding="ascii", newline="\n")
        click.echo(f"wrote comparison CSV to {out_csv}")
    if out_text:
        Path(out_text).write_text(text, encoding="ascii", newline="\n")
        click.echo(f"wrote comparison table to {out_text}")
    click.echo(text, nl=False)


@main.command()
@click.option("--data", required=True, type=click.Path(), help="Cohort manifest.")
@click.option("--crs", default="2,3,4,5,8", show_default=True,
              help="Comma-separated compression ratios.")
@click.option("--wavelet", default="daubechies-3", show_default=True, help=WAVELET_HELP)
@click.option("--depth", default="auto", show_default=True, help="Decomposition depth or 'auto'.")
@click.option("--alpha", default=0.05, show_default=True, help="Significance level.")
@click.option("--out", type=click.Path(), default=None, help="Sweep curve CSV output.")
@data_errors_exit_1
def sweep(data, crs, wavelet, depth, alpha, out):
    """Detection-rate curves over compression ratios."""
    try:
        ratios = [float(t) for t in crs.split(",")]
    except ValueError:
        raise ValueError(f"crs must be comma-separated numbers, got {crs!r}")
    cohort = load_cohort(data)
    points = cr_sweep(
        cohort,
        ratios,
        wavelet=parse_wavelet(wavelet),
        levels=parse_depth(depth),
        alpha=alpha,
    )
    table = sweep_to_csv(points)
    if out:
        Path(out).write_text(table, encoding="ascii", newline="\n")
        click.echo(f"wrote sweep curve to {out}")
    else:
        click.echo(table, nl=False)


if __name__ == "__main__":
    main()
