"""Command-line client for the joint-spectrum service.

Each subcommand posts a JSON configuration to the service and writes the
response to content-named output files. By default the service runs
in-process (no network); pass --url to talk to a remote instance started
with ``oamid serve``. Every output embeds the SHA-256 hash of the request
configuration so results can be traced back to their inputs.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx


def _client(url: str | None) -> httpx.Client:
    if url:
        return httpx.Client(base_url=url, timeout=600.0)
    # In-process: drive the ASGI app directly through the test client, which
    # is a synchronous httpx.Client, so no server or network is involved.
    from starlette.testclient import TestClient

    from oamid.service import app
    return TestClient(app, raise_server_exceptions=False)


def _load_config(config_path: str | None) -> dict:
    if config_path is None:
        return {}
    with open(config_path) as fh:
        return json.load(fh)


def _post(client: httpx.Client, endpoint: str, payload: dict) -> dict:
    resp = client.post(endpoint, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"{endpoint} failed ({resp.status_code}): {detail}")
    return resp.json()


def _write(path: Path, text: str):
    path.write_text(text)
    click.echo(f"wrote {path}")


def _grid_csv(flat, l_max, row_label, col_label, sha):
    """Square grid CSV with the config hash as a leading comment."""
    n = 2 * l_max + 1
    lines = [f"# config_sha256={sha}"]
    lines.append(f"{row_label}\\{col_label}," + ",".join(str(l - l_max) for l in range(n)))
    for i in range(n):
        row = flat[i * n:(i + 1) * n]
        lines.append(str(i - l_max) + "," + ",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"


_PLOT_SCRIPT = """\
# gnuplot script: joint-spectrum heatmap and diagonal histogram
set datafile separator ','
set term pngcairo size 1200,500
set output 'joint_spectrum.png'
set multiplot layout 1,2
set title 'joint OAM spectrum'
set xlabel 'l_o'
set ylabel 'l_r'
plot 'joint_rates.csv' matrix rowheaders columnheaders skip 1 with image notitle
set title 'diagonal sums'
set xlabel 'm'
set ylabel 'rate'
set style fill solid 0.6
plot 'diagonal_histogram.csv' skip 2 using 1:2 with boxes notitle
unset multiplot
"""


def _common_mask_payload(kind, arms, width_um, angle_deg, offsets_um, rotation_deg,
                         seed, raster, config_mask):
    if kind is None:
        return config_mask
    mask = {"kind": kind, "rotation_deg": rotation_deg}
    if kind == "cross":
        mask["arms"] = arms
        if width_um is not None:
            mask["width_um"] = width_um
        mask["angle_deg"] = angle_deg
        mask["offsets_um"] = list(offsets_um)
    elif kind == "smooth_random":
        mask["seed"] = seed
    elif kind == "raster":
        if raster is None:
            raise click.ClickException("--raster PATH is required for kind=raster")
        mask["path"] = raster
    return mask


def _mask_options(f):
    opts = [
        click.option("--kind", type=click.Choice(
            ["empty", "cross", "half_plane", "sector", "smooth_random", "raster"]),
            default=None, help="object kind (overrides the config file)"),
        click.option("--arms", type=int, default=2, show_default=True),
        click.option("--width-um", type=float, default=None),
        click.option("--angle-deg", type=float, default=0.0, show_default=True),
        click.option("--offsets-um", type=float, multiple=True,
                     help="signed per-arm offset, repeatable"),
        click.option("--rotation-deg", type=float, default=0.0, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--raster", type=click.Path(exists=True), default=None,
                     help="amplitude image (PGM) with its JSON sidecar"),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


@click.group()
def main():
    """Correlated-OAM object identification toolkit."""


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None,
              help="JSON request body; flags override its mask")
@click.option("--url", default=None, help="remote service URL (default: in-process)")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--l-max", type=int, default=None)
@click.option("--eta", type=float, default=None, help="natural-spectrum decay ratio")
@click.option("--l-p", type=int, default=None, help="pump OAM for the harmonic analysis")
@click.option("--parity-flip/--no-parity-flip", default=None)
@_mask_options
def spectrum(config, url, out, l_max, eta, l_p, parity_flip,
             kind, arms, width_um, angle_deg, offsets_um, rotation_deg, seed, raster):
    """Compute the joint OAM spectrum of an object and its symmetry report."""
    payload = _load_config(config)
    mask = _common_mask_payload(kind, arms, width_um, angle_deg, offsets_um,
                                rotation_deg, seed, raster, payload.get("mask"))
    if mask is not None:
        payload["mask"] = mask
    if l_max is not None:
        payload.setdefault("geometry", {})["l_max"] = l_max
    if eta is not None:
        payload.setdefault("spdc", {})["eta"] = eta
    if l_p is not None:
        payload.setdefault("analysis", {})["l_p"] = l_p
    if parity_flip is not None:
        payload["parity_flip"] = parity_flip

    with _client(url) as client:
        data = _post(client, "/spectrum", payload)

    sha = data["config_sha256"]
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    lm = data["l_max"]
    _write(outdir / "joint_rates.csv",
           _grid_csv(data["joint_spectrum"]["rates"], lm, "l_r", "l_o", sha))
    hist = [f"# config_sha256={sha}", "m,rate"]
    for m in sorted(data["diagonal_sums"], key=int):
        hist.append(f"{m},{data['diagonal_sums'][m]:.12g}")
    _write(outdir / "diagonal_histogram.csv", "\n".join(hist) + "\n")
    xs = [f"# config_sha256={sha}", "l_o,rate"]
    for i, v in enumerate(data["cross_section_lr0"]):
        xs.append(f"{i - lm},{v:.12g}")
    _write(outdir / "cross_section_lr0.csv", "\n".join(xs) + "\n")
    _write(outdir / "spectrum_report.json", json.dumps(data, indent=2) + "\n")
    _write(outdir / "plot_spectrum.gp", _PLOT_SCRIPT)
    sym = data["symmetry"]
    click.echo(f"config_sha256 = {sha}")
    click.echo(f"total rate    = {data['total_rate']:.6g}")
    click.echo(f"dominant m    = {sym['dominant_m']}")
    if sym["subsymmetries"]:
        click.echo("subsymmetries = " +
                   ", ".join(f"m={m} ({f:.3f})" for m, f in sym["subsymmetries"]))


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--url", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--time-s", type=float, default=None)
@click.option("--runs", type=int, default=None)
@click.option("--rng-seed", type=int, default=None, help="Poisson stream seed")
@click.option("--rate-scale", type=float, default=None)
@click.option("--match-reference/--no-match-reference", default=None,
              help="rescale time so totals match the empty aperture")
@_mask_options
def simulate(config, url, out, time_s, runs, rng_seed, rate_scale, match_reference,
             kind, arms, width_um, angle_deg, offsets_um, rotation_deg, seed, raster):
    """Simulate coincidence counts for an object (full grid or planned cells)."""
    payload = _load_config(config)
    mask = _common_mask_payload(kind, arms, width_um, angle_deg, offsets_um,
                                rotation_deg, seed, raster, payload.get("mask"))
    if mask is not None:
        payload["mask"] = mask
    meas = payload.setdefault("measurement", {})
    if time_s is not None:
        meas["time_s"] = time_s
    if runs is not None:
        meas["runs"] = runs
    if rng_seed is not None:
        meas["seed"] = rng_seed
    if rate_scale is not None:
        meas["rate_scale"] = rate_scale
    if match_reference is not None:
        payload["match_reference_counts"] = match_reference

    with _client(url) as client:
        data = _post(client, "/simulate", payload)

    sha = data["config_sha256"]
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    table = data["table"]
    lines = [f"# config_sha256={sha}", "l_r,l_o,run,counts"]
    for cell in table["cells"]:
        for run, c in enumerate(cell["counts"]):
            lines.append(f"{cell['l_r']},{cell['l_o']},{run},{c}")
    lines.append("l_r,l_o,mean,stddev")
    for cell in table["cells"]:
        lines.append(f"{cell['l_r']},{cell['l_o']},{cell['mean']:.12g},{cell['stddev']:.12g}")
    _write(outdir / "counts.csv", "\n".join(lines) + "\n")
    _write(outdir / "counts.json", json.dumps(data, indent=2) + "\n")
    total = sum(sum(c["counts"]) for c in table["cells"])
    click.echo(f"config_sha256     = {sha}")
    click.echo(f"integration time  = {data['integration_time_s']:.6g} s")
    click.echo(f"cells x runs      = {len(table['cells'])} x {table['runs']}")
    click.echo(f"total counts      = {total}")


@main.command()
@click.option("--config", type=click.Path(exists=True), required=True,
              help="JSON with library (and truth or counts)")
@click.option("--url", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--budget", type=int, default=None)
@click.option("--strategy", type=click.Choice(["greedy", "random"]), default=None)
@click.option("--counts", type=click.Path(exists=True), default=None,
              help="measured count table (counts.json from `simulate`)")
def identify(config, url, out, budget, strategy, counts):
    """Identify which library object produced the observed counts."""
    payload = _load_config(config)
    if budget is not None:
        payload["budget"] = budget
    if strategy is not None:
        payload["strategy"] = strategy
    if counts is not None:
        with open(counts) as fh:
            data = json.load(fh)
        payload["counts"] = data.get("table", data)

    with _client(url) as client:
        data = _post(client, "/identify", payload)

    sha = data["config_sha256"]
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write(outdir / "identification.json", json.dumps(data, indent=2) + "\n")
    result = data["result"]
    click.echo(f"config_sha256 = {sha}")
    click.echo(f"plan          = {data['plan']}")
    if result["anomaly"]:
        click.echo("ANOMALY: counts impossible under every candidate")
        sys.exit(2)
    click.echo(f"best          = {result['best']}")
    click.echo(f"confidence    = {result['confidence']:.4f}")


@main.command("oracle-check")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--url", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--l-max", type=int, default=None)
@click.option("--selection-rule-m", type=int, default=None,
              help="also verify the m-fold symmetry selection rule")
@_mask_options
def oracle_check(config, url, out, l_max, selection_rule_m,
                 kind, arms, width_um, angle_deg, offsets_um, rotation_deg, seed, raster):
    """Compare the fast factorized path against the direct 2D integral."""
    payload = _load_config(config)
    mask = _common_mask_payload(kind, arms, width_um, angle_deg, offsets_um,
                                rotation_deg, seed, raster, payload.get("mask"))
    if mask is not None:
        payload["mask"] = mask
    if l_max is not None:
        payload["l_max"] = l_max
    if selection_rule_m is not None:
        payload["selection_rule_m"] = selection_rule_m

    with _client(url) as client:
        data = _post(client, "/oracle-check", payload)

    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write(outdir / "oracle_report.json", json.dumps(data, indent=2) + "\n")
    report = data["report"]
    click.echo(f"config_sha256 = {data['config_sha256']}")
    click.echo(f"max |error|   = {report['max_abs_error']:.3e} at {tuple(report['worst_entry'])}")
    click.echo(f"tolerance     = {report['tolerance']:.1e}")
    if data.get("selection_rule_ok") is not None:
        click.echo(f"selection rule: {'ok' if data['selection_rule_ok'] else 'VIOLATED'}")
    click.echo("PASS" if report["passed"] else "FAIL")
    if not report["passed"] or data.get("selection_rule_ok") is False:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    uvicorn.run("oamid.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
