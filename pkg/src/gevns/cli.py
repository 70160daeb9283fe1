"""
Command-line entry point.

    gevns simulate --config run.cfg --out out/
    gevns sweep    --config sweep.cfg --jobs 4
    gevns bounds   --config run.cfg
    gevns sync     --config run.cfg
    gevns radius   --spectrum spectrum.csv

JSON results go to stdout or files under --out; logs go to stderr.
Failures print {"error": <category>, "message": ...} on stderr and exit
with the category's code.
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional
import argparse
import io
import json
import logging
import math
import sys

from .bounds import bounds_report, strip_summary
from .checkpoint import save_checkpoint
from .config import Settings, config_echo, parse_settings
from .constants import LP_EXPONENTS
from .diagnostics import check_vorticity_bound, estimate_radius, on_attractor, read_spectrum_csv, write_csv
from .digest import get_default_checksum_provider
from .errors import BlowUpError, ConfigError, GevnsError
from .experiments import check_cutoff, compare_bounds, measured_m2p, row_csv_name, run_sweep, scan_determining_modes
from .models import NormSpec, RunManifest, _dumps, _json_float
from .solver import build_forcing, run
from .spectral import norm

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("simulate", "sweep", "bounds", "sync", "radius")
DEFAULT_OUT = "gevns-out"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gevns", description="Analyticity radius laboratory for damped-driven 2D Navier-Stokes")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True
    for name, help_text in (
        ("simulate", "Integrate one configuration and write diagnostics"),
        ("sweep", "Run a viscosity sweep and fit the radius scaling"),
        ("bounds", "Print every closed-form bound as JSON"),
        ("sync", "Master-slave determining-modes experiment"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="Config file path")
        p.add_argument("--out", default=DEFAULT_OUT, help=f"Output directory (default {DEFAULT_OUT})")
        p.add_argument("--seed", type=int, default=None, help="Override run.seed")
        if name == "sweep":
            p.add_argument("--jobs", type=int, default=1, help="Concurrent sweep rows (default 1)")
    p = sub.add_parser("radius", help="Fit the radius of a stored shell spectrum")
    p.add_argument("--spectrum", required=True, help="CSV with columns kappa,S")
    p.add_argument("--length", type=float, default=2.0 * math.pi, help="Domain period L")
    p.add_argument("--cutoff", type=int, default=None, help="Dealiasing cutoff (default: largest kappa)")
    return parser


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        datefmt="%Y%m%d %H%M%S",
    )


def load_settings(path: str, seed: Optional[int]) -> Settings:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e.strerror}", key=None) from None
    logger.info("[CONFIG] loaded %s", path)
    return parse_settings(text, seed=seed)


class OutputDir:
    """Collects artifacts and writes the manifest."""

    def __init__(self, path: str, config_path: Optional[str], echo: str):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.config_path = config_path
        self.echo = echo
        self.artifacts: Dict[str, bytes] = {}

    def write(self, name: str, data: bytes) -> Path:
        target = self.path / name
        target.write_bytes(data)
        self.artifacts[name] = data
        return target

    def write_text(self, name: str, text: str) -> Path:
        return self.write(name, text.encode("utf-8"))

    def adopt(self, name: str) -> None:
        """Register a file a worker wrote directly."""
        self.artifacts[name] = (self.path / name).read_bytes()

    def finish(self) -> RunManifest:
        checksums = get_default_checksum_provider()
        manifest = RunManifest(
            config_path=self.config_path,
            output_dir=str(self.path),
            config_echo=self.echo,
            artifacts={name: checksums.digest(data) for name, data in sorted(self.artifacts.items())},
            created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        (self.path / "manifest.json").write_text(manifest.to_json() + "\n")
        return manifest


def _csv_bytes(records) -> bytes:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue().encode("utf-8")


def cmd_simulate(args, settings: Settings) -> int:
    sim = settings.sim
    out = OutputDir(args.out, args.config, config_echo(settings))

    def on_checkpoint(state, payload: bytes) -> None:
        name = f"checkpoint_{state.t:012.6f}.gvns"
        out.write(name, payload)
        logger.info("[CKPT] wrote %s", name)

    try:
        result = run(sim, on_checkpoint=on_checkpoint)
    except BlowUpError as e:
        out.write("diagnostics.csv", _csv_bytes(e.records))
        if e.last_state is not None:
            out.write("checkpoint_last.gvns", save_checkpoint(e.last_state, sim))
        out.write_text("summary.json", _dumps({"error": e.category, "message": str(e),
                                                "last_time": e.last_time, "samples": len(e.records)}) + "\n")
        out.finish()
        raise

    out.write("diagnostics.csv", _csv_bytes(result.records))
    forcing = build_forcing(sim.forcing, sim.grid)
    summary: Dict[str, object] = {
        "t_final": result.final.t,
        "samples": len(result.records),
        "resolved": result.resolved,
        "run_radius": _json_float(result.radius),
        "accepted_samples": result.accepted_samples(),
    }
    margins = {}
    for p in LP_EXPONENTS:
        m = check_vorticity_bound(result.records, forcing, sim.params.mu, p)
        margins["inf" if math.isinf(p) else str(int(p))] = {
            "min_margin": _json_float(min(m.margins)) if m.margins else None,
            "violations": len(m.violations),
        }
    summary["vorticity_bound"] = margins
    if sim.forcing.modes and sim.params.nu > 0 and sim.params.mu > 0:
        report = bounds_report(sim.params, forcing, sim.grid, settings.bounds_sigma1, settings.constants)
        summary["bounds"] = report.to_dict()
        summary["on_attractor"] = on_attractor(result.records, report.dimensionless.forcing_linf,
                                               sim.params.mu, window=max(1, len(result.records) // 10))
        p = settings.values["bounds.p"]
        strip = strip_summary(sim.forcing, sim.params, sim.grid, p, settings.values["bounds.delta_f"],
                              measured_m2p(result, p, settings.values["bounds.headroom"]), settings.constants)
        summary["strip"] = {k: _json_float(v) if isinstance(v, float) else v for k, v in strip.items()}
    out.write_text("summary.json", _dumps(summary) + "\n")
    out.finish()
    logger.info("[RUN] wrote %d samples to %s", len(result.records), out.path)
    return 0


def cmd_sweep(args, settings: Settings) -> int:
    if settings.sweep is None:
        raise ConfigError("sweep needs sweep.nu_values", key="sweep.nu_values")
    out = OutputDir(args.out, args.config, config_echo(settings))
    result = run_sweep(settings.sweep, jobs=args.jobs, constants=settings.constants, out_dir=str(out.path))
    for row in result.rows:
        out.adopt(row_csv_name(row.index))
    summary: Dict[str, object] = {"sweep": result.to_dict()}
    try:
        summary["comparison"] = compare_bounds(result, settings.sweep.spread_factor).to_dict()
    except GevnsError as e:
        summary["comparison"] = {"error": e.category, "message": str(e)}
    out.write_text("summary.json", _dumps(summary) + "\n")
    out.finish()
    print(result.to_json())
    return 0


def cmd_bounds(args, settings: Settings) -> int:
    sim = settings.sim
    forcing = build_forcing(sim.forcing, sim.grid)
    report = bounds_report(sim.params, forcing, sim.grid, settings.bounds_sigma1, settings.constants)
    p = settings.values["bounds.p"]
    # attractor bound ‖ω‖_{2p} ≤ ‖F‖_{2p}/μ stands in for a measured M_{2p}
    m2p = norm(forcing, NormSpec.lp(2 * p)) / sim.params.mu * (1.0 + settings.values["bounds.headroom"])
    report.strip = strip_summary(sim.forcing, sim.params, sim.grid, p, settings.values["bounds.delta_f"],
                                 m2p, settings.constants)
    text = report.to_json()
    out = OutputDir(args.out, args.config, config_echo(settings))
    out.write_text("bounds.json", text + "\n")
    out.finish()
    print(text)
    return 0


def cmd_sync(args, settings: Settings) -> int:
    kappas = settings.kappa_values
    if not kappas:
        raise ConfigError("sync needs sync.kappa_c or sync.kappa_values", key="sync.kappa_values")
    for k in kappas:
        try:
            check_cutoff(settings.sim.grid, k)
        except ValueError as e:
            raise ConfigError(str(e), key="sync.kappa_values") from e
    out = OutputDir(args.out, args.config, config_echo(settings))
    scan = scan_determining_modes(settings.sim, kappas, settings.values["sync.horizon"],
                                  settings.values["sync.threshold"], settings.constants)
    text = scan.to_json()
    out.write_text("sync.json", text + "\n")
    out.finish()
    print(text)
    return 0


def cmd_radius(args) -> int:
    spectrum = read_spectrum_csv(args.spectrum, cutoff=args.cutoff, length=args.length)
    print(estimate_radius(spectrum).to_json())
    return 0


def report_error(e: GevnsError) -> int:
    print(json.dumps({"error": e.category, "message": str(e)}), file=sys.stderr)
    return e.exit_code


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    setup_logging(args.verbose)
    try:
        if args.command == "radius":
            return cmd_radius(args)
        settings = load_settings(args.config, args.seed)
        handler = {"simulate": cmd_simulate, "sweep": cmd_sweep, "bounds": cmd_bounds, "sync": cmd_sync}
        return handler[args.command](args, settings)
    except GevnsError as e:
        logger.error("[RUN] %s failed: %s", args.command, e)
        return report_error(e)
    except (OSError, ValueError) as e:
        logger.exception("[RUN] %s failed", args.command)
        print(json.dumps({"error": "error", "message": str(e)}), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())
