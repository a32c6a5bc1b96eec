"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 computation error,
4 validation failures.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ComputeError, ConfigError, ParameterError
from .grid import Shell, SpectralGrid
from .model import ModelParams, coupling_from_cooperativity, ensure_valid, updated
from .greens import polariton_eigenvalues, polariton_sweep

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_VALIDATION = 0, 2, 3, 4
OUT_ENV = "RYDCAV_OUT"
SUBCOMMANDS = ("polaritons", "linear", "pair", "spectrum", "threephoton", "validate")

DEFAULT_GRIDS = {
    "omega": (-6.0, 6.0, 200),
    "omega_cf": (0.0, 6.0, 200),
    "omega1": (-6.0, 6.0, 150),
    "omega2": (-6.0, 6.0, 150),
}
_PARAM_NAMES = {f.name for f in fields(ModelParams)}
_OUTPUT_KEYS = {"dir", "format", "svg", "overlay_polaritons", "check_poles", "threads"}


@dataclass
class RunConfig:
    params: ModelParams
    grids: dict = field(default_factory=dict)  # name -> (start, stop, num)
    out_dir: Path = Path(".")
    fmt: str = "csv"
    svg: bool = False
    overlay: bool = False
    check_poles: bool = False
    threads: int = 1

    def grid(self, name: str) -> np.ndarray:
        if name not in self.grids:
            raise ConfigError(f"grid '{name}' is not defined")
        start, stop, num = self.grids[name]
        return np.linspace(start, stop, num)

    def digest(self) -> str:
        """Hash of everything that influences numerical output."""
        canon = {
            "params": {k: repr(v) for k, v in self.params.to_dict().items()},
            "grids": {k: [repr(float(a)), repr(float(b)), int(n)] for k, (a, b, n) in sorted(self.grids.items())},
            "overlay": self.overlay,
            "check_poles": self.check_poles,
        }
        return hashlib.sha256(json.dumps(canon, sort_keys=True).encode()).hexdigest()[:16]


# -- configuration ------------------------------------------------------------


def _as_bool(section, key) -> bool:
    try:
        return section.getboolean(key)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def _as_float(section_name, key, text) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"[{section_name}] {key}: not a number: {text!r}") from None


def load_config(path: str | None, mhz: float | None = None) -> RunConfig:
    """Parse an INI-style file with [params], [grid.<name>] and [output].

    Unknown sections and keys are rejected.  In [params] ``cooperativity``
    may replace ``g_sqrt_n``.  With ``mhz`` set, every rate in [params] and
    every grid is read in MHz and divided by ``mhz`` (the value of gamma_e).
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None

    values: dict = {}
    grids = dict(DEFAULT_GRIDS)
    out = {}
    for name in cp.sections():
        sec = cp[name]
        if name == "params":
            for key, text in sec.items():
                if key not in _PARAM_NAMES | {"cooperativity"}:
                    raise ConfigError(f"[params] unknown key '{key}'")
                values[key] = _as_float(name, key, text)
        elif name.startswith("grid."):
            gname = name[len("grid."):]
            extra = set(sec) - {"start", "stop", "num"}
            if extra or not gname:
                raise ConfigError(f"[{name}] unknown key(s): {', '.join(sorted(extra))}")
            start, stop, num = grids.get(gname, (None, None, None))
            start = _as_float(name, "start", sec["start"]) if "start" in sec else start
            stop = _as_float(name, "stop", sec["stop"]) if "stop" in sec else stop
            num = int(_as_float(name, "num", sec["num"])) if "num" in sec else num
            if None in (start, stop, num) or num < 1 or (num > 1 and not stop > start):
                raise ConfigError(f"[{name}] needs start < stop and num >= 1")
            grids[gname] = (start, stop, num)
        elif name == "output":
            extra = set(sec) - _OUTPUT_KEYS
            if extra:
                raise ConfigError(f"[output] unknown key(s): {', '.join(sorted(extra))}")
            out = sec
        else:
            raise ConfigError(f"unknown section [{name}]")

    cooperativity = values.pop("cooperativity", None)
    try:
        params = ModelParams(**values)
        if mhz is not None:
            if not mhz > 0:
                raise ConfigError("--mhz needs the positive value of gamma_e in MHz")
            params = params.rescaled(1.0 / mhz)
            grids = {k: (a / mhz, b / mhz, n) for k, (a, b, n) in grids.items()}
        if cooperativity is not None:
            if "g_sqrt_n" in values:
                raise ConfigError("give either cooperativity or g_sqrt_n, not both")
            p = params
            params = updated(p, g_sqrt_n=coupling_from_cooperativity(cooperativity, p.gamma_c_f + p.gamma_c_d, p.gamma_e))
        params = ensure_valid(params)
    except ParameterError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from None

    cfg = RunConfig(params=ModelParams(**params.to_dict()), grids=grids)
    if out:
        if "dir" in out:
            cfg.out_dir = Path(out["dir"])
        if "format" in out:
            cfg.fmt = out["format"]
        for key, attr in (("svg", "svg"), ("overlay_polaritons", "overlay"), ("check_poles", "check_poles")):
            if key in out:
                setattr(cfg, attr, _as_bool(out, key))
        if "threads" in out:
            cfg.threads = int(_as_float("output", "threads", out["threads"]))
    return cfg


# -- output -------------------------------------------------------------------


def _header(cfg: RunConfig, command: str) -> dict:
    return {
        "artifact": "rydcav",
        "version": __version__,
        "command": command,
        "config_hash": cfg.digest(),
        "units": "gamma_e",
        "params": cfg.params.to_dict(),
    }


def _csv_header_lines(head: dict) -> list[str]:
    return [
        f"rydcav {head['version']} {head['command']}",
        f"config_hash: {head['config_hash']}",
        f"units: {head['units']}",
        "params: " + json.dumps(head["params"], sort_keys=True),
    ]


class Writer:
    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.head = _header(cfg, command)
        self.written: list[Path] = []
        try:
            cfg.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output directory {cfg.out_dir} is not writable: {exc}") from None
        if not os.access(cfg.out_dir, os.W_OK):
            raise ConfigError(f"output directory {cfg.out_dir} is not writable")

    def _write(self, name: str, text: str) -> Path:
        path = self.cfg.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.written.append(path)
        return path

    def grid(self, stem: str, grid: SpectralGrid) -> Path:
        if self.cfg.fmt == "json":
            doc = {"header": self.head, "grid": grid.to_dict()}
            return self._write(f"{stem}.json", json.dumps(doc, sort_keys=True) + "\n")
        return self._write(f"{stem}.csv", grid.to_csv(_csv_header_lines(self.head)))

    def table(self, stem: str, columns: dict) -> Path:
        names = list(columns)
        if self.cfg.fmt == "json":
            doc = {"header": self.head, "table": {k: [_jsonable(v) for v in columns[k]] for k in names}}
            return self._write(f"{stem}.json", json.dumps(doc, sort_keys=True) + "\n")
        lines = [f"# {line}" for line in _csv_header_lines(self.head)]
        lines.append(",".join(names))
        for row in zip(*(columns[k] for k in names)):
            lines.append(",".join(_cell(v) for v in row))
        return self._write(f"{stem}.csv", "\n".join(lines) + "\n")

    def svg_path(self, stem: str) -> Path:
        path = self.cfg.out_dir / f"{stem}.svg"
        self.written.append(path)
        return path


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


# -- subcommands --------------------------------------------------------------


def cmd_polaritons(cfg: RunConfig, w: Writer) -> int:
    om = cfg.grid("omega_cf")
    eps = polariton_sweep(om, cfg.params)
    w.table("polaritons", {"omega_cf": om, "eps1": eps[:, 0], "eps2": eps[:, 1], "eps3": eps[:, 2]})
    if cfg.svg:
        from .plotting import line_plot

        line_plot(om, {f"eps{k + 1}": eps[:, k] for k in range(3)}, w.svg_path("polaritons"), "omega_cf", "eps")
    return EXIT_OK


def cmd_linear(cfg: RunConfig, w: Writer) -> int:
    from .spectra import a_mean_first, a_mean_first_closed_form, a_mean_third, elastic_weight, elastic_weight_factorized
    from .twobody import Sector, bubble, t0, tring0

    p = cfg.params
    a = p.alpha
    rows = [
        ("a1", a_mean_first(p), a),
        ("a1_closed_form", a_mean_first_closed_form(p), a),
        ("a3", a_mean_third(p), a ** 3),
        ("elastic_weight", elastic_weight(p), a ** 4),
        ("elastic_weight_factorized", elastic_weight_factorized(p), a ** 4),
        ("bubble_nonsymmetric", bubble(0.0, Sector.NONSYMMETRIC, p).value, 1.0),
        ("bubble_symmetric", bubble(0.0, Sector.SYMMETRIC, p).value, 1.0),
        ("tring0", tring0(0.0, p), 1.0),
        ("t0", t0(p), 1.0),
    ]
    names = [r[0] for r in rows]
    vals = [complex(r[1]) for r in rows]
    # alpha powers are stripped in the *_stripped columns (1 where none applies)
    strip = [complex(r[1]) / r[2] if r[2] else complex("nan") for r in rows]
    w.table(
        "linear",
        {
            "quantity": names,
            "re": [v.real for v in vals],
            "im": [v.imag for v in vals],
            "re_stripped": [v.real for v in strip],
            "im_stripped": [v.imag for v in strip],
        },
    )
    return EXIT_OK


def cmd_pair(cfg: RunConfig, w: Writer) -> int:
    from .twobody import pair_amplitude, t0

    p = cfg.params
    T = t0(p)
    om = cfg.grid("omega")
    vals = np.array([pair_amplitude(x, p, T).value for x in om])
    cols = {}
    if p.alpha > 0:
        cols = {"re_per_alpha2": vals.real / p.alpha ** 2, "im_per_alpha2": vals.imag / p.alpha ** 2}
    grid = SpectralGrid(
        ("omega",), (om,), vals, Shell.LINE,
        {"observable": "pair_amplitude", "shell_constraint": "omega1 + omega2 = 0", "params_hash": p.digest(), "units": "gamma_e"},
        cols,
    )
    w.grid("pair", grid)
    if cfg.svg:
        from .plotting import line_plot

        line_plot(om, {"|pair|": np.abs(vals)}, w.svg_path("pair"), "omega", "|pair amplitude|", logy=True)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, w: Writer) -> int:
    from .spectra import spectrum_sweep

    p = cfg.params
    om, omcf = cfg.grid("omega"), cfg.grid("omega_cf")
    grid = spectrum_sweep(om, omcf, p, overlay=cfg.overlay, threads=cfg.threads)
    if p.alpha > 0:
        grid.columns["density_per_alpha4"] = grid.values / p.alpha ** 4
    w.grid("spectrum", grid)
    if cfg.svg:
        from .plotting import heatmap

        overlay = None
        if cfg.overlay:
            eps = polariton_sweep(omcf, p)
            overlay = [(omcf, s * eps[:, k]) for k in range(3) for s in (1, -1)]
        heatmap(grid, w.svg_path("spectrum"), "inelastic density", overlay)
    return EXIT_OK


def cmd_threephoton(cfg: RunConfig, w: Writer) -> int:
    from .threebody import solve_pole_values, three_photon_map, verify_pole_assumption

    p = cfg.params
    g1, g2 = cfg.grid("omega1"), cfg.grid("omega2")
    sol = solve_pole_values(p)
    grid = three_photon_map(g1, g2, p, sol, overlay=cfg.overlay, threads=cfg.threads)
    if p.alpha > 0:
        grid.columns["abs_per_alpha3"] = np.abs(grid.values) / p.alpha ** 3
    if cfg.check_poles:
        lo, hi = min(g1.min(), g2.min()), max(g1.max(), g2.max())
        rep = verify_pole_assumption(sol, p, scan_grid=np.linspace(lo, hi, 121))
        grid.metadata["pole_check"] = rep.to_dict()
        if not rep.passed:
            print("pole check failed; see output metadata", file=sys.stderr)
    w.grid("threephoton", grid)
    if cfg.svg:
        from .plotting import heatmap

        overlay = None
        if cfg.overlay:
            overlay = []
            lo, hi = g1.min(), g1.max()
            for e in polariton_eigenvalues(p).eps:
                for s in (1, -1):
                    x = s * e
                    overlay += [([x, x], [g2.min(), g2.max()]), ([lo, hi], [x, x]), ([lo, hi], [x - lo, x - hi])]
        heatmap(grid, w.svg_path("threephoton"), "|three-photon amplitude|", overlay)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, w: Writer) -> int:
    from .validation import run_all

    results = run_all()
    for r in results:
        print(r.line())
    report = {
        "header": w.head,
        "checks": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
    }
    w._write("validate.json", json.dumps(report, sort_keys=True, indent=1) + "\n")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


COMMANDS = {
    "polaritons": cmd_polaritons,
    "linear": cmd_linear,
    "pair": cmd_pair,
    "spectrum": cmd_spectrum,
    "threephoton": cmd_threephoton,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rydcav", description="Few-photon observables of a cavity Rydberg-EIT ensemble.")
    ap.add_argument("--version", action="version", version=f"rydcav {__version__}")
    ap.add_argument("command", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="INI file with [params], [grid.<name>] and [output] sections")
    ap.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or the current directory)")
    ap.add_argument("--format", choices=("csv", "json"), dest="fmt")
    ap.add_argument("--svg", action="store_true", default=None, help="also render an SVG figure")
    ap.add_argument("--overlay-polaritons", action="store_true", default=None, help="add +/- eps_k overlays")
    ap.add_argument("--check-poles", action="store_true", default=None, help="run the lower-half-plane pole scan (threephoton)")
    ap.add_argument("--threads", type=int, help="worker threads for grid evaluation")
    ap.add_argument("--mhz", type=float, metavar="GAMMA_E_MHZ", help="read rates and grids in MHz; the value given is gamma_e in MHz")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.mhz)
        if args.out is not None:
            cfg.out_dir = Path(args.out)
        elif args.config is None or cfg.out_dir == Path("."):
            cfg.out_dir = Path(os.environ.get(OUT_ENV, str(cfg.out_dir)))
        if args.fmt is not None:
            cfg.fmt = args.fmt
        if cfg.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {cfg.fmt!r}")
        for flag, attr in (("svg", "svg"), ("overlay_polaritons", "overlay"), ("check_poles", "check_poles")):
            if getattr(args, flag):
                setattr(cfg, attr, True)
        if args.threads is not None:
            cfg.threads = args.threads
        if cfg.threads < 1:
            raise ConfigError("--threads must be at least 1")
        writer = Writer(cfg, args.command)
        code = COMMANDS[args.command](cfg, writer)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ComputeError, ArithmeticError) as exc:
        print(f"compute error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    for path in writer.written:
        print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
