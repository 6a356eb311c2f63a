"""Command line: ``controlled-echo run --config FILE`` and ``controlled-echo verify --suite NAME``.

Config files are INI-style ``key = value`` sections::

    [run]
    name = fig1_ci
    protocol = fig1            # fig1 | fig2 | fig3 | two-level | two-level-double | inline
    access_mode = counter_intuitive
    sample_dt = 0.01
    outputs = rho23, rho13, rho12, rho33
    output_path = results

    [ensemble]
    n_groups = 201
    spacing = 2
    fwhm = 170

An inline protocol adds ``[scheme]`` (``n_levels``, ``transitions = 1-3, 2-3``),
``[pulses]`` (one pulse per line: ``name = transition, rabi, t_start, duration[, phase[, detuning]]``),
``[decay]`` (``gamma_13 = 50``, ``Gamma_31 = 0``) and ``[timing]`` (``t_end``,
optional ``t_A t_B t_R t_C t_e``, ``data = 1-3``, ``echo = 2-3``).
"""

from __future__ import annotations

import argparse
import configparser
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


from .analysis import extract_echo_metrics
from .core import DecayConfig, LevelScheme, Pulse
from .ensemble import EnsembleSpec, simulate_ensemble
from .errors import ConfigurationError, NumericalError
from .protocols import AccessMode, Probes, Protocol, named_protocol

log = logging.getLogger("controlled_echo")

_OBSERVABLE = re.compile(r"^(?:rho(\d)(\d)|pop(\d))$")


@dataclass
class RunConfig:
    name: str
    protocol: Protocol
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    sample_dt: float = 0.01
    outputs: list[tuple[int, int]] = field(default_factory=list)
    output_path: Path = Path(".")

    def __post_init__(self):
        n = self.protocol.scheme.n_levels
        for i, j in self.outputs:
            if not (1 <= i <= n and 1 <= j <= n):
                raise ConfigurationError(f"observable rho{i}{j} does not exist for {n} levels")


def parse_pair(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d)\s*-\s*(\d)\s*", text)
    if not m:
        raise ConfigurationError(f"cannot parse level pair {text!r}; expected e.g. 1-3")
    return int(m.group(1)), int(m.group(2))


def parse_observables(text: str) -> list[tuple[int, int]]:
    out = []
    for item in filter(None, (s.strip().lower() for s in text.split(","))):
        m = _OBSERVABLE.match(item)
        if not m:
            raise ConfigurationError(f"unknown observable {item!r}; use rhoIJ or popK")
        if m.group(3):
            k = int(m.group(3))
            out.append((k, k))
        else:
            out.append((int(m.group(1)), int(m.group(2))))
    return out


def _inline_protocol(cp: configparser.ConfigParser) -> Protocol:
    for section in ("scheme", "pulses", "timing"):
        if not cp.has_section(section):
            raise ConfigurationError(f"inline protocol needs a [{section}] section")
    scheme = LevelScheme(
        cp.getint("scheme", "n_levels"),
        tuple(parse_pair(s) for s in cp.get("scheme", "transitions").split(",") if s.strip()),
    )
    pulses = []
    for name, line in cp.items("pulses"):
        parts = [s.strip() for s in line.split(",")]
        if len(parts) < 4:
            raise ConfigurationError(f"pulse {name}: need transition, rabi, t_start, duration")
        try:
            values = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ConfigurationError(f"pulse {name}: {exc}") from None
        phase, detuning = (values[3:] + [0.0, 0.0])[:2]
        pulses.append(Pulse(parse_pair(parts[0]), values[0], values[1], values[2],
                            phase=phase, detuning=detuning, name=name))
    dephasing, population = {}, {}
    if cp.has_section("decay"):
        for key, value in cp.items("decay"):
            m = re.fullmatch(r"(gamma|Gamma)_(\d)(\d)", key)
            if not m:
                raise ConfigurationError(f"unknown decay key {key!r}; use gamma_ij or Gamma_ul")
            target = dephasing if m.group(1) == "gamma" else population
            target[(int(m.group(2)), int(m.group(3)))] = float(value)
    timing = cp["timing"]
    probes = None
    if all(k in timing for k in ("t_A", "t_B", "t_R", "t_C", "t_e")):
        probes = Probes(*(float(timing[k]) for k in ("t_A", "t_B", "t_R", "t_C", "t_e")))
    return Protocol(
        scheme=scheme,
        pulses=tuple(pulses),
        decay=DecayConfig(dephasing, population),
        probes=probes,
        t_end=float(timing["t_end"]),
        label=cp.get("run", "name", fallback="inline"),
        data_coherence=parse_pair(timing.get("data", "1-3")),
        echo_coherence=parse_pair(timing.get("echo", "2-3")),
        echo_map=timing.get("echo_map", "inversion"),
        raman_symmetric=False,
    )


def load_config(path: Path, overrides: Optional[dict] = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        if not cp.read(path):
            raise ConfigurationError(f"cannot read config {path}")
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None
    if not cp.has_section("run"):
        raise ConfigurationError("config needs a [run] section")
    run = cp["run"]
    name = run.get("protocol")
    if not name:
        raise ConfigurationError("[run] needs a protocol")
    if name == "inline":
        protocol = _inline_protocol(cp)
    else:
        try:
            mode = AccessMode(run.get("access_mode", AccessMode.COUNTER_INTUITIVE.value))
        except ValueError:
            raise ConfigurationError(f"unknown access_mode {run.get('access_mode')!r}") from None
        protocol = named_protocol(name, mode)
    ens = cp["ensemble"] if cp.has_section("ensemble") else {}
    kwargs = {
        "n_groups": int(ens.get("n_groups", 201)),
        "spacing": float(ens.get("spacing", 2.0)),
        "fwhm": float(ens.get("fwhm", 170.0)),
    }
    kwargs.update({k: v for k, v in (overrides or {}).items() if v is not None and k != "out"})
    outputs = run.get("outputs")
    if outputs is None:
        pairs = [protocol.data_coherence, protocol.echo_coherence]
        pairs += [(k, k) for k in range(1, protocol.scheme.n_levels + 1)]
        outputs_list = list(dict.fromkeys(pairs))
    else:
        outputs_list = parse_observables(outputs)
    out_dir = (overrides or {}).get("out") or run.get("output_path", ".")
    return RunConfig(
        name=run.get("name", path.stem),
        protocol=protocol,
        ensemble=EnsembleSpec(**kwargs),
        sample_dt=float(run.get("sample_dt", 0.01)),
        outputs=outputs_list,
        output_path=Path(out_dir),
    )


def csv_header(outputs) -> list[str]:
    cols = ["time"]
    for i, j in outputs:
        cols += [f"rho{i}{j}"] if i == j else [f"rho{i}{j}_re", f"rho{i}{j}_im"]
    return cols


def write_csv(path: Path, run, outputs) -> None:
    lines = [",".join(csv_header(outputs))]
    for t, rho in zip(run.times, run.mean_rho):
        row = [f"{t:.12g}"]
        for i, j in outputs:
            v = rho[i - 1, j - 1]
            row += [f"{v.real:.12g}"] if i == j else [f"{v.real:.12g}", f"{v.imag:.12g}"]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def execute(config: RunConfig, workers: int = 1) -> tuple[Path, Path]:
    """Simulate a configured run and write ``<name>.csv`` and ``<name>.report``."""
    config.output_path.mkdir(parents=True, exist_ok=True)
    run = simulate_ensemble(config.protocol, config.ensemble, config.sample_dt, workers=workers)
    csv_path = config.output_path / f"{config.name}.csv"
    report_path = config.output_path / f"{config.name}.report"
    write_csv(csv_path, run, config.outputs)
    p = config.protocol
    lines = [
        f"name={config.name}",
        f"protocol={p.label}",
        f"access_mode={p.access.value if p.access else 'none'}",
        f"n_groups={config.ensemble.n_groups}",
        f"spacing_khz={config.ensemble.spacing:.12g}",
        f"fwhm_khz={config.ensemble.fwhm:.12g}",
        f"sample_dt_us={config.sample_dt:.12g}",
    ]
    if p.probes is not None and any(q.name == "A" for q in p.pulses):
        rep = extract_echo_metrics(run, p)
        lines += rep.to_lines()
        lines.append(f"inverted={str(rep.population_inverted).lower()}")
    else:
        lines.append("echo=unavailable")
    report_path.write_text("\n".join(lines) + "\n")
    return csv_path, report_path


def _cmd_run(args) -> int:
    overrides = {"n_groups": args.groups, "spacing": args.spacing, "fwhm": args.fwhm, "out": args.out}
    config = load_config(Path(args.config), overrides)
    csv_path, report_path = execute(config, workers=args.workers)
    print(f"wrote {csv_path}")
    print(f"wrote {report_path}")
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import SUITES, run_suite

    if args.suite not in SUITES:
        raise ConfigurationError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    ok = run_suite(args.suite)
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="controlled-echo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a configured protocol")
    run.add_argument("--config", required=True, help="path to the run config")
    run.add_argument("--groups", type=int, help="override ensemble n_groups")
    run.add_argument("--spacing", type=float, help="override group spacing (kHz)")
    run.add_argument("--fwhm", type=float, help="override spin FWHM (kHz)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=int, default=1, help="threads for the ensemble")
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify", help="run an acceptance suite")
    verify.add_argument("--suite", required=True, help="invariants | oracles | figures")
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, NumericalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
