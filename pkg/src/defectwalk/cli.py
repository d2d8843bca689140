"""
Command-line interface.

    defectwalk <command> --config run.json [--out PATH] [overrides]

Commands: info, spectrum, birth, evolve, measure, probe, sweep.  CSV goes to
``--out`` (stdout when omitted); accompanying JSON metrics go to stdout, or
to stderr when the CSV itself occupies stdout.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure,
4 resource limit.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .birth import birth_vector, family_report, finite_support_family
from .config import RunConfig, initial_state, load_config, parse_anchors, parse_sign, parse_sites
from .errors import ConfigError, NumericalFailure, ResourceLimit, WalkError
from .measure import analytic_measure, compare, empirical_measure, overlaps
from .operators import build_dense_T, build_dense_U, mu_total, potential_v0
from .reporting import csv_text, json_text, write_text
from .spectral import (
    band_coverage,
    classify_eigenvalues,
    divergence_probe,
    resolvent_integral,
    summarize,
    torus_spectrum,
)
from .walk import LatticeWindow, WalkParameters, evolve, validate_params

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_RESOURCE = 0, 2, 3, 4


class _Output:
    """Route the main artifact to --out and metrics to whichever stream is free."""

    def __init__(self, out: str | None):
        self.out = out

    @property
    def to_stdout(self) -> bool:
        return self.out is None or self.out == "-"

    def artifact(self, text: str) -> None:
        write_text(text, self.out)

    def metrics(self, payload: dict) -> None:
        stream = sys.stderr if self.to_stdout else sys.stdout
        stream.write(json_text(payload))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_info(cfg: RunConfig, out: _Output) -> None:
    summary = summarize(cfg.params)
    out.artifact(json_text({"n": cfg.params.n, **summary.to_dict()}))


def cmd_spectrum(cfg: RunConfig, out: _Output) -> None:
    params = cfg.params
    summary = summarize(params)
    if cfg.operator == "U":
        op = build_dense_U(params, cfg.torus)
        deviation = {"unitarity_deviation": op.unitarity_deviation()}
    else:
        op = build_dense_T(params, cfg.torus)
        deviation = {"hermiticity_deviation": op.hermiticity_deviation()}
    ev = torus_spectrum(op)
    margin = 10.0 / cfg.torus
    if cfg.operator == "U":
        labels = classify_eigenvalues(ev, summary.band, exclusion=cfg.exclusion, margin=margin)
        cosines = np.cos(np.angle(ev))
        rows = ((i, z.real, z.imag, c, lab) for i, (z, c, lab) in enumerate(zip(ev, cosines, labels)))
    else:
        lo, hi = summary.band
        labels = ["band" if lo - margin <= v <= hi + margin else "outlier" for v in ev]
        rows = ((i, float(v), 0.0, float(v), lab) for i, (v, lab) in enumerate(zip(ev, labels)))
    out.artifact(csv_text(["index", "re", "im", "cos_arg", "classification"], rows))
    coverage = band_coverage(ev, summary.band, exclusion=cfg.exclusion, margin=margin)
    out.metrics(
        {
            "operator": cfg.operator,
            "torus": cfg.torus,
            "dimension": op.dimension,
            "band": list(summary.band),
            "margin": margin,
            "counts": {k: labels.count(k) for k in ("band", "plus_one", "minus_one", "outlier")},
            **coverage.to_dict(),
            **deviation,
        }
    )


def _state_rows(state, radius: int | None, profile=None):
    """Rows ``(*x, j, k, re, im[, profile])`` on the window of the given radius."""
    n = state.n
    src = state.window
    target = src if radius is None else LatticeWindow.zero_padded(radius, n)
    amps = np.zeros((n, 2), dtype=complex)
    for site in target.site_array():
        site = tuple(int(v) for v in site)
        inside = src.contains(site)
        block = state.amplitudes[src.index_of(site)] if inside else amps
        weight = (float(profile[src.index_of(site)]) if inside else 0.0) if profile is not None else None
        for j in range(n):
            for k in range(2):
                z = block[j, k]
                row = (*site, j + 1, k + 1, z.real, z.imag)
                if profile is not None:
                    row = (*row, weight if (j, k) == (0, 0) else None)
                yield row


def _site_header(n: int) -> list[str]:
    return ["x"] if n == 1 else [f"x{a + 1}" for a in range(n)]


def cmd_birth(cfg: RunConfig, out: _Output) -> None:
    params = cfg.params
    if cfg.anchors is not None:
        family = finite_support_family(params, cfg.sign, cfg.anchors)
        out.artifact(json_text({"sign": cfg.sign, **family_report(family)}))
        return
    vec = birth_vector(params, cfg.sign)
    header = [*_site_header(params.n), "j", "k", "re", "im", "profile"]
    out.artifact(csv_text(header, _state_rows(vec.state, cfg.radius, vec.profile)))
    out.metrics(
        {
            "sign": cfg.sign,
            "case": vec.spec.case_per_axis[0].value if params.n == 1 else [c.value for c in vec.spec.case_per_axis],
            "window_radius": list(vec.state.window.radii),
            "residual": vec.residual,
            "shift_residual": vec.shift_residual,
            "coin_residual": vec.coin_residual,
            "profile_sum": float(np.sum(vec.profile)),
        }
    )


def cmd_evolve(cfg: RunConfig, out: _Output) -> None:
    params = cfg.params
    psi0 = initial_state(cfg)
    final = psi0
    for final in evolve(params, psi0, cfg.steps):
        pass
    header = [*_site_header(params.n), "j", "k", "re", "im"]
    out.artifact(csv_text(header, _state_rows(final, cfg.radius)))
    out.metrics(
        {
            "steps": cfg.steps,
            "window_radius": list(final.window.radii),
            "initial_norm": psi0.norm(),
            "final_norm": final.norm(),
        }
    )


def cmd_measure(cfg: RunConfig, out: _Output) -> None:
    params = cfg.params
    psi0 = initial_state(cfg)
    sites = range(cfg.sites[0], cfg.sites[1] + 1)
    nu = analytic_measure(params, psi0, sites)
    emp = empirical_measure(params, psi0, cfg.horizon, sites)
    report = compare(nu, emp, sites, overlaps=overlaps(params, psi0), horizon=cfg.horizon)
    out.artifact(csv_text(["x", "nu_analytic", "nu_empirical", "abs_err"], report.rows()))
    out.metrics(report.to_dict())


def cmd_probe(cfg: RunConfig, out: _Output) -> None:
    params = cfg.params
    lam = potential_v0(params) if cfg.lam is None else cfg.lam
    mu, v0 = mu_total(params), potential_v0(params)
    if mu > 0 and v0 - 2 * mu < lam < v0 + 2 * mu:
        report = divergence_probe(params, lam, cfg.levels)
        kind = "divergence"
    else:
        report = resolvent_integral(params, lam)
        kind = "resolvent"
    out.artifact(csv_text(["level", "nodes", "value"], report.rows()))
    out.metrics({"probe": kind, **report.to_dict()})


def _swept_params(base: WalkParameters, p: float) -> WalkParameters:
    mod = math.sqrt(max(0.0, 1.0 - p * p))
    phases = [q / abs(q) if q != 0 else 1.0 for q in base.q]
    return validate_params([p] * base.n, [mod * ph for ph in phases], base.phi)


def cmd_sweep(cfg: RunConfig, out: _Output) -> None:
    if cfg.sweep is None:
        raise ConfigError("the sweep command needs a 'sweep' block {\"p\": [...]} in the config")
    rows = []
    for p in cfg.sweep:
        s = summarize(_swept_params(cfg.params, p))
        lo, hi = s.band
        rows.append((p, s.mu, s.V0, lo, hi, hi - lo, s.point_spectrum[0][1], s.point_spectrum[1][1]))
    header = ["p", "mu", "V0", "band_lo", "band_hi", "band_width", "M_plus", "M_minus"]

    def mult(m):
        return "inf" if m == math.inf else int(m)

    out.artifact(csv_text(header, ((*r[:6], mult(r[6]), mult(r[7])) for r in rows)))


COMMANDS = {
    "info": (cmd_info, "Band, arc and point-spectrum prediction as JSON."),
    "spectrum": (cmd_spectrum, "Dense torus eigenvalues with band-coverage metrics."),
    "birth": (cmd_birth, "Birth eigenvector (CSV) or finite-support family report (JSON)."),
    "evolve": (cmd_evolve, "Final state after --steps steps on the exact light cone."),
    "measure": (cmd_measure, "Analytic vs empirical time-averaged measure (n = 1)."),
    "probe": (cmd_probe, "Resolvent quadrature outside the band, divergence probe inside."),
    "sweep": (cmd_sweep, "Spectral summary over a grid of p values."),
}


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", default=None, metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--torus", type=int, metavar="N", help="torus period")
    common.add_argument("--operator", choices=["U", "T"], help="operator for 'spectrum'")
    common.add_argument("--steps", type=int, metavar="T", help="number of evolution steps")
    common.add_argument("--sign", choices=["+", "-"], help="birth eigenvalue")
    common.add_argument("--radius", type=int, metavar="R", help="output window radius")
    common.add_argument("--sites", metavar="A..B", help="site range for 'measure'")
    common.add_argument("--lambda", dest="lam", type=float, metavar="X", help="probe point")
    common.add_argument("--levels", type=int, metavar="L", help="divergence-probe levels")
    common.add_argument("--horizon", type=int, metavar="T", help="averaging horizon for 'measure'")
    common.add_argument("--initial", metavar="SPEC", help="initial state 'site:(c1,...,c2n);...'")
    common.add_argument("--anchors", metavar="LIST", help="anchors 'a,b;a,b;...' for n >= 2 families")
    common.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")

    parser = argparse.ArgumentParser(
        prog="defectwalk",
        description="Spectral analysis of split-step quantum walks with one coin defect.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        torus=args.torus,
        operator=args.operator,
        steps=args.steps,
        sign=None if args.sign is None else parse_sign(args.sign),
        radius=args.radius,
        sites=None if args.sites is None else parse_sites(args.sites),
        lam=args.lam,
        levels=args.levels,
        horizon=args.horizon,
        initial=args.initial,
        anchors=None if args.anchors is None else parse_anchors(args.anchors),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        out = _Output(args.out)
        if args.dump_config:
            out.artifact(json_text(cfg.to_dict()))
            return EXIT_OK
        COMMANDS[args.command][0](cfg, out)
    except ResourceLimit as exc:
        print(f"defectwalk: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except MemoryError:
        print("defectwalk: resource limit: out of memory", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalFailure as exc:
        print(f"defectwalk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except WalkError as exc:
        print(f"defectwalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
