"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 solver failure,
4 a theorem-backed inequality failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .ball import ball_spectrum, multiplicity, mode_eigenvalue_simplified
from .geometry import Disk, Domain, domain_from_dict, perimeter
from .params import AdmissibilityError, PlateParams, SolverError
from .solver import solve_neumann_eps, solve_steklov
from .verification import (
    TheoremViolation,
    assert_margins,
    default_family,
    isoperimetric_sweep,
    mass_concentration_sweep,
    reciprocal_sum_bound,
    scaling_check,
)

log = logging.getLogger("biharmonic_steklov")

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_SOLVER, EXIT_THEOREM = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    """Everything needed to reproduce a run; embedded in every output file."""

    subcommand: str
    args: dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# ---------------------------------------------------------------------------
# output helpers


def _emit_json(doc: dict[str, Any], config: RunConfig, out: str | None) -> None:
    doc = {"config": asdict(config), **doc}
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    _write(text, out)


def _emit_csv(rows: list[dict[str, Any]], config: RunConfig, out: str | None) -> None:
    buf = io.StringIO()
    buf.write(f"# config: {config.to_json()}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _csv_value(v) for k, v in r.items()})
    _write(buf.getvalue(), out)


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v)
    return v


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _fmt(out: str | None, fmt: str | None, default: str) -> str:
    if fmt:
        return fmt
    if out and out.endswith(".csv"):
        return "csv"
    if out and out.endswith(".json"):
        return "json"
    return default


def read_config(path: str) -> RunConfig:
    """Recover the embedded :class:`RunConfig` from a JSON or CSV output file."""
    text = Path(path).read_text()
    if text.startswith("# config: "):
        data = json.loads(text.splitlines()[0][len("# config: "):])
    else:
        data = json.loads(text)["config"]
    return RunConfig(subcommand=data["subcommand"], args=data["args"], version=data.get("version", ""))


def _load_domain(spec: str | None) -> Domain:
    if spec is None:
        return Disk()
    if spec.lstrip().startswith("{"):
        return domain_from_dict(json.loads(spec))
    return domain_from_dict(json.loads(Path(spec).read_text()))


def _load_family(spec: str | None) -> list[tuple[str, Domain]]:
    if spec is None:
        return default_family()
    data = json.loads(Path(spec).read_text())
    if isinstance(data, dict):
        data = data.get("shapes", data.get("family"))
    family = []
    for k, item in enumerate(data):
        name = item.get("id", item.get("name", f"shape{k}"))
        dom = item.get("domain", item)
        family.append((name, domain_from_dict(dom)))
    return family


def _params(ns: argparse.Namespace, n: int | None = None) -> PlateParams:
    return PlateParams(n=n if n is not None else getattr(ns, "n", 2), tau=ns.tau, sigma=ns.sigma).validate()


def _config(ns: argparse.Namespace) -> RunConfig:
    args = {k: v for k, v in vars(ns).items() if k not in {"func", "out", "format", "verbose"}}
    return RunConfig(subcommand=args.pop("command") + (f" {args.pop('check')}" if "check" in args else ""), args=args)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ball_spectrum(ns: argparse.Namespace) -> int:
    """Print the sorted spectrum on stdout; write the full document to ``--out``."""
    params = _params(ns, ns.n)
    spec = ball_spectrum(params, ns.count)
    print(", ".join(f"{v:.12g}" for v in spec.eigenvalues))
    if ns.out is None:
        return EXIT_OK
    config = _config(ns)
    if _fmt(ns.out, ns.format, "json") == "csv":
        _emit_csv([{"index": k + 1, "eigenvalue": float(v)} for k, v in enumerate(spec.eigenvalues)], config, ns.out)
        return EXIT_OK
    modes = []
    for l in range(len(spec.clusters) + 1):
        lam = mode_eigenvalue_simplified(params, l)
        if lam > spec.eigenvalues[-1]:
            break
        modes.append({"l": l, "eigenvalue": lam, "multiplicity": multiplicity(params.n, l)})
    _emit_json({"spectrum": spec.to_dict(), "modes": modes}, config, ns.out)
    return EXIT_OK


def cmd_solve(ns: argparse.Namespace) -> int:
    params = _params(ns, 2)
    domain = _load_domain(ns.domain)
    if ns.neumann_eps is not None:
        if ns.mass is None:
            raise ValueError("--neumann-eps requires --mass")
        spec = solve_neumann_eps(domain, params, ns.mass, ns.neumann_eps, degree=ns.degree)
        problem = "neumann"
    else:
        spec = solve_steklov(domain, params, rho=ns.rho, degree=ns.degree)
        problem = "steklov"
    config = _config(ns)
    values = spec.eigenvalues[: ns.count]
    summary = ", ".join(f"{spec[c[0]]:.10g} (x{len(c)})" for c in spec.clusters[:6])
    msg = f"lambda_2 = {spec.lam(2):.12g}; clusters: {summary}"
    print(msg, file=sys.stderr if ns.out in (None, "-") else sys.stdout)
    doc = spec.to_dict()
    doc["eigenvalues"] = [float(v) for v in values]
    if doc["residuals"] is not None:
        doc["residuals"] = doc["residuals"][: ns.count]
    doc["clusters"] = [c for c in doc["clusters"] if c["indices"][0] < ns.count]
    _emit_json({"problem": problem, "domain": domain.to_dict(), **doc}, config, ns.out)
    return EXIT_OK


def cmd_verify(ns: argparse.Namespace) -> int:
    params = _params(ns, 2)
    config = _config(ns)
    fmt = _fmt(ns.out, ns.format, "csv")
    check = ns.check
    if check == "isoperimetric":
        reports = isoperimetric_sweep(
            _load_family(ns.family), params, degrees=ns.degrees, resolution=ns.resolution, threads=ns.threads
        )
        rows = [r.row() for r in reports]
        if fmt == "csv":
            _emit_csv(rows, config, ns.out)
        else:
            _emit_json({"reports": [dict(r.row(), domain=r.domain) for r in reports]}, config, ns.out)
        assert_margins(reports)
        return EXIT_OK
    domain = _load_domain(ns.domain)
    if check == "reciprocal-sum":
        res = reciprocal_sum_bound(domain, params, degree=ns.degree)
        row = {"bound": res.bound, "sum": res.total, "gap": res.gap, "lambda_2": res.lam2, "lambda_3": res.lam3}
        print(f"bound = {res.bound:.10g}, sum = {res.total:.10g}", file=sys.stderr)
        rows = [row]
    elif check == "scaling":
        res = scaling_check(domain, params, ns.s, degree=ns.degree)
        row = {"s": res.s, "lambda_2": res.lam2, "lambda_2_scaled": res.lam2_scaled, "rel_error": res.rel_error}
        print(f"relative error = {res.rel_error:.3e}", file=sys.stderr)
        rows = [row]
        if res.rel_error > ns.tol:
            _emit(rows, config, ns.out, fmt)
            raise TheoremViolation(f"scaling law error {res.rel_error:.3e} exceeds {ns.tol:.1e}")
    elif check == "mass-concentration":
        mass = ns.mass if ns.mass is not None else perimeter(domain)
        ref, table = mass_concentration_sweep(domain, params, mass, ns.eps, degree=ns.degree, threads=ns.threads)
        rows = [dict(asdict(r), steklov_lambda_2=ref) for r in table]
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(check)
    _emit(rows, config, ns.out, fmt)
    return EXIT_OK


def _emit(rows, config, out, fmt):
    if fmt == "csv":
        _emit_csv(rows, config, out)
    else:
        _emit_json({"rows": rows}, config, out)


def cmd_rerun(ns: argparse.Namespace) -> int:
    config = read_config(ns.file)
    parser = build_parser()
    argv = _argv_from_config(config)
    if ns.out:
        argv += ["--out", ns.out]
    sub = parser.parse_args(argv)
    return sub.func(sub)


def _argv_from_config(config: RunConfig) -> list[str]:
    argv = config.subcommand.split()
    for key, value in config.args.items():
        if value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif isinstance(value, list):
            argv += [flag, *map(str, value)]
        else:
            argv += [flag, str(value)]
    return argv


# ---------------------------------------------------------------------------


def _add_plate(p: argparse.ArgumentParser, tau: float = 1.0, sigma: float = 0.0) -> None:
    p.add_argument("--tau", type=float, default=tau, help="tension tau > 0 (default %(default)s)")
    p.add_argument(
        "--sigma", type=float, default=sigma,
        help="Poisson ratio, admissible in (-1/(n-1), 1) (default %(default)s)",
    )


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file (.json or .csv); stdout if omitted")
    p.add_argument("--format", choices=["json", "csv"], help="override the output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biharmonic-steklov",
        description="Spectra of the biharmonic Steklov plate problem and checks of its isoperimetric inequality.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "ball-spectrum",
        help="closed-form spectrum of the unit ball",
        description=(
            "Closed-form eigenvalues of the unit ball in R^n from the separated "
            "modes R_l(r) Y_l; the first positive eigenvalue is lambda_(1) = tau "
            "with multiplicity n."
        ),
    )
    p.add_argument("--n", type=int, default=2, help="dimension (default %(default)s)")
    _add_plate(p)
    p.add_argument("--count", type=int, default=10)
    _add_output(p)
    p.set_defaults(func=cmd_ball_spectrum)

    p = sub.add_parser(
        "solve",
        help="Rayleigh-Ritz spectrum on a planar domain",
        description=(
            "Polynomial Rayleigh-Ritz approximation of the weak eigenvalue problem "
            "with boundary density rho (Steklov) or with the mass-concentrating "
            "interior density rho_eps (free plate, --neumann-eps)."
        ),
    )
    p.add_argument("--domain", help="DomainSpec JSON file or inline JSON (default: unit disk)")
    _add_plate(p)
    p.add_argument("--degree", type=int, default=14)
    p.add_argument("--rho", type=float, default=1.0, help="constant boundary density")
    p.add_argument("--neumann-eps", type=float, help="shell width eps of rho_eps")
    p.add_argument("--mass", type=float, help="total mass M of rho_eps")
    p.add_argument("--count", type=int, default=20, help="eigenvalues to report")
    _add_output(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="numerical checks of the isoperimetric results")
    vsub = p.add_subparsers(dest="check", required=True)

    q = vsub.add_parser(
        "isoperimetric",
        help="stability inequality lambda_2(Omega) <= lambda_2(Omega*)(1 - delta_2 A(Omega)^2)",
        description=(
            "Quantitative isoperimetric inequality: for each shape (normalized to "
            "area pi) checks lambda_2(Omega) <= lambda_2(Omega*)(1 - delta_2 A^2), "
            "A the Fraenkel asymmetry. CSV columns: domain_id, measure, asymmetry, "
            "asymmetry_error, lam2, lam2_ball, stability_bound, margin, tolerance, "
            "degree, degree_change, ok, error, weak_margin."
        ),
    )
    q.add_argument("--family", help="JSON list of DomainSpecs (default: built-in 12 shapes)")
    _add_plate(q, sigma=0.3)
    q.add_argument("--degrees", type=int, nargs="+", default=[12, 14])
    q.add_argument("--resolution", type=int, default=2048, help="asymmetry grid size per axis")
    q.add_argument("--threads", type=int, default=None, help="worker threads (env STEKLOV_THREADS)")
    _add_output(q)
    q.set_defaults(func=cmd_verify)

    q = vsub.add_parser(
        "reciprocal-sum",
        help="1/lambda_2 + 1/lambda_3 >= int |x - x0|^2 dS / (tau |Omega|)",
        description=(
            "Reciprocal-sum bound from the coordinate trial functions "
            "(tau |Omega|)^(-1/2)(x_k - x0_k); tight on disks. "
            "Columns: bound, sum, gap, lambda_2, lambda_3."
        ),
    )
    q.add_argument("--domain")
    _add_plate(q)
    q.add_argument("--degree", type=int, default=14)
    _add_output(q)
    q.set_defaults(func=cmd_verify)

    q = vsub.add_parser(
        "scaling",
        help="lambda(tau, sigma, Omega) = s^3 lambda(tau/s^2, sigma, s Omega)",
        description="Dilation law for the eigenvalues. Columns: s, lambda_2, lambda_2_scaled, rel_error.",
    )
    q.add_argument("--domain")
    _add_plate(q)
    q.add_argument("--s", type=float, default=2.0)
    q.add_argument("--degree", type=int, default=14)
    q.add_argument("--tol", type=float, default=1e-6)
    _add_output(q)
    q.set_defaults(func=cmd_verify)

    q = vsub.add_parser(
        "mass-concentration",
        help="free-plate eigenvalues with rho_eps converge to Steklov ones as eps -> 0",
        description=(
            "Mass concentration at the boundary: lambda_2(rho_eps) approaches the "
            "Steklov lambda_2 with rho = M/|dOmega|. Columns: eps, lam1, lam2, gap, steklov_lambda_2."
        ),
    )
    q.add_argument("--domain")
    _add_plate(q)
    q.add_argument("--mass", type=float, help="total mass M (default |dOmega|)")
    q.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    q.add_argument("--degree", type=int, default=14)
    q.add_argument("--threads", type=int, default=None)
    _add_output(q)
    q.set_defaults(func=cmd_verify)

    p = sub.add_parser("rerun", help="re-execute the configuration embedded in an output file")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except AdmissibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TheoremViolation as exc:
        print(f"theorem check failed: {exc}", file=sys.stderr)
        return EXIT_THEOREM
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
