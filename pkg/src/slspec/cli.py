"""Configuration ingestion, command dispatch, machine-readable reports.

One JSON config file describes the system, the boundary condition, and
the numerics (matrix-valued fields do not survive flag soup).  Reports
go to stdout or --out as JSON (default) or CSV, with floats rounded to a
configured number of significant digits so identical configs produce
byte-identical output.

Exit codes: 0 success, 2 config error, 3 degeneracy (0 is an eigenvalue
to tolerance), 4 verification failure.
"""

import argparse
import csv
import io
import json
import sys as _sys
import warnings as _warnings

import numpy as np

from . import hill, oracle, trace
from .coeffs import (
    ConstantPath,
    PolynomialPath,
    SampledPath,
    SLSystem,
    system_for_second_order,
)
from .errors import ConfigError, DegeneracyError, SlspecError, UnsupportedOracleError
from .symplectic import BoundaryPair, LagFrame, preset_dirichlet, preset_neumann, preset_robin

SCHEMA_VERSION = 1

NUMERICS_DEFAULTS = {
    "steps": 2048,
    "scan_range": [0.5, 100.0],
    "scan_points": 400,
    "refine_tol": 1e-10,
    "trace_order": 2,
    "oracle_terms": 1000,
    "mesh": 2048,
    "scan_confirm": True,
}
OUTPUT_DEFAULTS = {"format": "json", "precision": 12}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_VERIFY = 4

# Row tolerances for `verify`: the transcendental oracle is exact to
# roundoff, the finite-difference oracle is second order in the mesh.
VERIFY_TOL_ROBIN = 1e-5
VERIFY_TOL_FD = 1e-3
VERIFY_TOL_HILL = 1e-4
FD_TERMS_CAP = 400


def _matrix(value, what):
    if isinstance(value, (int, float)):
        return [[float(value)]]
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(f"{what} must be a matrix (nested row-major arrays) or a scalar")
    try:
        rows = [[float(x) for x in r] for r in value]
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{what} has a non-numeric entry") from err
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigError(f"{what} has ragged rows")
    return rows


def _parse_path(spec, what):
    if isinstance(spec, (int, float)):
        spec = {"type": "constant", "data": spec}
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"{what} must be a path spec {{type, data}}")
    kind = spec["type"]
    data = spec.get("data")
    try:
        if kind == "constant":
            return ConstantPath(np.array(_matrix(data, what)))
        if kind == "polynomial":
            if not isinstance(data, list) or not data:
                raise ConfigError(f"{what}: polynomial data must be a list of matrices")
            return PolynomialPath(tuple(np.array(_matrix(c, what)) for c in data))
        if kind == "sampled":
            if not isinstance(data, dict) or "grid" not in data or "values" not in data:
                raise ConfigError(f"{what}: sampled data must carry grid and values")
            grid = [float(t) for t in data["grid"]]
            values = tuple(np.array(_matrix(v, what)) for v in data["values"])
            return SampledPath(np.array(grid), values)
    except ConfigError:
        raise
    except (SlspecError, ValueError) as err:
        raise ConfigError(f"{what}: {err}") from err
    raise ConfigError(f"{what}: unknown path type {kind!r}")


def _parse_system(spec):
    if not isinstance(spec, dict):
        raise ConfigError("system must be an object")
    try:
        if "second_order" in spec:
            body = spec["second_order"]
            if not isinstance(body, dict) or "R" not in body or "T" not in body:
                raise ConfigError("second_order system needs fields R and T")
            r = _parse_path(body["R"], "system.second_order.R")
            return system_for_second_order(r, float(body["T"]))
        for key in ("n", "T", "P", "Q", "R", "R1"):
            if key not in spec:
                raise ConfigError(f"system missing field {key!r}")
        return SLSystem(
            n=int(spec["n"]),
            T=float(spec["T"]),
            P=_parse_path(spec["P"], "system.P"),
            Q=_parse_path(spec["Q"], "system.Q"),
            R=_parse_path(spec["R"], "system.R"),
            R1=_parse_path(spec["R1"], "system.R1"),
        )
    except ConfigError:
        raise
    except (SlspecError, ValueError, TypeError) as err:
        raise ConfigError(f"invalid system: {err}") from err


def _parse_boundary(spec, n):
    try:
        if spec == "dirichlet":
            return BoundaryPair(preset_dirichlet(n), preset_dirichlet(n))
        if spec == "neumann":
            return BoundaryPair(preset_neumann(n), preset_neumann(n))
        if isinstance(spec, dict) and "robin" in spec:
            body = spec["robin"]
            if not isinstance(body, dict) or "theta0" not in body or "theta1" not in body:
                raise ConfigError("robin boundary needs theta0 and theta1")
            return BoundaryPair(preset_robin(body["theta0"]), preset_robin(body["theta1"]))
        if isinstance(spec, dict) and "frames" in spec:
            body = spec["frames"]
            frames = []
            for name in ("Z0", "Z1"):
                if name not in body or "X" not in body[name] or "Y" not in body[name]:
                    raise ConfigError(f"frames boundary needs {name}.X and {name}.Y")
                frames.append(
                    LagFrame(
                        np.array(_matrix(body[name]["X"], f"boundary.{name}.X")),
                        np.array(_matrix(body[name]["Y"], f"boundary.{name}.Y")),
                    )
                )
            return BoundaryPair(*frames)
    except ConfigError:
        raise
    except (SlspecError, ValueError) as err:
        raise ConfigError(f"invalid boundary: {err}") from err
    raise ConfigError(f"unknown boundary spec: {spec!r}")


class JobConfig:
    """Validated job description: system, boundary, numerics, output."""

    def __init__(self, system, boundary, numerics, output, raw):
        self.system = system
        self.boundary = boundary
        self.numerics = numerics
        self.output = output
        self.raw = raw

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version} (expected {SCHEMA_VERSION})")
        if "system" not in data or "boundary" not in data:
            raise ConfigError("config needs 'system' and 'boundary'")
        unknown = set(data) - {"schema_version", "system", "boundary", "numerics", "output"}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")

        numerics = dict(NUMERICS_DEFAULTS)
        user_numerics = data.get("numerics", {})
        if not isinstance(user_numerics, dict):
            raise ConfigError("numerics must be an object")
        bad = set(user_numerics) - set(NUMERICS_DEFAULTS)
        if bad:
            raise ConfigError(f"unknown numerics fields: {sorted(bad)}")
        numerics.update(user_numerics)
        numerics["steps"] = int(numerics["steps"])
        numerics["scan_points"] = int(numerics["scan_points"])
        numerics["trace_order"] = int(numerics["trace_order"])
        numerics["oracle_terms"] = int(numerics["oracle_terms"])
        numerics["mesh"] = int(numerics["mesh"])
        numerics["refine_tol"] = float(numerics["refine_tol"])
        numerics["scan_confirm"] = bool(numerics["scan_confirm"])
        rng = numerics["scan_range"]
        if (
            not isinstance(rng, (list, tuple))
            or len(rng) != 2
            or not float(rng[0]) < float(rng[1])
        ):
            raise ConfigError("scan_range must be an increasing [lo, hi] pair")
        numerics["scan_range"] = [float(rng[0]), float(rng[1])]

        output = dict(OUTPUT_DEFAULTS)
        user_output = data.get("output", {})
        if not isinstance(user_output, dict):
            raise ConfigError("output must be an object")
        bad = set(user_output) - set(OUTPUT_DEFAULTS)
        if bad:
            raise ConfigError(f"unknown output fields: {sorted(bad)}")
        output.update(user_output)
        if output["format"] not in ("json", "csv"):
            raise ConfigError("output.format must be 'json' or 'csv'")
        output["precision"] = int(output["precision"])
        if not 1 <= output["precision"] <= 17:
            raise ConfigError("output.precision must be in 1..17")

        system = _parse_system(data["system"])
        boundary = _parse_boundary(data["boundary"], system.n)
        raw = {
            "schema_version": SCHEMA_VERSION,
            "system": data["system"],
            "boundary": data["boundary"],
            "numerics": numerics,
            "output": output,
        }
        return cls(system, boundary, numerics, output, raw)

    def to_dict(self):
        """Normalized config (defaults filled); round-trips field-identically."""
        return json.loads(json.dumps(self.raw))


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return JobConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Oracle coverage detection

def _constant_equal(path, target):
    return isinstance(path, ConstantPath) and np.array_equal(path.matrix, target)


def _second_order_curvature(sys_):
    """R with sys equivalent to y'' + lam R y = 0, or None."""
    n = sys_.n
    if (
        _constant_equal(sys_.P, np.eye(n))
        and _constant_equal(sys_.Q, np.zeros((n, n)))
        and _constant_equal(sys_.R, np.zeros((n, n)))
    ):
        return sys_.R1.scaled(-1.0)
    return None


def _frame_spans_dirichlet(frame):
    q = frame.orthonormal_basis()
    return float(np.linalg.norm(q[frame.n :, :])) <= 1e-10


def _frame_robin_angle(frame):
    """theta in [0, pi/2] with span = span(cos th; -sin th), n=1 only."""
    if frame.n != 1:
        return None
    v = frame.stacked[:, 0]
    v = v / np.linalg.norm(v)
    if v[0] < 0 or (v[0] == 0 and v[1] > 0):
        v = -v
    theta = float(np.arctan2(-v[1], v[0]))
    if -1e-12 <= theta <= np.pi / 2 + 1e-12:
        return min(max(theta, 0.0), np.pi / 2)
    return None


def _oracle_descriptor(cfg):
    """How to obtain reference eigenvalues for this job, if at all.

    Returns {"kind": "robin", "theta", "scale"} for the scalar constant
    mixed problem, {"kind": "fd", "curvature"} for definite Dirichlet
    problems, else None.
    """
    sys_ = cfg.system
    curvature = _second_order_curvature(sys_)
    if curvature is None:
        return None
    if (
        sys_.n == 1
        and isinstance(curvature, ConstantPath)
        and _frame_spans_dirichlet(cfg.boundary.Z0)
    ):
        c = float(curvature.matrix[0, 0])
        theta = _frame_robin_angle(cfg.boundary.Z1)
        if c > 0 and theta is not None:
            return {"kind": "robin", "theta": theta, "scale": c}
    if _frame_spans_dirichlet(cfg.boundary.Z0) and _frame_spans_dirichlet(cfg.boundary.Z1):
        return {"kind": "fd", "curvature": curvature}
    return None


def _truncated_product(spectrum, tail, sink):
    """hill.truncated_product with its flags folded into the report warnings."""
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        value = hill.truncated_product(spectrum, tail)
    sink.extend(str(w.message) for w in caught)
    return value


def _oracle_eigenvalues(cfg, desc, terms):
    if desc["kind"] == "robin":
        base = oracle.robin_roots(desc["theta"], cfg.system.T, terms)
        return np.asarray(base) / desc["scale"]
    mesh = cfg.numerics["mesh"]
    k = min(terms, FD_TERMS_CAP, cfg.system.n * (mesh - 1))
    return np.asarray(oracle.fd_dirichlet_eigs(desc["curvature"], cfg.system.T, mesh, k))


# ---------------------------------------------------------------------------
# Commands

def cmd_trace(cfg):
    num = cfg.numerics
    rep = trace.trace_report(cfg.system, cfg.boundary, num["trace_order"], num["steps"])
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "trace",
        "order": rep.order,
        "power_sums": list(rep.power_sums),
        "G_traces": [float(np.trace(g)) for g in rep.G],
        "G": [g.tolist() for g in rep.G],
        "P0": rep.P0.tolist(),
        "metadata": rep.metadata,
    }


def cmd_hill(cfg):
    num = cfg.numerics
    n_steps = num["steps"]
    quotient = hill.hill_quotient(cfg.system, cfg.boundary, n_steps)
    g0 = hill.hill_g(cfg.system, cfg.boundary, 0.0, n_steps)
    g1 = hill.hill_g(cfg.system, cfg.boundary, 1.0, n_steps)

    desc = _oracle_descriptor(cfg)
    warnings_out = []
    tail_value = None
    if desc is not None:
        eigs = _oracle_eigenvalues(cfg, desc, num["oracle_terms"])
        route = desc["kind"]
        try:
            tail = oracle.tail_sum(eigs, 1)
            tail_value = tail.value
        except (UnsupportedOracleError, ValueError) as err:
            tail = None
            warnings_out.append(f"tail estimate unavailable: {err}")
        product = _truncated_product(list(eigs), tail, warnings_out)
        terms = int(eigs.size)
    else:
        route = "located"
        spectrum = hill.locate_eigenvalues(
            cfg.system,
            cfg.boundary,
            num["scan_range"],
            scan_points=num["scan_points"],
            refine_tol=num["refine_tol"],
            N=n_steps,
        )
        tail = None
        if len(spectrum) >= 10:
            try:
                tail = oracle.tail_sum(np.asarray(spectrum.eigenvalues), 1)
                tail_value = tail.value
            except (UnsupportedOracleError, ValueError) as err:
                warnings_out.append(f"tail estimate unavailable: {err}")
        else:
            warnings_out.append("too few located eigenvalues for a tail estimate")
        product = _truncated_product(spectrum, tail, warnings_out)
        terms = len(spectrum)

    return {
        "schema_version": SCHEMA_VERSION,
        "command": "hill",
        "quotient": quotient,
        "g0": g0,
        "g1": g1,
        "truncated_product": product,
        "tail": tail_value,
        "residual": abs(quotient - product),
        "oracle_route": route,
        "eigenvalues_used": terms,
        "warnings": warnings_out,
        "metadata": {"steps": n_steps},
    }


def cmd_eigs(cfg):
    num = cfg.numerics
    spectrum = hill.locate_eigenvalues(
        cfg.system,
        cfg.boundary,
        num["scan_range"],
        scan_points=num["scan_points"],
        refine_tol=num["refine_tol"],
        N=num["steps"],
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "eigs",
        "scan_range": list(spectrum.scan_range),
        "eigenvalues": list(spectrum.eigenvalues),
        "brackets": [list(b) for b in spectrum.brackets],
        "multiplicity_estimate": list(spectrum.multiplicity_estimate),
        "residuals": list(spectrum.residuals),
        "count": len(spectrum),
        "metadata": {
            "steps": num["steps"],
            "scan_points": num["scan_points"],
            "refine_tol": num["refine_tol"],
        },
    }


def cmd_verify(cfg):
    num = cfg.numerics
    m = num["trace_order"]
    rep = trace.trace_report(cfg.system, cfg.boundary, m, num["steps"])
    desc = _oracle_descriptor(cfg)
    rows = []
    warnings_out = []

    eigs = None
    row_tol = None
    if desc is None:
        warnings_out.append("no oracle covers this configuration; rows are unverifiable")
    else:
        row_tol = VERIFY_TOL_ROBIN if desc["kind"] == "robin" else VERIFY_TOL_FD
        try:
            eigs = _oracle_eigenvalues(cfg, desc, num["oracle_terms"])
        except (UnsupportedOracleError, ValueError) as err:
            warnings_out.append(f"oracle refused: {err}")

    for k in range(1, m + 1):
        row = {"check": f"power_sum_{k}", "value": rep.power_sums[k - 1]}
        if eigs is None:
            row.update(oracle=None, tail=None, residual=None, tolerance=None, status="unverifiable")
        else:
            tail = 0.0
            try:
                tail = oracle.tail_sum(eigs, k).value
            except (UnsupportedOracleError, ValueError) as err:
                warnings_out.append(f"tail estimate unavailable for order {k}: {err}")
            reference = float(np.sum(1.0 / eigs**k)) + tail
            residual = abs(row["value"] - reference)
            row.update(
                oracle=reference,
                tail=tail,
                residual=residual,
                tolerance=row_tol,
                status="pass" if residual <= row_tol else "fail",
            )
        rows.append(row)

    quotient = hill.hill_quotient(cfg.system, cfg.boundary, num["steps"])
    row = {"check": "hill_quotient", "value": quotient}
    if eigs is None:
        row.update(oracle=None, tail=None, residual=None, tolerance=None, status="unverifiable")
    else:
        tail = None
        try:
            tail = oracle.tail_sum(eigs, 1)
        except (UnsupportedOracleError, ValueError):
            pass
        product = _truncated_product(list(eigs), tail, warnings_out)
        residual = abs(quotient - product)
        row.update(
            oracle=product,
            tail=None if tail is None else tail.value,
            residual=residual,
            tolerance=VERIFY_TOL_HILL,
            status="pass" if residual <= VERIFY_TOL_HILL else "fail",
        )
    rows.append(row)

    overall = "fail" if any(r["status"] == "fail" for r in rows) else "pass"
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "rows": rows,
        "overall": overall,
        "warnings": warnings_out,
        "metadata": {"steps": num["steps"], "trace_order": m, "oracle_terms": num["oracle_terms"]},
    }


def cmd_conjugate(cfg):
    num = cfg.numerics
    curvature = _second_order_curvature(cfg.system)
    if curvature is None:
        raise ConfigError("conjugate expects a second-order system (P=I, Q=0, R=0)")
    if not (
        _frame_spans_dirichlet(cfg.boundary.Z0) and _frame_spans_dirichlet(cfg.boundary.Z1)
    ):
        raise ConfigError("conjugate expects Dirichlet boundary conditions")
    value, certified = trace.conjugate_criterion(curvature, cfg.system.T, num["steps"])

    scan = {"performed": False}
    if num["scan_confirm"]:
        spectrum = hill.locate_eigenvalues(
            cfg.system,
            cfg.boundary,
            (1e-6, 1.0 + 1e-3),
            scan_points=num["scan_points"],
            refine_tol=num["refine_tol"],
            N=num["steps"],
        )
        in_unit = [lam for lam in spectrum.eigenvalues if lam <= 1.0 + 1e-6]
        scan = {
            "performed": True,
            "eigenvalues_in_unit_interval": in_unit,
            "confirms_no_conjugate_point": len(in_unit) == 0,
        }

    return {
        "schema_version": SCHEMA_VERSION,
        "command": "conjugate",
        "value": value,
        "certified": certified,
        "scan": scan,
        "metadata": {"steps": num["steps"]},
    }


COMMANDS = {
    "trace": cmd_trace,
    "hill": cmd_hill,
    "eigs": cmd_eigs,
    "verify": cmd_verify,
    "conjugate": cmd_conjugate,
}


# ---------------------------------------------------------------------------
# Serialization

def _round_floats(obj, digits):
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def render_json(report, precision):
    return json.dumps(_round_floats(report, precision), indent=2) + "\n"


def _csv_rows(report):
    cmd = report["command"]
    if cmd == "trace":
        header = ["order", "power_sum", "trace_G"]
        rows = [
            [k + 1, report["power_sums"][k], report["G_traces"][k]]
            for k in range(report["order"])
        ]
    elif cmd == "hill":
        header = ["quotient", "truncated_product", "tail", "residual", "g0", "g1"]
        rows = [[report[k] for k in header]]
    elif cmd == "eigs":
        header = ["index", "eigenvalue", "bracket_lo", "bracket_hi", "multiplicity", "residual"]
        rows = [
            [
                i + 1,
                report["eigenvalues"][i],
                report["brackets"][i][0],
                report["brackets"][i][1],
                report["multiplicity_estimate"][i],
                report["residuals"][i],
            ]
            for i in range(report["count"])
        ]
    elif cmd == "verify":
        header = ["check", "value", "oracle", "tail", "residual", "tolerance", "status"]
        rows = [[r[k] for k in header] for r in report["rows"]]
    elif cmd == "conjugate":
        header = ["value", "certified", "scan_performed", "eigenvalues_in_unit_interval"]
        scan = report["scan"]
        rows = [
            [
                report["value"],
                report["certified"],
                scan["performed"],
                ";".join(repr(x) for x in scan.get("eigenvalues_in_unit_interval", [])),
            ]
        ]
    else:  # pragma: no cover - dispatch guards this
        raise ValueError(f"no CSV layout for {cmd}")
    return header, rows


def render_csv(report, precision):
    header, rows = _csv_rows(_round_floats(report, precision))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def run(command, config_path, output_format=None, out_path=None, stream=None):
    """Execute one command against a config file; returns the exit code."""
    stream = stream if stream is not None else _sys.stdout
    try:
        cfg = load_config(config_path)
    except ConfigError as err:
        print(f"config error: {err}", file=_sys.stderr)
        return EXIT_CONFIG
    fmt = output_format or cfg.output["format"]
    if fmt not in ("json", "csv"):
        print(f"config error: unknown output format {fmt!r}", file=_sys.stderr)
        return EXIT_CONFIG
    try:
        report = COMMANDS[command](cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=_sys.stderr)
        return EXIT_CONFIG
    except DegeneracyError as err:
        print(f"degenerate problem: {err}", file=_sys.stderr)
        return EXIT_DEGENERATE

    text = (render_json if fmt == "json" else render_csv)(report, cfg.output["precision"])
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stream.write(text)

    if command == "verify" and report["overall"] == "fail":
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="slspec",
        description="Eigenvalue statistics of Sturm-Liouville systems with "
        "separated boundary conditions",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to the JSON job config")
    parser.add_argument("--output", choices=["json", "csv"], default=None,
                        help="override the config's output format")
    parser.add_argument("--out", default=None, help="write the report to this file")
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.output, args.out)


if __name__ == "__main__":
    raise SystemExit(main())
