"""Command-line front end.

``slspec <subcommand> --config FILE [--s RE,IM] [--sweep START:STOP:STEP]
[--max N] [--out FILE] [--format json|csv]``

Configuration files are INI-style::

    [problem]
    p = 2 + sin(2*pi*x)
    V = cos(2*pi*x)
    interval = 0, 1            ; optional

    [separated]                ; exactly one of separated / coupled / robin
    A1 = 1
    A2 = 0
    B1 = 1
    B2 = 0

    [numerics]                 ; optional
    L = 5
    ode_tol = 1e-10
    quad_tol = 1e-10
    lambda_max = 200           ; optional, for eigen and verify

A ``[coupled]`` section holds ``gamma, k11, k12, k21, k22`` and a ``[robin]``
section holds ``R1, R2``.  A JSON result document written by this tool is
also accepted as a configuration; its ``config`` entry is used.

Exit status: 0 on success, 1 when a verification fails or a numerical
method breaks down, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .characteristic import (
    PropagationError,
    delta_complex_form,
    ln_characteristic,
    wronskian_residual,
    zero_mode_detect,
)
from .funcexpr import DomainError
from .quadrature import QuadratureError
from .spectral import (
    NegativeSpectrumError,
    PoleError,
    functional_determinant,
    functional_determinant_prime,
    heat_coeff_closed_form,
    heat_coefficients,
    robin_to_separated,
    zeta,
    zeta_many,
)
from .wkb import CoupledBC, SeparatedBC, SLProblem, ln_characteristic_asymptotic, minus_branch_check

__all__ = ["ConfigError", "ProblemConfig", "load_config", "run", "main", "dumps"]

BC_SECTIONS = ("separated", "coupled", "robin")
BC_KEYS = {
    "separated": ("A1", "A2", "B1", "B2"),
    "coupled": ("gamma", "k11", "k12", "k21", "k22"),
    "robin": ("R1", "R2"),
}
DEFAULT_NUMERICS = {"L": 5, "ode_tol": 1e-10, "quad_tol": 1e-10, "lambda_max": None}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ProblemConfig:
    p: str
    V: str
    interval: tuple
    bc_kind: str
    bc_values: dict
    numerics: dict = field(default_factory=lambda: dict(DEFAULT_NUMERICS))

    def problem(self) -> SLProblem:
        return SLProblem(self.p, self.V, self.interval)

    def boundary(self, prob: SLProblem | None = None):
        """Boundary condition on the original interval; Robin data are translated."""
        v = self.bc_values
        if self.bc_kind == "separated":
            return SeparatedBC(v["A1"], v["A2"], v["B1"], v["B2"])
        if self.bc_kind == "coupled":
            return CoupledBC(v["gamma"], v["k11"], v["k12"], v["k21"], v["k22"])
        return robin_to_separated(prob or self.problem(), v["R1"], v["R2"])

    def to_dict(self):
        return {
            "problem": {"p": self.p, "V": self.V, "interval": list(self.interval)},
            self.bc_kind: dict(self.bc_values),
            "numerics": dict(self.numerics),
        }


# ---------------------------------------------------------------------------
# configuration


def _line_of(lines, section, key=None):
    current = None
    for no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if text.startswith("[") and text.endswith("]"):
            current = text[1:-1].strip().lower()
            if key is None and current == section:
                return no
            continue
        if key is not None and current == section and "=" in text:
            if text.split("=", 1)[0].strip().lower() == key.lower():
                return no
    return None


def _where(lines, section, key=None):
    no = _line_of(lines, section, key)
    loc = f"[{section}]" + (f" {key}" if key else "")
    return f"line {no}: {loc}" if no else loc


def _from_mapping(data: dict, lines=()) -> ProblemConfig:
    errors = []
    sections = {k.lower(): v for k, v in data.items()}
    prob = sections.get("problem")
    if prob is None:
        raise ConfigError(["missing [problem] section"])
    prob = {k.lower(): v for k, v in prob.items()}
    p = prob.get("p")
    if p is None or str(p).strip() == "":
        errors.append(f"{_where(lines, 'problem')}: missing required key p")
    V = str(prob.get("v", "0"))
    interval = (0.0, 1.0)
    if "interval" in prob:
        raw = prob["interval"]
        try:
            parts = raw if isinstance(raw, (list, tuple)) else str(raw).replace("[", "").replace("]", "").split(",")
            a, b = (float(t) for t in parts)
            if not a < b:
                raise ValueError
            interval = (a, b)
        except (TypeError, ValueError):
            errors.append(f"{_where(lines, 'problem', 'interval')}: interval must be two numbers a < b")

    present = [s for s in BC_SECTIONS if s in sections]
    kind = None
    values = {}
    if len(present) != 1:
        errors.append("exactly one of [separated], [coupled], [robin] is required"
                      + (f" (found {', '.join(present)})" if present else ""))
    else:
        kind = present[0]
        sec = {k.lower(): v for k, v in sections[kind].items()}
        for key in BC_KEYS[kind]:
            if key.lower() not in sec:
                errors.append(f"{_where(lines, kind)}: missing required key {key}")
                continue
            try:
                values[key] = float(sec[key.lower()])
            except (TypeError, ValueError):
                errors.append(f"{_where(lines, kind, key)}: {key} must be a number")

    numerics = dict(DEFAULT_NUMERICS)
    num = {k.lower(): v for k, v in sections.get("numerics", {}).items()}
    for key, conv in (("L", int), ("ode_tol", float), ("quad_tol", float), ("lambda_max", float)):
        if key.lower() in num and num[key.lower()] not in (None, ""):
            try:
                numerics[key] = conv(num[key.lower()])
            except (TypeError, ValueError):
                errors.append(f"{_where(lines, 'numerics', key)}: {key} must be a number")
    if not (isinstance(numerics["L"], int) and numerics["L"] >= 2):
        errors.append(f"{_where(lines, 'numerics', 'L')}: L must be an integer >= 2")
    for key in ("ode_tol", "quad_tol"):
        if not 1e-13 <= numerics[key] <= 1e-6:
            errors.append(f"{_where(lines, 'numerics', key)}: {key} must lie in [1e-13, 1e-6]")
    if numerics["lambda_max"] is not None and not numerics["lambda_max"] > 0:
        errors.append(f"{_where(lines, 'numerics', 'lambda_max')}: lambda_max must be positive")

    complete = kind is not None and len(values) == len(BC_KEYS[kind])
    if complete and kind != "robin":
        try:
            ProblemConfig("1", "0", interval, kind, values).boundary()
        except ValueError as exc:
            errors.append(f"{_where(lines, kind)}: {exc}")
    cfg = None
    if p is not None and str(p).strip():
        try:
            cfg_prob = SLProblem(str(p), V, interval)
        except (ValueError, SyntaxError, DomainError) as exc:
            errors.append(f"{_where(lines, 'problem')}: {exc}")
            cfg_prob = None
        if complete:
            cfg = ProblemConfig(str(p), V, interval, kind, values, numerics)
            if cfg_prob is not None and kind == "robin":
                try:
                    cfg.boundary(cfg_prob)
                except (ValueError, DomainError) as exc:
                    errors.append(f"{_where(lines, kind)}: {exc}")
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path) -> ProblemConfig:
    """Read and validate a configuration file (INI, or a JSON result document)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"line {exc.lineno}: invalid JSON: {exc.msg}"]) from None
        data = doc.get("config", doc)
        if not isinstance(data, dict):
            raise ConfigError(["JSON document has no config object"])
        return _from_mapping(data)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError([str(exc).replace("\n", " ")]) from None
    data = {s: dict(parser.items(s)) for s in parser.sections()}
    return _from_mapping(data, text.splitlines())


# ---------------------------------------------------------------------------
# serialization


def _fmt_float(x):
    x = float(x) + 0.0  # no negative zero in output
    if math.isnan(x) or math.isinf(x):
        return json.dumps(None)
    return "%.17g" % x


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent=2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands


def _parse_s(text):
    try:
        parts = [float(t) for t in text.split(",")]
    except ValueError:
        raise ConfigError([f"--s expects RE or RE,IM, got {text!r}"]) from None
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise ConfigError([f"--s expects RE or RE,IM, got {text!r}"])


def _parse_sweep(text):
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise ConfigError([f"--sweep expects START:STOP:STEP, got {text!r}"]) from None
    if step <= 0 or stop < start:
        raise ConfigError(["--sweep needs STEP > 0 and STOP >= START"])
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(n)]


def _doc(cfg, quantity, result, diagnostics):
    return {
        "tool": "slspec",
        "version": __version__,
        "quantity": quantity,
        "config": cfg.to_dict(),
        "result": result,
        "diagnostics": diagnostics,
    }


def _cmd_eigen(cfg, prob, bc, args):
    from .oracle import scan_eigenvalues

    I = prob.sqrt_p_integral()
    if args.max is not None:
        lam_max = (args.max + 3) * math.pi / I
    else:
        lam_max = cfg.numerics["lambda_max"] or 20 * math.pi / I
    eig = scan_eigenvalues(prob, bc, lam_max, tol=cfg.numerics["ode_tol"])
    vals = ([0.0] if eig.zero_mode else []) + [float(v) for v in eig.values]
    if args.max is not None:
        vals = vals[: args.max]
    rows = [(n, lam, lam * lam) for n, lam in enumerate(vals, start=1)]
    diag = {"lambda_max": lam_max, "zero_mode": eig.zero_mode, "weyl_expected": eig.weyl_expected,
            "grid_factor": eig.grid_factor, "double_roots": eig.double_roots}
    return ("eigenvalues", ["n", "lambda", "lambda_squared"], rows,
            {"eigenvalues": [{"n": r[0], "lambda": r[1], "lambda_squared": r[2]} for r in rows]}, diag)


def _zeta_record(v):
    return {"s": v.s, "zeta": v.total, "analytic_part": v.analytic_part, "pole_part": v.pole_part}


def _cmd_zeta(cfg, prob, bc, args):
    if args.sweep:
        svals = [complex(x, 0.0) for x in _parse_sweep(args.sweep)]
    else:
        svals = [_parse_s(args.s) if args.s else complex(0.75, 0.0)]
    L = cfg.numerics["L"]
    kw = dict(L=L, tol=cfg.numerics["ode_tol"], quad_tol=cfg.numerics["quad_tol"])
    try:
        vals = zeta_many(prob, bc, svals, **kw)
    except PoleError:
        if not args.sweep:
            raise
        vals = []
        for s in svals:
            try:
                vals.append(zeta(prob, bc, s, **kw))
            except PoleError:
                continue
    rows = [(v.s.real, v.s.imag, v.total.real, v.total.imag, v.analytic_part.real,
             v.analytic_part.imag, v.pole_part.real, v.pole_part.imag) for v in vals]
    cols = ["s_re", "s_im", "zeta_re", "zeta_im", "analytic_re", "analytic_im", "pole_re", "pole_im"]
    d = vals[0].diagnostics if vals else {}
    diag = {"L": L, "zero_mode": vals[0].zero_mode if vals else None, "ode_tol": cfg.numerics["ode_tol"],
            "quad_tol": cfg.numerics["quad_tol"], **{k: d[k] for k in d if k != "rho_evaluations"}}
    result = [_zeta_record(v) for v in vals]
    return "zeta", cols, rows, result if args.sweep else result[0], diag


def _cmd_det(cfg, prob, bc, args):
    L = cfg.numerics["L"]
    has_zero = zero_mode_detect(prob, bc)[0]
    fn = functional_determinant_prime if has_zero else functional_determinant
    res = fn(prob, bc, L=L, tol=cfg.numerics["ode_tol"], numeric_check=True)
    result = {"value": res.value, "log_value": res.log_value, "zero_mode_extracted": res.zero_mode_extracted,
              "route": res.route, "numeric_log_value": res.numeric_log_value,
              "route_discrepancy": res.route_discrepancy}
    diag = {"L": L, "ode_tol": cfg.numerics["ode_tol"], "zero_mode_detected": has_zero, **res.diagnostics}
    cols = list(result)
    return "determinant", cols, [tuple(result[c] for c in cols)], result, diag


def _cmd_heat(cfg, prob, bc, args):
    n_max = args.max if args.max is not None else 3
    if n_max < 0:
        raise ConfigError(["--max must be non-negative"])
    hc = heat_coefficients(prob, bc, n_max, L=max(cfg.numerics["L"], n_max - 1))
    rows = [(f"a_{idx:g}", idx, val) for idx, val in hc.values]
    diag = {"convention": hc.convention}
    if n_max >= 3:
        diag["closed_form_a1"] = heat_coeff_closed_form(prob, bc, "a1")
        diag["closed_form_a3/2"] = heat_coeff_closed_form(prob, bc, "a3/2")
    result = [{"name": r[0], "index": r[1], "value": r[2]} for r in rows]
    return "heat_coefficients", ["name", "index", "value"], rows, result, diag


def _cmd_asym(cfg, prob, bc, args):
    L = cfg.numerics["L"]
    tol = cfg.numerics["ode_tol"]
    zs = _parse_sweep(args.sweep) if args.sweep else list(np.geomspace(1.0, 200.0, 41))
    if any(z <= 0 for z in zs):
        raise ConfigError(["asym needs z > 0"])
    asym = ln_characteristic_asymptotic(prob, bc, L)
    rows = []
    for z in zs:
        cv = ln_characteristic(prob, bc, float(z), tol)
        a = float(asym.evaluate(z))
        rows.append((float(z), cv.log_abs, a, cv.log_abs - a, wronskian_residual(prob, float(z), tol)))
    cols = ["z", "ln_char", "asymptotic", "residual", "wronskian_residual"]
    result = [dict(zip(cols, r)) for r in rows]
    return "asymptotics", cols, rows, result, {"L": L, "ode_tol": tol, "kind": asym.kind}


def verification_checks(cfg: ProblemConfig, prob=None, bc=None):
    """Cross-checks between independent routes; list of ``(name, value, reference, tol, passed)``."""
    from .oracle import direct_zeta, heat_trace, scan_eigenvalues
    from .spectral import zeta_residue

    prob = prob or cfg.problem()
    bc = bc or cfg.boundary(prob)
    ubc = prob.unit_bc(bc)
    L = cfg.numerics["L"]
    tol = cfg.numerics["ode_tol"]
    checks = []

    def add(name, value, reference, limit, relative=False):
        err = abs(value - reference)
        if relative:
            err /= max(abs(reference), 1e-300)
        checks.append((name, value, reference, limit, bool(err <= limit)))

    worst_w = max(wronskian_residual(prob, z, tol) for z in (0.5, 5.0, 50.0, 200.0))
    add("wronskian_residual", worst_w, 0.0, 1e-9)
    add("wkb_minus_branch", minus_branch_check(prob, np.linspace(0, 1, 9), min(L, 5)), 0.0, 1e-9)
    if isinstance(ubc, CoupledBC):
        z = 2.0
        cf = delta_complex_form(prob, ubc, z, tol, unit=True)
        ref = ln_characteristic(prob, ubc, z, tol, unit=True)
        add("coupled_imaginary_part", abs(cf.imag) / max(1.0, abs(cf.real)), 0.0, 1e-9)
        add("coupled_real_part", cf.real, ref.value, 1e-8, relative=True)

    has_zero, zdata = zero_mode_detect(prob, bc)
    fn = functional_determinant_prime if has_zero else functional_determinant
    det = fn(prob, bc, L=L, tol=tol, numeric_check=True)
    label = "det_prime" if has_zero else "det"
    add(f"{label}_closed_vs_numeric", det.numeric_log_value, det.log_value, 1e-6)
    if has_zero:
        add("zero_mode_limit_forms", abs(zdata.limit_over_z2()), abs(det.diagnostics["limit_over_z2"]), 1e-6,
            relative=True)

    I = prob.sqrt_p_integral()
    lam_max = cfg.numerics["lambda_max"] or 60 * math.pi / I
    eig = scan_eigenvalues(prob, bc, lam_max, tol=tol)
    add("weyl_count", eig.count, eig.weyl_expected, 2.0)
    z_cont = zeta(prob, bc, 0.75, L=L, tol=tol, quad_tol=cfg.numerics["quad_tol"]).total
    add("zeta_0.75_vs_oracle", direct_zeta(prob, bc, 0.75, eigen=eig).value.real, z_cont.real, 1e-4)

    eps = 1e-3
    r = [e * zeta(prob, bc, 0.5 + e, L=L, tol=tol).total.real for e in (eps, eps / 2)]
    add("residue_at_half", 2 * r[1] - r[0], zeta_residue(prob, bc, 0), 1e-4)

    t = 1e-3
    hc = heat_coefficients(prob, bc, 5, L=max(L, 4))
    ht = heat_trace(prob, bc, t)
    add("heat_trace_t=1e-3", hc.trace(t), ht.value, 1e-4, relative=True)
    add("heat_a1_closed_form", heat_coeff_closed_form(prob, bc, "a1"), hc[1.0], 1e-9)
    add("heat_a3/2_closed_form", heat_coeff_closed_form(prob, bc, "a3/2"), hc[1.5], 1e-9)
    return checks, det


def _cmd_verify(cfg, prob, bc, args):
    checks, det = verification_checks(cfg, prob, bc)
    cols = ["check", "value", "reference", "tolerance", "passed"]
    rows = [(c[0], float(c[1]), float(c[2]), float(c[3]), c[4]) for c in checks]
    result = {"passed": all(c[4] for c in checks), "checks": [dict(zip(cols, r)) for r in rows],
              "determinant": det.value, "zero_mode_extracted": det.zero_mode_extracted}
    return "verification", cols, rows, result, {"L": cfg.numerics["L"], "ode_tol": cfg.numerics["ode_tol"]}


COMMANDS = {
    "eigen": _cmd_eigen,
    "zeta": _cmd_zeta,
    "det": _cmd_det,
    "heat": _cmd_heat,
    "verify": _cmd_verify,
    "asym": _cmd_asym,
}


def _parser():
    ap = argparse.ArgumentParser(prog="slspec", description="Spectral functions of Sturm-Liouville operators.")
    ap.add_argument("--version", action="version", version=f"slspec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "eigen": "eigenvalue table from the real-axis scan",
        "zeta": "continued zeta function at --s or over --sweep",
        "det": "functional determinant (primed if zero is an eigenvalue)",
        "heat": "heat-kernel coefficients a_0 .. a_{max/2}",
        "verify": "cross-check independent routes on this problem",
        "asym": "ln Char(iz) against its large-z expansion over a z grid",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="problem definition file")
        sp.add_argument("--s", help="complex argument RE or RE,IM")
        sp.add_argument("--sweep", help="START:STOP:STEP (s for zeta, z for asym)")
        sp.add_argument("--max", type=int, help="number of eigenvalues or highest heat index n (a_{n/2})")
        sp.add_argument("--out", help="write output to this file instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def run(argv=None) -> int:
    """Run the command line with ``argv``; return the exit status."""
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        cfg = load_config(args.config)
        prob = cfg.problem()
        bc = cfg.boundary(prob)
        quantity, cols, rows, result, diag = COMMANDS[args.command](cfg, prob, bc, args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"slspec: input error: {err}", file=sys.stderr)
        return 2
    except (NegativeSpectrumError, PropagationError, QuadratureError, ArithmeticError, RuntimeError) as exc:
        print(f"slspec: numerical failure in {type(exc).__module__}: {exc}", file=sys.stderr)
        return 1
    except (PoleError, ValueError, DomainError) as exc:
        print(f"slspec: input error: {exc}", file=sys.stderr)
        return 2
    text = _csv_text(cols, rows) if args.format == "csv" else dumps(_doc(cfg, quantity, result, diag))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and not result["passed"]:
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
