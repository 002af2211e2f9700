"""Command-line front end: INI config in, CSV (or a text report) out.

Config grammar (one level of [section] headers, key = value lines, # comments):

    [model]      kind = su2 | hw, j = 1 (su2), d = 3 (hw), gap = 1.0
    [worldline]  accel = 1.0, switching = 50, i_epsilon = 1e-6 (optional)
    [regulator]  scheme = tanh | nascent | iepsilon, a0 = 0.25 (optional)
    [detector]   coupling = 0.01, and at most one of
                   initial_index = 2
                   initial_populations = 0.5, 0.3, 0.2
                   initial_rows = 0.5, 0.5 ; 0.5, 0.5   (complex literals ok)
    [sweep]      axis = accel | switching | gap | a0, start, stop, points,
                 scale = linear | log                   (optional section)
    [kms]        omegas = 0.25, 0.5, 1, window = 50     (kms-check only)

Exit codes: 0 success, 2 configuration error, 3 quadrature failure.
"""
import argparse
import configparser
import csv
import dataclasses
import io
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from .diagnostics import INDETERMINATE, coherence_norm, edr
from .exceptions import ConfigError, QuadratureError, UnsupportedRegulatorError
from .perturbation import assemble_final_state, run_oracle_suites, second_order_correction
from .qudit_algebra import DensityMatrix, build_hw_model, build_su2_model
from .response_integrals import (
    IEpsilon,
    IntegralParams,
    NascentDelta,
    TanhHeaviside,
    build_table,
    full_plane_transform,
    half_plane_transform,
)
from .wightman import WorldlineParams, kms_fourier_ratio

EXIT_OK, EXIT_CONFIG, EXIT_QUADRATURE = 0, 2, 3
ORACLE_THRESHOLD = 1e-10
SWEEP_AXES = ("accel", "switching", "gap", "a0")


def fmt(x):
    return format(float(x), ".17g")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    kind: str
    size: float
    gap: float
    accel: float
    switching: float
    i_epsilon: float
    scheme: str
    a0: float
    coupling: float
    initial: tuple
    sweep: tuple = None
    kms_omegas: tuple = ()
    kms_window: float = None

    def at(self, value):
        """Copy with the sweep axis set to value."""
        if self.sweep is None:
            return self
        return dataclasses.replace(self, **{self.sweep[0]: float(value)})

    def sweep_values(self):
        if self.sweep is None:
            return [math.nan]
        axis, start, stop, points, scale = self.sweep
        if scale == "log":
            return list(np.geomspace(start, stop, points))
        return list(np.linspace(start, stop, points))

    def model(self):
        if self.kind == "su2":
            return build_su2_model(self.size, self.gap)
        return build_hw_model(int(self.size), self.gap)

    def params(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            wl = WorldlineParams(self.accel, self.switching, self.i_epsilon)
            if self.scheme == "iepsilon":
                reg = IEpsilon()
            else:
                a0 = self.a0 if self.a0 is not None else self.switching / 200
                reg = (TanhHeaviside if self.scheme == "tanh" else NascentDelta)(a0)
            return IntegralParams(wl, reg)

    def initial_state(self, dim):
        how, data = self.initial
        if how == "index":
            if not 0 <= data < dim:
                raise ConfigError(f"index {data} out of range for dim {dim}",
                                  "[detector] initial_index")
            rho = np.zeros((dim, dim), dtype=complex)
            rho[data, data] = 1
        elif how == "populations":
            if len(data) != dim:
                raise ConfigError(f"expected {dim} populations", "[detector] initial_populations")
            rho = np.diag(np.array(data, dtype=complex))
        else:
            rho = np.array(data, dtype=complex)
            if rho.shape != (dim, dim):
                raise ConfigError(f"expected {dim}x{dim} rows", "[detector] initial_rows")
        try:
            return DensityMatrix(rho)
        except ValueError as err:
            raise ConfigError(str(err), "[detector] initial state") from err


def _get(cp, section, key, conv=float, default=None, required=True):
    where = f"[{section}] {key}"
    if not cp.has_option(section, key):
        if required and default is None:
            raise ConfigError("missing value", where)
        return default
    raw = cp.get(section, key).strip()
    try:
        return conv(raw)
    except (ValueError, SyntaxError) as err:
        raise ConfigError(f"cannot parse {raw!r}: {err}", where) from err


def _positive(value, where):
    if value is not None and not (math.isfinite(value) and value > 0):
        raise ConfigError(f"must be positive, got {value!r}", where)
    return value


def _floats(raw):
    return tuple(float(x) for x in raw.split(",") if x.strip())


def _rows(raw):
    return tuple(tuple(complex(x.replace(" ", "")) for x in row.split(","))
                 for row in raw.split(";"))


def load_config(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}", str(path)) from err
    except configparser.Error as err:
        raise ConfigError(str(err).replace("\n", " "), str(path)) from err

    kind = _get(cp, "model", "kind", str)
    if kind not in ("su2", "hw"):
        raise ConfigError(f"unknown model kind {kind!r}", "[model] kind")
    size = _get(cp, "model", "j", lambda s: float(Fraction(s))) if kind == "su2" else _get(cp, "model", "d", int)
    gap = _positive(_get(cp, "model", "gap"), "[model] gap")
    accel = _positive(_get(cp, "worldline", "accel"), "[worldline] accel")
    switching = _positive(_get(cp, "worldline", "switching"), "[worldline] switching")
    i_eps = _positive(_get(cp, "worldline", "i_epsilon", required=False), "[worldline] i_epsilon")
    scheme = _get(cp, "regulator", "scheme", str, default="tanh")
    if scheme not in ("tanh", "nascent", "iepsilon"):
        raise ConfigError(f"unknown scheme {scheme!r}", "[regulator] scheme")
    a0 = _positive(_get(cp, "regulator", "a0", required=False), "[regulator] a0")
    coupling = _get(cp, "detector", "coupling", default=0.0)

    given = [k for k in ("initial_index", "initial_populations", "initial_rows")
             if cp.has_option("detector", k)]
    if len(given) > 1:
        raise ConfigError("give at most one initial state", "[detector]")
    if not given:
        initial = ("index", 0)
    elif given[0] == "initial_index":
        initial = ("index", _get(cp, "detector", "initial_index", int))
    elif given[0] == "initial_populations":
        initial = ("populations", _get(cp, "detector", "initial_populations", _floats))
    else:
        initial = ("rows", _get(cp, "detector", "initial_rows", _rows))

    sweep = None
    if cp.has_section("sweep"):
        axis = _get(cp, "sweep", "axis", str)
        if axis not in SWEEP_AXES:
            raise ConfigError(f"axis must be one of {SWEEP_AXES}", "[sweep] axis")
        start = _positive(_get(cp, "sweep", "start"), "[sweep] start")
        stop = _positive(_get(cp, "sweep", "stop"), "[sweep] stop")
        points = _get(cp, "sweep", "points", int)
        scale = _get(cp, "sweep", "scale", str, default="linear")
        if points < 1 or (points > 1 and stop <= start):
            raise ConfigError("sweep range must be nonempty and increasing", "[sweep]")
        if scale not in ("linear", "log"):
            raise ConfigError("scale must be linear or log", "[sweep] scale")
        sweep = (axis, start, stop, points, scale)

    omegas, window = (), None
    if cp.has_section("kms"):
        omegas = _get(cp, "kms", "omegas", _floats)
        window = _positive(_get(cp, "kms", "window", required=False), "[kms] window")

    cfg = RunConfig(kind, size, gap, accel, switching, i_eps, scheme, a0, coupling,
                    initial, sweep, omegas, window)
    # surface construction errors as config errors, at every sweep point
    for value in cfg.sweep_values():
        point = cfg.at(value)
        try:
            model = point.model()
            point.params()
        except ValueError as err:
            raise ConfigError(str(err), "[model]/[worldline]/[regulator]") from err
        point.initial_state(model.dim)
    return cfg


# --------------------------------------------------------------------------
# per-point row builders (top level so they pickle for --jobs)


def _integral_specs(cfg):
    W = cfg.gap
    specs = [("I", W, W, "none"), ("Lp", W, -W, "none"), ("Lm", -W, W, "none"),
             ("Q", W, W, "+"), ("Rp", W, -W, "+"), ("Rm", -W, W, "+")]
    if cfg.kind == "hw":
        q = 1.5 * W
        specs += [("L_q+", q, -q, "none"), ("L_q-", -q, q, "none"),
                  ("R_q-", -q, q, "+"), ("U_q+", q, 0.0, "none"),
                  ("U_q-", -q, 0.0, "none"), ("U_0", 0.0, 0.0, "none"),
                  ("V+_q+", q, 0.0, "+"), ("V-_q+", q, 0.0, "-")]
    return specs


def integrals_header(cfg):
    head = ["sweep_value"]
    for name, *_ in _integral_specs(cfg):
        head += [f"re_{name}", f"im_{name}", f"err_{name}"]
    return head


def integrals_row(cfg, value):
    point = cfg.at(value)
    p = point.params()
    row, failed = [fmt(value)], False
    for _, w1, w2, hl in _integral_specs(point):
        try:
            if hl == "none":
                val, err = full_plane_transform(w1, w2, p, full_output=True)
            else:
                val, err = half_plane_transform(w1, w2, hl, p, full_output=True)
            row += [fmt(val.real), fmt(val.imag), fmt(err)]
        except UnsupportedRegulatorError:
            row += ["nan"] * 3
        except QuadratureError as exc:
            row += ["nan", "nan", fmt(exc.achieved_error)]
            failed = True
    return row, failed


def evolve_header(cfg):
    d = cfg.model().dim
    head = ["sweep_value"]
    for tag in ("init", "corr", "final"):
        for m in range(d):
            for n in range(d):
                head += [f"re_{tag}_{m}{n}", f"im_{tag}_{m}{n}"]
    return head + ["trace", "min_eigenvalue", "coherence_norm", "worst_error"]


def evolve_row(cfg, value):
    point = cfg.at(value)
    model = point.model()
    d = model.dim
    rho = point.initial_state(d)
    try:
        p = point.params()
        report = second_order_correction(model, rho, p, point.coupling)
    except QuadratureError as exc:
        n = 3 * 2 * d * d
        return [fmt(value)] + ["nan"] * (n + 3) + [fmt(exc.achieved_error)], True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        final = assemble_final_state(rho, report)
    row = [fmt(value)]
    for mat in (rho.entries, report.correction, final.entries):
        for x in np.asarray(mat).ravel():
            row += [fmt(x.real), fmt(x.imag)]
    lam_min = np.linalg.eigvalsh(final.entries)[0]
    row += [fmt(np.trace(final.entries).real), fmt(lam_min),
            fmt(coherence_norm(final)), fmt(report.worst_error)]
    return row, False


EDR_HEADER = ["sweep_value", "from_level", "to_level", "forward", "backward",
              "ratio", "target", "residual"]


def edr_rows(cfg, value):
    point = cfg.at(value)
    model = point.model()
    coupling = point.coupling if point.coupling else 1.0
    try:
        p = point.params()
        table = build_table(model, p)
    except QuadratureError:
        return [[fmt(value), "nan", "nan", "nan", "nan", "nan", "nan", "nan"]], True
    rows = []
    for i in range(model.dim):
        for j in range(i + 1, model.dim):
            v = edr(model, i, j, p, coupling, table)
            ratio = v.ratio if v.ratio == INDETERMINATE else fmt(v.ratio)
            rows.append([fmt(value), str(i), str(j), fmt(v.forward), fmt(v.backward),
                         ratio, fmt(v.target), fmt(v.residual)])
    return rows, False


KMS_HEADER = ["omega", "re_fwd", "im_fwd", "re_bwd", "im_bwd", "ratio", "target", "residual"]


def kms_rows(cfg):
    wl = cfg.params().worldline
    window = cfg.kms_window or cfg.switching
    rows, failed = [], False
    for w in cfg.kms_omegas:
        target = math.exp(-2 * math.pi * w / cfg.accel)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fwd, bwd, ratio = kms_fourier_ratio(w, wl, window)
            rows.append([fmt(w), fmt(fwd.real), fmt(fwd.imag), fmt(bwd.real),
                         fmt(bwd.imag), fmt(ratio), fmt(target), fmt(abs(ratio / target - 1))])
        except QuadratureError:
            rows.append([fmt(w)] + ["nan"] * 5 + [fmt(target), "nan"])
            failed = True
    return rows, failed


# --------------------------------------------------------------------------
# subcommands


def _map_points(func, cfg, jobs):
    values = cfg.sweep_values()
    if jobs and jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, [cfg] * len(values), values))
    return [func(cfg, v) for v in values]


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def run_integrals(cfg, out, jobs=1):
    results = _map_points(integrals_row, cfg, jobs)
    _write_csv(out, integrals_header(cfg), [r for r, _ in results])
    return EXIT_QUADRATURE if any(f for _, f in results) else EXIT_OK


def run_evolve(cfg, out, jobs=1):
    results = _map_points(evolve_row, cfg, jobs)
    _write_csv(out, evolve_header(cfg), [r for r, _ in results])
    return EXIT_QUADRATURE if any(f for _, f in results) else EXIT_OK


def run_edr_sweep(cfg, out, jobs=1):
    results = _map_points(edr_rows, cfg, jobs)
    _write_csv(out, EDR_HEADER, [row for rows, _ in results for row in rows])
    return EXIT_QUADRATURE if any(f for _, f in results) else EXIT_OK


def run_kms_check(cfg, out, jobs=1):
    if not cfg.kms_omegas:
        raise ConfigError("kms-check needs [kms] omegas", "[kms] omegas")
    if any(w == 0 for w in cfg.kms_omegas):
        raise ConfigError("omegas must be nonzero", "[kms] omegas")
    rows, failed = kms_rows(cfg)
    _write_csv(out, KMS_HEADER, rows)
    return EXIT_QUADRATURE if failed else EXIT_OK


def run_oracle_check(cfg, out, jobs=1, engine=None):
    """Engine-versus-closed-form suites; writes a text report."""
    try:
        devs = run_oracle_suites(cfg.params(), engine=engine, gap=cfg.gap)
    except QuadratureError as exc:
        with open(out, "w") as fh:
            fh.write(f"quadrature failure: {exc}\n")
        return EXIT_QUADRATURE
    lines, ok = [], True
    for name, dev in devs.items():
        passed = dev <= ORACLE_THRESHOLD
        ok &= passed
        lines.append(f"{name:<16} max_rel_dev={dev:.3e} {'PASS' if passed else 'FAIL'}")
    lines.append(f"overall {'PASS' if ok else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    with open(out, "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if ok else 1


COMMANDS = {
    "integrals": run_integrals,
    "evolve": run_evolve,
    "edr-sweep": run_edr_sweep,
    "kms-check": run_kms_check,
    "oracle-check": run_oracle_check,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="quditunruh",
                                     description="Accelerated qudit detector toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", required=True)
        sp.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args.out, args.jobs)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
