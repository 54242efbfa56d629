"""Batch front end: single-point solves, grid scans, boundary traces, finite-size
studies, and deterministic CSV/SVG outputs.

One JSON configuration document drives every subcommand; all physical inputs
are the dimensionless ratios used on the phase-diagram axes (u = 1 is the
internal unit):

    mu    = mu/u        two_j = 2j/u       two_v = 2v/u       eps = eps/u

Scan output is a frozen, versioned CSV schema (tagged ``# latticevar-csv v1``)
with one row per grid point; the energy column is the total lattice energy
for the configured size.  Grid points are independent tasks: each gets a seed
derived from the master seed and its grid index, so the file content is
byte-identical no matter how many workers evaluate it.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 schema mismatch.
"""

import argparse
import concurrent.futures
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, coherent, ed, gaussian, meanfield
from .model import ModelParams, LatticeSpec

CSV_TAG = "# latticevar-csv v1"
SCAN_HEADER = "x_name,x,y_name,y,energy,phase,phi_o,phi_e,rho_o,rho_e,converged,error"
BOUNDARY_HEADER = "sweep_name,sweep,critical_name,critical,iterations"
FSS_HEADER = "L,mu_c"
AXIS_NAMES = ("mu", "two_j", "two_v", "eps")
PHASE_COLORS = {"MI": "#7b3294", "DW": "#d7191c", "SS": "#fdae61", "SF": "#2c7bb6",
                "": "#bbbbbb"}

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SCHEMA = 4


class ConfigError(ValueError):
    pass


class SchemaError(ValueError):
    pass


def fmt(x):
    """Frozen float formatting: 17 significant digits, locale independent."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Configuration

def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def base_params(cfg):
    raw = cfg.get("params", {})
    unknown = set(raw) - set(AXIS_NAMES)
    if unknown:
        raise ConfigError(f"unknown params keys: {sorted(unknown)}")
    return {name: float(raw.get(name, 0.0)) for name in AXIS_NAMES}


def to_model_params(ratios):
    return ModelParams(mu=ratios["mu"], u=1.0, v=0.5 * ratios["two_v"],
                       j=0.5 * ratios["two_j"], eps=ratios["eps"])


def parse_axis(block):
    try:
        name = block["name"]
        lo, hi, steps = float(block["min"]), float(block["max"]), int(block["steps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad axis block: {exc}") from exc
    if name not in AXIS_NAMES:
        raise ConfigError(f"axis name must be one of {AXIS_NAMES}, got {name!r}")
    if not lo < hi or steps < 2:
        raise ConfigError("axis needs min < max and steps ≥ 2")
    return name, np.linspace(lo, hi, steps)


def parse_lattice(cfg, default_sites=8, default_nmax=20):
    block = cfg.get("lattice", {})
    return LatticeSpec(sites=int(block.get("sites", default_sites)),
                       n_max=int(block.get("n_max", default_nmax)))


# ---------------------------------------------------------------------------
# Single-point evaluation per method

@dataclass
class PointResult:
    energy: float = math.nan
    phase: str = ""
    phi_o: float = math.nan
    phi_e: float = math.nan
    rho_o: float = math.nan
    rho_e: float = math.nan
    converged: bool = False
    error: str = ""
    diagnostics: dict = None


def _gauge_pair(phi_o, phi_e, eps):
    """Report complex sublattice amplitudes as gauge-fixed reals."""
    ref = phi_o if abs(phi_o) > 1e-12 else phi_e
    if abs(ref) <= 1e-12:
        return 0.0, 0.0
    rot = np.exp(-1j * np.angle(ref)) if eps == 0.0 else (-1.0 if ref.real < 0 else 1.0)
    return float((phi_o * rot).real), float((phi_e * rot).real)


def _solve_mf(params, lattice, solver, seed):
    opts = meanfield.SCFOptions(
        mixing=float(solver.get("mixing", 0.5)),
        tol_e=float(solver.get("tol_e", 1e-10)),
        tol_p=float(solver.get("tol_p", 1e-8)),
        max_iter=int(solver.get("max_iter", 10000)))
    sol = meanfield.multistart_mf(params, lattice.n_max,
                                  n_random=int(solver.get("n_random", 4)),
                                  seed=seed, opts=opts)
    label = meanfield.classify(sol, tol_phi=float(solver.get("tol_phi", 1e-4)),
                               tol_rho=float(solver.get("tol_rho", 1e-4)))
    phi_o, phi_e = _gauge_pair(sol.phi_o, sol.phi_e, params.eps)
    return PointResult(energy=sol.e_pair * (lattice.sites // 2), phase=label,
                       phi_o=phi_o, phi_e=phi_e, rho_o=sol.rho_o, rho_e=sol.rho_e,
                       converged=sol.converged,
                       diagnostics={"iterations": sol.iterations,
                                    "e_pair": sol.e_pair})


def _sublattice_stats(amps):
    phi_o = complex(np.mean(amps[0::2]))
    phi_e = complex(np.mean(amps[1::2]))
    dens = np.abs(amps) ** 2
    return phi_o, phi_e, float(np.mean(dens[0::2])), float(np.mean(dens[1::2]))


def _solve_coherent(params, lattice, solver, seed):
    opts = coherent.FlowOptions(step=float(solver.get("step", 0.05)),
                                grad_tol=float(solver.get("grad_tol", 1e-10)),
                                max_steps=int(solver.get("max_steps", 10 ** 6)))
    field, energy = coherent.multistart_ground(
        params, lattice.sites, n_starts=int(solver.get("n_starts", 8)),
        seed=seed, opts=opts)
    phi_o, phi_e, rho_o, rho_e = _sublattice_stats(field)
    if rho_o < rho_e:
        phi_o, phi_e, rho_o, rho_e = phi_e, phi_o, rho_e, rho_o
    label = meanfield.classify_order_parameters(
        phi_o, phi_e, rho_o, rho_e,
        tol_phi=float(solver.get("tol_phi", 1e-3)),
        tol_rho=float(solver.get("tol_rho", 1e-3)))
    phi_o, phi_e = _gauge_pair(phi_o, phi_e, params.eps)
    return PointResult(energy=energy, phase=label, phi_o=phi_o, phi_e=phi_e,
                       rho_o=rho_o, rho_e=rho_e, converged=True,
                       diagnostics={"gradient": float(np.max(np.abs(
                           coherent.gradient(field, params))))})


def _solve_gaussian(params, lattice, solver, seed):
    opts = gaussian.GaussianFlowOptions(
        step=float(solver.get("step", 0.02)),
        grad_tol=float(solver.get("grad_tol", 1e-7)),
        max_steps=int(solver.get("max_steps", 50000)),
        purity_tol=float(solver.get("purity_tol", 1e-6)))
    state, energy = gaussian.multistart_flow(
        params, lattice.sites, n_random=int(solver.get("n_random", 8)),
        seed=seed, opts=opts)
    L = state.sites
    amps = (state.d[:L] + 1j * state.d[L:]) / 2.0
    phi_o, phi_e, rho_o_c, rho_e_c = _sublattice_stats(amps)
    dens = (np.diagonal(state.cov)[:L] + np.diagonal(state.cov)[L:]
            + state.d[:L] ** 2 + state.d[L:] ** 2 - 2.0) / 4.0
    rho_o, rho_e = float(np.mean(dens[0::2])), float(np.mean(dens[1::2]))
    if rho_o < rho_e:
        phi_o, phi_e, rho_o, rho_e = phi_e, phi_o, rho_e, rho_o
    label = meanfield.classify_order_parameters(
        phi_o, phi_e, rho_o, rho_e,
        tol_phi=float(solver.get("tol_phi", 1e-3)),
        tol_rho=float(solver.get("tol_rho", 1e-3)))
    phi_o, phi_e = _gauge_pair(phi_o, phi_e, params.eps)
    return PointResult(energy=energy, phase=label, phi_o=phi_o, phi_e=phi_e,
                       rho_o=rho_o, rho_e=rho_e, converged=True,
                       diagnostics={"purity_defect": gaussian.purity_defect(state)})


def _solve_ed(params, lattice, solver, seed):
    state, basis = ed.solve_ground(params, lattice,
                                   tol=float(solver.get("tol", 1e-10)))
    obs = ed.observables(state, basis)
    L = lattice.sites
    dens = obs["density"]
    rho_o, rho_e = float(np.mean(dens[0::2])), float(np.mean(dens[1::2]))
    if rho_o < rho_e:
        rho_o, rho_e = rho_e, rho_o
    # qualitative small-L labels from the long-distance correlators
    sf_ordered = obs["c_sf"][-1] > 0.05
    dw_ordered = obs["c_dw"][-1] * (-1.0) ** (L // 2) > 0.05
    label = ("SS" if sf_ordered and dw_ordered else "SF" if sf_ordered
             else "DW" if dw_ordered else "MI")
    return PointResult(energy=state.energy, phase=label, phi_o=0.0, phi_e=0.0,
                       rho_o=rho_o, rho_e=rho_e, converged=True,
                       diagnostics={"parity": state.parity,
                                    "degenerate": state.degenerate,
                                    "c_sf": obs["c_sf"].tolist(),
                                    "c_dw": obs["c_dw"].tolist(),
                                    "phi2": obs["phi2"], "phi4": obs["phi4"]})


_METHODS = {"mf": _solve_mf, "coherent": _solve_coherent,
            "gaussian": _solve_gaussian, "ed": _solve_ed}


def evaluate_point(method, ratios, lattice, solver, seed):
    try:
        params = to_model_params(ratios)
        return _METHODS[method](params, lattice, solver, seed)
    except Exception as exc:  # failed points become flagged rows, not crashes
        return PointResult(error=f"{type(exc).__name__}: {exc}")


def classifier_group(label, transition):
    if transition == "insulator-superfluid":
        return "insulating" if label in ("MI", "DW") else "superfluid"
    if transition == "sf-ss":
        return "staggered" if label in ("SS", "DW") else "uniform"
    raise ConfigError(f"unknown transition {transition!r}")


# ---------------------------------------------------------------------------
# Subcommand: solve

def cmd_solve(cfg, out_path):
    if "scan" in cfg:
        raise ConfigError("solve takes no scan axes")
    method = cfg.get("method")
    if method not in _METHODS:
        raise ConfigError(f"method must be one of {sorted(_METHODS)}")
    lattice = parse_lattice(cfg)
    res = evaluate_point(method, base_params(cfg), lattice,
                         cfg.get("solver", {}), (int(cfg.get("seed", 0)), 0))
    if res.error:
        print(f"error: {res.error}", file=sys.stderr)
        return 1
    report = {"method": method, "energy": res.energy, "phase": res.phase,
              "phi_o": res.phi_o, "phi_e": res.phi_e,
              "rho_o": res.rho_o, "rho_e": res.rho_e,
              "converged": res.converged, "diagnostics": res.diagnostics}
    for key, value in report.items():
        if key != "diagnostics":
            print(f"{key}: {value}")
    for key, value in (res.diagnostics or {}).items():
        print(f"  {key}: {value}")
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# Subcommand: scan

def _scan_task(args):
    index, method, ratios, lattice, solver, seed = args
    return index, evaluate_point(method, ratios, lattice, solver, (seed, index))


def _parallel_map(tasks, workers):
    if workers <= 1:
        return [_scan_task(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_scan_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def scan_rows(cfg, workers):
    method = cfg.get("method")
    if method not in _METHODS:
        raise ConfigError(f"method must be one of {sorted(_METHODS)}")
    axes = [parse_axis(b) for b in cfg.get("scan", {}).get("axes", [])]
    if not 1 <= len(axes) <= 2:
        raise ConfigError("scan needs one or two axes")
    lattice = parse_lattice(cfg)
    solver = cfg.get("solver", {})
    seed = int(cfg.get("seed", 0))
    ratios0 = base_params(cfg)

    grid = []
    if len(axes) == 1:
        (xn, xs), = axes
        for x in xs:
            grid.append(((xn, float(x)), None))
    else:
        (xn, xs), (yn, ys) = axes
        for x in xs:
            for y in ys:
                grid.append(((xn, float(x)), (yn, float(y))))

    tasks = []
    for index, (xa, ya) in enumerate(grid):
        ratios = dict(ratios0)
        ratios[xa[0]] = xa[1]
        if ya is not None:
            ratios[ya[0]] = ya[1]
        tasks.append((index, method, ratios, lattice, solver, seed))
    results = dict(_parallel_map(tasks, workers))

    rows = []
    for index, (xa, ya) in enumerate(grid):
        r = results[index]
        yn_, y_ = (ya if ya is not None else ("", ""))
        rows.append(",".join([
            xa[0], fmt(xa[1]), yn_, fmt(y_) if y_ != "" else "",
            fmt(r.energy), r.phase, fmt(r.phi_o), fmt(r.phi_e),
            fmt(r.rho_o), fmt(r.rho_e), "1" if r.converged else "0", r.error.replace(",", ";")]))
    failures = sum(1 for _, r in results.items() if r.error)
    return rows, failures


def cmd_scan(cfg, out_path, workers):
    rows, failures = scan_rows(cfg, workers)
    text = "\n".join([CSV_TAG, SCAN_HEADER] + rows) + "\n"
    _write_text(out_path, text)
    if failures:
        print(f"warning: {failures} grid points failed", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Subcommand: boundary

def cmd_boundary(cfg, out_path, workers):
    method = cfg.get("method")
    if method not in _METHODS:
        raise ConfigError(f"method must be one of {sorted(_METHODS)}")
    block = cfg.get("boundary")
    if not block:
        raise ConfigError("boundary block missing")
    sweep_name, sweep_vals = parse_axis(block["sweep"])
    bis = block.get("bisect", {})
    try:
        bis_name = bis["name"]
        lo, hi = float(bis["min"]), float(bis["max"])
        tol = float(bis.get("tol", 1e-4))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad bisect block: {exc}") from exc
    if bis_name not in AXIS_NAMES:
        raise ConfigError(f"bisect axis must be one of {AXIS_NAMES}")
    transition = block.get("transition", "insulator-superfluid")
    lattice = parse_lattice(cfg)
    solver = cfg.get("solver", {})
    seed = int(cfg.get("seed", 0))
    ratios0 = base_params(cfg)

    rows = []
    for k, sval in enumerate(sweep_vals):
        def classify_at(bval, _k=k, _sval=float(sval)):
            ratios = dict(ratios0)
            ratios[sweep_name] = _sval
            ratios[bis_name] = float(bval)
            res = evaluate_point(method, ratios, lattice, solver, (seed, _k))
            if res.error:
                raise RuntimeError(res.error)
            return classifier_group(res.phase, transition)

        try:
            crit = analysis.boundary_bisect(classify_at, lo, hi, tol)
            iters = max(1, math.ceil(math.log2((hi - lo) / tol)))
            rows.append(",".join([sweep_name, fmt(float(sval)), bis_name,
                                  fmt(crit), str(iters)]))
        except (analysis.NoCrossingError, RuntimeError):
            rows.append(",".join([sweep_name, fmt(float(sval)), bis_name, "nan", "0"]))
    text = "\n".join([CSV_TAG, BOUNDARY_HEADER] + rows) + "\n"
    _write_text(out_path, text)
    return 0


# ---------------------------------------------------------------------------
# Subcommand: fss

def binder_curve(method, cfg, lattice, axis_name, axis_vals, seed):
    solver = cfg.get("solver", {})
    ratios0 = base_params(cfg)
    ys = []
    for k, val in enumerate(axis_vals):
        ratios = dict(ratios0)
        ratios[axis_name] = float(val)
        params = to_model_params(ratios)
        if method == "ed":
            state, basis = ed.solve_ground(params, lattice)
            obs = ed.observables(state, basis)
            phi2, phi4 = obs["phi2"], obs["phi4"]
        elif method == "gaussian":
            opts = gaussian.GaussianFlowOptions(
                step=float(solver.get("step", 0.02)),
                grad_tol=float(solver.get("grad_tol", 1e-6)),
                max_steps=int(solver.get("max_steps", 20000)))
            state, _ = gaussian.multistart_flow(
                params, lattice.sites, n_random=int(solver.get("n_random", 4)),
                seed=(seed, lattice.sites, k), opts=opts)
            _, phi2, phi4 = gaussian.phi_moments(state)
        else:
            raise ConfigError("fss supports methods 'gaussian' and 'ed'")
        ys.append(analysis.binder_from_moments(phi2, phi4)
                  if phi2 > 1e-12 else 0.0)
    return analysis.Curve(np.asarray(axis_vals), np.asarray(ys),
                          size_label=lattice.sites)


def cmd_fss(cfg, out_path):
    method = cfg.get("method", "gaussian")
    block = cfg.get("fss")
    if not block:
        raise ConfigError("fss block missing")
    sizes = [int(s) for s in block.get("sizes", [])]
    if len(sizes) < 3:
        raise ConfigError("fss needs at least 3 sizes")
    axis_name, axis_vals = parse_axis(block["axis"])
    zero_tol = float(block.get("zero_tol", 1e-6))
    n_max = int(cfg.get("lattice", {}).get("n_max", 6))
    seed = int(cfg.get("seed", 0))

    points = []
    for L in sizes:
        curve = binder_curve(method, cfg, LatticeSpec(sites=L, n_max=n_max),
                             axis_name, axis_vals, seed)
        mu_c = analysis.critical_mu_zero_threshold(curve, zero_tol=zero_tol)
        points.append((L, mu_c))
        print(f"L={L}: mu_c={mu_c:.6f}")
    fit = analysis.fss_fit(points)
    print(f"fit: mu_inf={fit.mu_inf:.6f} beta={fit.beta:.6f} "
          f"eta={fit.eta:.3f} rms={fit.rms_residual:.2e}")
    lines = [CSV_TAG, FSS_HEADER]
    lines += [f"{L},{fmt(mu_c)}" for L, mu_c in points]
    lines.append(f"# fit mu_inf={fmt(fit.mu_inf)} beta={fmt(fit.beta)} "
                 f"eta={fmt(fit.eta)} rms={fmt(fit.rms_residual)}")
    _write_text(out_path, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# Subcommand: plot

def _read_csv(path):
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise ConfigError(f"cannot read csv: {exc}") from exc
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(body) < 2:
        raise SchemaError("csv has no data rows")
    header = body[0].split(",")
    rows = [ln.split(",") for ln in body[1:]]
    if any(len(r) != len(header) for r in rows):
        raise SchemaError("ragged csv rows")
    return header, rows


def _svg_header(width, height):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">')


def _lerp_color(t):
    # dark blue -> yellow
    c0, c1 = (42, 54, 110), (250, 222, 80)
    return "#%02x%02x%02x" % tuple(int(round(a + t * (b - a))) for a, b in zip(c0, c1))


def plot_heatmap(header, rows, value_col=None):
    idx = {name: k for k, name in enumerate(header)}
    for need in ("x", "y", "phase"):
        if need not in idx:
            raise SchemaError(f"heatmap needs scan csv (missing column {need!r})")
    if any(r[idx["y"]] == "" for r in rows):
        raise SchemaError("heatmap needs a two-axis scan")
    xs = sorted({float(r[idx["x"]]) for r in rows})
    ys = sorted({float(r[idx["y"]]) for r in rows})
    cell = 12
    mleft, mbottom, mtop = 60, 40, 24
    width = mleft + cell * len(xs) + 20
    height = mtop + cell * len(ys) + mbottom
    parts = [_svg_header(width, height),
             f'<rect width="{width}" height="{height}" fill="white"/>']
    if value_col:
        if value_col not in idx:
            raise SchemaError(f"no column {value_col!r}")
        vals = [float(r[idx[value_col]]) for r in rows]
        finite = [v for v in vals if not math.isnan(v)]
        vlo, vhi = (min(finite), max(finite)) if finite else (0.0, 1.0)
        span = vhi - vlo or 1.0
    xi = {v: k for k, v in enumerate(xs)}
    yi = {v: k for k, v in enumerate(ys)}
    for r in rows:
        gx = xi[float(r[idx["x"]])]
        gy = yi[float(r[idx["y"]])]
        if value_col:
            v = float(r[idx[value_col]])
            color = "#bbbbbb" if math.isnan(v) else _lerp_color((v - vlo) / span)
        else:
            color = PHASE_COLORS.get(r[idx["phase"]], "#bbbbbb")
        px = mleft + gx * cell
        py = mtop + (len(ys) - 1 - gy) * cell
        parts.append(f'<rect x="{px}" y="{py}" width="{cell}" height="{cell}" fill="{color}"/>')
    xname = rows[0][idx["x_name"]] if "x_name" in idx else "x"
    yname = rows[0][idx["y_name"]] if "y_name" in idx else "y"
    parts.append(f'<text x="{mleft}" y="{height - 10}" font-size="11">'
                 f'{xname}: {xs[0]:.6g} .. {xs[-1]:.6g}</text>')
    parts.append(f'<text x="6" y="{mtop - 8}" font-size="11">'
                 f'{yname}: {ys[0]:.6g} .. {ys[-1]:.6g}</text>')
    if not value_col:
        lx = mleft
        for k, (label, color) in enumerate(sorted(PHASE_COLORS.items())):
            if not label:
                continue
            parts.append(f'<rect x="{lx}" y="{height - 30}" width="10" height="10" fill="{color}"/>')
            parts.append(f'<text x="{lx + 13}" y="{height - 21}" font-size="10">{label}</text>')
            lx += 52
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_lines(header, rows):
    idx = {name: k for k, name in enumerate(header)}
    if "sweep" in idx and "critical" in idx:
        xcol, ycol = idx["sweep"], idx["critical"]
        xlabel = rows[0][idx["sweep_name"]] if "sweep_name" in idx else "sweep"
        ylabel = rows[0][idx["critical_name"]] if "critical_name" in idx else "critical"
    elif header[:2] == ["L", "mu_c"]:
        xcol, ycol, xlabel, ylabel = 0, 1, "L", "mu_c"
    elif "x" in idx and "energy" in idx:
        xcol, ycol = idx["x"], idx["energy"]
        xlabel = rows[0][idx["x_name"]] if "x_name" in idx else "x"
        ylabel = "energy"
    else:
        try:
            float(rows[0][0]), float(rows[0][1])
        except (ValueError, IndexError) as exc:
            raise SchemaError("cannot infer line columns") from exc
        xcol, ycol, xlabel, ylabel = 0, 1, header[0], header[1]
    pts = []
    for r in rows:
        try:
            x, y = float(r[xcol]), float(r[ycol])
        except ValueError as exc:
            raise SchemaError("non-numeric line data") from exc
        if not (math.isnan(x) or math.isnan(y)):
            pts.append((x, y))
    if len(pts) < 2:
        raise SchemaError("need at least two finite points")
    width, height, m = 480, 320, 50
    xs, ys = zip(*pts)
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    xspan, yspan = (xhi - xlo) or 1.0, (yhi - ylo) or 1.0
    def sx(x):
        return m + (x - xlo) / xspan * (width - 2 * m)
    def sy(y):
        return height - m - (y - ylo) / yspan * (height - 2 * m)
    path = " ".join(f"{sx(x):.6g},{sy(y):.6g}" for x, y in pts)
    parts = [_svg_header(width, height),
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" '
             f'fill="none" stroke="#888888"/>',
             f'<polyline points="{path}" fill="none" stroke="#2c7bb6" stroke-width="1.5"/>']
    for x, y in pts:
        parts.append(f'<circle cx="{sx(x):.6g}" cy="{sy(y):.6g}" r="2.5" fill="#2c7bb6"/>')
    parts.append(f'<text x="{m}" y="{height - 12}" font-size="11">'
                 f'{xlabel}: {xlo:.6g} .. {xhi:.6g}</text>')
    parts.append(f'<text x="6" y="{m - 8}" font-size="11">'
                 f'{ylabel}: {ylo:.6g} .. {yhi:.6g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(csv_path, out_path, kind, value_col):
    header, rows = _read_csv(csv_path)
    if kind == "heatmap":
        svg = plot_heatmap(header, rows, value_col)
    else:
        svg = plot_lines(header, rows)
    _write_text(out_path, svg)
    return 0


# ---------------------------------------------------------------------------
# Entry point

def _write_text(path, text):
    if not path:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _workers_default(cfg):
    env = os.environ.get("LATTICEVAR_WORKERS")
    if env is not None:
        return int(env)
    return int(cfg.get("workers", 1))


def build_parser():
    p = argparse.ArgumentParser(prog="latticevar",
                                description="phase-diagram scans of the pair-driven chain")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "scan", "boundary", "fss"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
    sp = sub.add_parser("plot")
    sp.add_argument("--in", dest="csv_in", required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--kind", choices=("heatmap", "lines"), default="heatmap")
    sp.add_argument("--value", default=None)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            return cmd_plot(args.csv_in, args.out, args.kind, args.value)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        out = args.out or cfg.get("out")
        workers = args.workers if args.workers is not None else _workers_default(cfg)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "scan":
            return cmd_scan(cfg, out, workers)
        if args.command == "boundary":
            return cmd_boundary(cfg, out, workers)
        if args.command == "fss":
            return cmd_fss(cfg, out)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (IOError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
