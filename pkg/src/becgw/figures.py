"""Data for the strain-sensitivity figures, plus a generic plotting script."""

from dataclasses import dataclass, replace
from importlib import resources
import math
from pathlib import Path
import warnings

import numpy as np

from .csvio import read_csv
from .decoherence import APPROXIMATION_NOTE, beliaev_rate, decohered_sensitivity, optimal_tau
from .errors import ValidityWarning
from .metrology import SqueezeParams
from .mode_dynamics import GwWaveform, max_squeezing
from .sensitivity import PLOTTED_QUANTITY, MeasurementPlan, sweep_curve

#: Figure-1 level quoted for the kHz band, reported next to the computed curve.
QUOTED_FIGURE1_LEVEL = 6e-14


@dataclass(frozen=True)
class ComparisonCurve:
    label: str
    f: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.f) <= 0):
            raise ValueError("comparison rows must be sorted by frequency")
        if np.any(self.value <= 0):
            raise ValueError("comparison values must be positive")

    def at(self, f):
        """Log-log interpolation; ``nan`` outside the tabulated range."""
        f = np.asarray(f, dtype=float)
        out = np.exp(np.interp(np.log(f), np.log(self.f), np.log(self.value), left=np.nan, right=np.nan))
        return out


def load_aligo():
    text = resources.files("becgw").joinpath("data/aligo_design_asd.csv").read_text(encoding="utf-8")
    header, rows, _ = read_csv(text)
    data = np.array(rows, dtype=float)
    return ComparisonCurve("aLIGO design (extrapolated to 1e4 Hz)", data[:, 0], data[:, 1])


@dataclass
class FigureData:
    header: list
    rows: list
    metadata: dict


def _base_metadata(cfg, fid):
    return {
        "figure": fid,
        "plotted_quantity": PLOTTED_QUANTITY,
        "units": "f_gw in Hz; delta_eps_sq dimensionless; curves in Hz^-1/2",
        "validity": "valid = false where hbar*Omega/2 >= 0.1*m*c_s^2",
        "comparison": "aligo_asd: aLIGO design ASD, log-log interpolated",
        "parameters": _flat(cfg.resolved()),
    }


def _flat(tree):
    parts = []
    for sec, vals in tree.items():
        for k, v in vals.items():
            parts.append(f"{sec}.{k}={v}")
    return "; ".join(parts)


def _grid(cfg):
    if cfg.sweep is None:
        raise ValueError("this figure needs a [sweep] section")
    return cfg.sweep.grid()


def figure_1(cfg):
    f = _grid(cfg)
    pts = sweep_curve(cfg.bec, cfg.squeeze, cfg.plan, f)
    ref = load_aligo().at(f)
    header = ["f_gw", "delta_eps_sq", "curve_value", "valid", "aligo_asd"]
    rows = [[p.f_gw, p.delta_eps_sq, p.curve_value, p.valid, a] for p, a in zip(pts, ref)]
    meta = _base_metadata(cfg, "1")
    best = min((p.curve_value for p in pts if p.valid), default=math.nan)
    meta["best_valid_curve_value"] = format(best, ".6g")
    meta["quoted_kHz_level"] = format(QUOTED_FIGURE1_LEVEL, ".6g")
    return FigureData(header, rows, meta)


def figure_2(cfg):
    f = _grid(cfg)
    r_values = cfg.figure.r_values if cfg.figure and cfg.figure.r_values else (cfg.squeeze.r,)
    r_values = sorted(r_values)
    curves = []
    for r in r_values:
        pts = sweep_curve(cfg.bec, SqueezeParams(r, cfg.squeeze.phi), cfg.plan, f)
        curves.append([p.curve_value for p in pts])
    valid = [p.valid for p in pts]
    ref = load_aligo().at(f)
    header = ["f_gw", "valid", "aligo_asd"] + [f"curve_r={r:g}" for r in r_values]
    rows = [[fi, v, a] + [c[i] for c in curves] for i, (fi, v, a) in enumerate(zip(f, valid, ref))]
    return FigureData(header, rows, _base_metadata(cfg, cfg.figure.id if cfg.figure else "2a"))


def figure_3_point(cfg, bec, f):
    """Optimised-tau, maximal-r0 damped point at frequency ``f``."""
    omega_gw = 2 * math.pi * f
    omega_star = 0.5 * omega_gw
    with warnings.catch_warnings():
        # the validity flag on the returned point records this
        warnings.simplefilter("ignore", ValidityWarning)
        r0 = max_squeezing(bec, omega_star).r_max
    gamma_star = beliaev_rate(bec, omega_star)
    dec = cfg.decoherence.params(r0, gamma_star)
    p0 = SqueezeParams(r0, cfg.squeeze.phi)
    rate = cfg.decoherence.gamma_b

    def evaluate(tau):
        plan = MeasurementPlan(tau, cfg.plan.t_obs, cfg.plan.n_becs)
        wave = GwWaveform(0.0, omega_gw, tau)
        return decohered_sensitivity(bec, wave, p0, plan, dec, rate)

    opt = optimal_tau(
        dec,
        GwWaveform(0.0, omega_gw, cfg.plan.tau),
        log_merit=lambda tau: -math.log(evaluate(tau).delta_eps_sq),
        tau_max=cfg.plan.t_obs,
    )
    return evaluate(opt.tau), opt, r0


def figure_3(cfg):
    f = _grid(cfg)
    lengths = cfg.figure.lengths if cfg.figure and cfg.figure.lengths else (cfg.bec.box_length,)
    r_ref = cfg.figure.reference_r if cfg.figure and cfg.figure.reference_r is not None else cfg.squeeze.r
    ref = load_aligo().at(f)
    header = ["f_gw", "r0", "aligo_asd"]
    for L in lengths:
        header += [f"curve_L={L:g}", f"tau_L={L:g}", f"valid_L={L:g}", f"undamped_r={r_ref:g}_L={L:g}"]
    rows = [[fi, math.nan, a] for fi, a in zip(f, ref)]
    tau_notes = []
    for L in lengths:
        bec = replace(cfg.bec, box_length=L)
        undamped = sweep_curve(bec, SqueezeParams(r_ref, cfg.squeeze.phi), cfg.plan, f)
        for i, fi in enumerate(f):
            try:
                pt, opt, r0 = figure_3_point(cfg, bec, fi)
                flags = "lower" if opt.at_lower else "upper" if opt.at_upper else "interior"
                rows[i][1] = r0
                rows[i] += [pt.curve_value, opt.tau, pt.valid, undamped[i].curve_value]
            except (ArithmeticError, ValueError) as exc:
                flags = f"failed: {exc}"
                rows[i] += [math.nan, math.nan, False, undamped[i].curve_value]
            tau_notes.append(flags)
    meta = _base_metadata(cfg, "3")
    meta["procedure"] = (
        "per f: r0 = linear-regime ceiling at Omega/2; tau maximises the damped "
        "information over [2 pi/Omega, min(10/gamma_B(Omega/2), t_obs)]; per-mode Beliaev rates"
    )
    counts = {k: tau_notes.count(k) for k in sorted(set(tau_notes))}
    meta["tau_optimum_location"] = ", ".join(f"{k}: {v}" for k, v in counts.items())
    meta["approximation"] = APPROXIMATION_NOTE
    meta["undamped_reference"] = f"r = {r_ref:g}, tau = {cfg.plan.tau:g} s, no damping"
    return FigureData(header, rows, meta)


BUILDERS = {"1": figure_1, "2a": figure_2, "2b": figure_2, "3": figure_3}


PLOT_SCRIPT = '''"""Plot a becgw figure CSV (log-log curves against f_gw).  Needs matplotlib."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path, newline="") as fh:
    reader = csv.reader(line for line in fh if not line.startswith("#"))
    header = next(reader)
    rows = [r for r in reader]
cols = {{h: [float(r[i]) if r[i] not in ("", "true", "false") else float("nan") for r in rows]
        for i, h in enumerate(header)}}
f = cols["f_gw"]
for name in header:
    if name.startswith(("curve", "undamped", "aligo")):
        style = dict(lw=3) if name.startswith("aligo") else {{}}
        plt.loglog(f, cols[name], label=name, **style)
plt.xlabel("f (Hz)")
plt.ylabel("sqrt(delta_eps_sq / f)  (Hz^-1/2)")
plt.legend()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''


def plot_script(csv_path):
    return PLOT_SCRIPT.format(csv_name=Path(csv_path).name)
