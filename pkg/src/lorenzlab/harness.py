"""Experiment orchestration: config parsing, dispatch, reports.

Configs are one YAML file (nested key/value sections, unknown keys are
errors, master seed mandatory).  Reports are a CSV of per-trial rows and
a JSON summary, both written atomically (temp file + rename) with stable
ordering so identical configs give byte-identical bodies.
"""

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import borel_cantelli as bc
from . import evt, flow, measure, rng
from .params import DEFAULT_PARAMS, ModelParams, I_HALF
from .maps import SectionPoint

_COMMON_KEYS = {
    "system", "experiment", "seed", "params", "output_dir", "center",
    "center_seed", "n", "trials", "ensemble", "burn_in", "measure_n",
    "measure_snapshot", "v_grid", "k_grid", "t_grid", "gamma1", "C",
    "shape", "window", "lags", "t_max", "v", "l", "segments", "bins",
    "orbit_len", "n_grid",
}
_SYSTEMS = {"lorenz", "baker", "doubling"}
_EXPERIMENTS = {"sbc", "evt", "repp", "d3", "dprime", "flow-evt", "measure",
                "corr"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    system: str
    experiment: str
    seed: int
    params: ModelParams = DEFAULT_PARAMS
    output_dir: str = "out"
    center: object = "random-generic"
    center_seed: int = 7
    n: int = 10 ** 5
    trials: int = 2_000
    ensemble: int = 100
    burn_in: int = 1_000
    measure_n: int = 10 ** 7
    measure_snapshot: str = ""
    v_grid: tuple = (-1.0, 0.0, 1.0, 2.0)
    k_grid: tuple = (2, 5, 10, 20)
    t_grid: tuple = ()
    n_grid: tuple = ()
    gamma1: float = 0.6
    C: float = 0.01
    shape: str = "square"
    window: int = 200
    lags: int = 50
    t_max: float = 2.0
    v: float = 0.0
    l: int = 1_000
    segments: int = 10 ** 4
    bins: int = 1024
    orbit_len: int = 10 ** 7

    def __post_init__(self):
        if self.system not in _SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}")
        if self.experiment not in _EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.seed is None:
            raise ConfigError("a master seed is mandatory (no wall-clock seeding)")
        for name in ("n", "trials", "ensemble", "burn_in", "measure_n"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        self.params.validate()


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        raw = yaml.safe_load(f) or {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - _COMMON_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "seed" not in raw:
        raise ConfigError("a master seed is mandatory")
    if "params" in raw:
        overrides = raw.pop("params")
        if not isinstance(overrides, dict):
            raise ConfigError("params must be a mapping")
        base = DEFAULT_PARAMS.to_dict()
        unknown = set(overrides) - set(base)
        if unknown:
            raise ConfigError(f"unknown params keys: {sorted(unknown)}")
        base.update(overrides)
        raw["params"] = ModelParams(**base)
    for key in ("v_grid", "k_grid", "t_grid", "n_grid"):
        if key in raw:
            raw[key] = tuple(raw[key])
    if isinstance(raw.get("center"), (list, tuple)):
        raw["center"] = tuple(float(c) for c in raw["center"])
    return ExperimentConfig(**raw)


def generic_center(params, seed=7, steps=5_000):
    """A generic attractor point: the state of a seeded orbit after a burn."""
    gen = rng.stream(seed, 0)
    x, y = bc._lorenz_start(params, gen, steps)
    return (x, y)


def resolve_center(config: ExperimentConfig):
    if isinstance(config.center, tuple):
        return config.center
    if config.center != "random-generic":
        raise ConfigError(f"bad center value {config.center!r}")
    if config.system == "lorenz":
        return generic_center(config.params, config.center_seed)
    # reference systems: any fixed interior point is Lebesgue-generic
    gen = rng.stream(config.center_seed, 0)
    return (gen.uniform(-0.4, 0.4), gen.uniform(-0.4, 0.4))


@dataclass
class ExperimentReport:
    config: dict
    params_digest: str
    columns: list
    rows: list
    summary: dict
    warnings: list = field(default_factory=list)

    def write(self, out_dir, stem):
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, stem + ".csv")
        json_path = os.path.join(out_dir, stem + ".json")
        _atomic_write(csv_path, self._csv_body())
        _atomic_write(json_path, self._json_body())
        return csv_path, json_path

    def _csv_body(self):
        import io
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def _json_body(self):
        payload = {
            "config": self.config,
            "params_digest": self.params_digest,
            "summary": self.summary,
            "warnings": self.warnings,
        }
        return json.dumps(payload, sort_keys=True, indent=2, default=_jsonify)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _atomic_write(path, body):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config_echo(config: ExperimentConfig):
    d = dict(config.__dict__)
    d["params"] = config.params.to_dict()
    return d


def get_measure(config: ExperimentConfig):
    if config.measure_snapshot:
        return measure.EmpiricalMeasure.load(config.measure_snapshot)
    # ensemble build: merged independent orbits decorrelate the fine-scale
    # clumps of a single long orbit, which otherwise bias small-mass radii
    return measure.build_empirical_measure(
        config.system, config.params, config.measure_n,
        burn_in=config.burn_in, seed=config.seed + 10 ** 6,
        ensemble=config.ensemble)


def run(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch the named experiment and write its report files."""
    handler = _HANDLERS[config.experiment]
    report = handler(config)
    stem = f"{config.experiment}-{config.system}-seed{config.seed}"
    report.write(config.output_dir, stem)
    return report


def _report(config, columns, rows, summary, warnings=()):
    return ExperimentReport(_config_echo(config), config.params.digest(),
                            columns, rows, summary, list(warnings))


def _run_measure(config):
    m = get_measure(config)
    rows = [["quadrant", i, q] for i, q in enumerate(m.quadrant_masses())]
    summary = {"n": m.n, "quadrants": m.quadrant_masses().tolist()}
    if config.system != "doubling":
        center = resolve_center(config) if config.system == "lorenz" else (0.1, 0.1)
        fit = measure.local_dimension(m, center)
        summary["local_dimension"] = {
            "center": center, "d_hat": fit.slope,
            "log_prefactor": fit.intercept, "r2": fit.r_squared,
        }
    return _report(config, ["kind", "index", "value"], rows, summary)


def _run_sbc(config):
    m = get_measure(config)
    center = resolve_center(config)
    targets = bc.build_targets(m, center, config.shape, config.gamma1,
                               config.n, config.C)
    rep = bc.run_sbc(config.system, config.params, targets,
                     ensemble=config.ensemble, seed=config.seed)
    rows = []
    for k in range(rep.S.shape[0]):
        for ci, n in enumerate(rep.checkpoints):
            rows.append([k, int(n), int(rep.S[k, ci]), rep.E[ci],
                         rep.S[k, ci] / rep.E[ci]])
    summary = rep.summary()
    summary["target_flags"] = targets.flags
    summary["side_condition"] = targets.side_condition()
    return _report(config, ["member", "n", "S_n", "E_n", "ratio"], rows, summary)


def _run_evt(config):
    m = get_measure(config)
    center = resolve_center(config)
    fit = measure.local_dimension(m, center)
    rep = evt.block_maxima(config.params, m, center, config.n, config.trials,
                           config.v_grid, seed=config.seed)
    a_n, b_n = evt.gumbel_norm_constants(fit, config.n)
    ks = evt.gumbel_ks(rep.maxima, a_n, b_n)
    ctrl = evt.iid_maxima_control(m, center, config.n, config.trials,
                                  config.v_grid, seed=config.seed + 1)
    rows = [[k, rep.maxima[k], rep.maxima_blocks[k]]
            for k in range(len(rep.maxima))]
    summary = {
        "block_maxima": rep.summary(),
        "gumbel": ks,
        "d_hat": fit.slope,
        "iid_control_p_hat": ctrl["p_hat"].tolist(),
    }
    return _report(config, ["trial", "max_phi", "max_phi_block"], rows, summary)


def _run_dprime(config):
    m = get_measure(config)
    center = resolve_center(config)
    n_grid = config.n_grid or (10 ** 4, 10 ** 5, 10 ** 6)
    table = evt.d_prime_stat(config.params, m, center, n_grid, config.k_grid,
                             v=config.v, orbit_len=config.orbit_len,
                             seed=config.seed)
    rows = [[int(n), int(k), table["E"][i, j], int(table["pairs"][i, j])]
            for i, n in enumerate(table["n"]) for j, k in enumerate(table["k"])]
    summary = {"E": table["E"].tolist(),
               "iid_reference": evt.d_prime_iid(config.n, config.k_grid,
                                                config.v).tolist()}
    return _report(config, ["n", "k", "E_nk", "pairs"], rows, summary)


def _run_d3(config):
    m = get_measure(config)
    center = resolve_center(config)
    t_grid = config.t_grid or _default_t_grid(config.n)
    table = evt.d3_stat(config.params, m, center, config.n, t_grid,
                        l=config.l, v=config.v, orbit_len=config.orbit_len,
                        seed=config.seed)
    rows = [[r["t"], r["gamma"], r["q"], r["sigma"]] for r in table["rows"]]
    summary = {k: table[k] for k in ("n", "l", "p1", "p2", "exceedances")}
    summary["rows"] = table["rows"]
    return _report(config, ["t", "gamma", "q", "sigma"], rows, summary)


def _default_t_grid(n):
    t_star = int(math.log(n) ** 5)
    return tuple(sorted({max(t_star // 8, 1), t_star // 4, t_star // 2, t_star}))


def _run_repp(config):
    m = get_measure(config)
    center = resolve_center(config)
    rep = evt.repp(config.params, m, center, config.n, v=config.v,
                   t_max=config.t_max, trials=config.trials, seed=config.seed)
    rows = [[k] + rep.counts[k].tolist() for k in range(rep.counts.shape[0])]
    cols = ["trial"] + [f"count_w{w}" for w in range(rep.counts.shape[1])]
    chi = rep.poisson_chi2()
    summary = {
        "a_n": rep.a_n, "u_n": rep.u_n,
        "dispersion_index": rep.dispersion_index(),
        "gap_ks": rep.gap_ks() if len(rep.gaps) else None,
        "poisson_chi2_p": float(chi.pvalue),
    }
    return _report(config, cols, rows, summary)


def _run_flow_evt(config):
    m = get_measure(config)
    center = resolve_center(config)
    fit = measure.local_dimension(m, center)
    rep = flow.flow_evl(config.params, fit, center, config.n,
                        trials=config.trials, seed=config.seed)
    rows = [[k, rep.phi_T[k], rep.Phi_N[k]] for k in range(len(rep.phi_T))]
    summary = rep.summary()
    summary["stability"] = flow.normalization_stability(fit, config.n)
    return _report(config, ["trial", "phi_T", "Phi_N"], rows, summary)


def _bump(xs, ys, cx, cy, width=0.1):
    return np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / width ** 2)


def corr_estimate(map_kind, params, lags=50, orbit_len=10 ** 7, seed=0,
                  observable="default"):
    """Autocorrelations of a Lipschitz observable along one long orbit,
    with a log-linear fit of the decaying envelope above the noise floor."""
    if lags > 200:
        raise ValueError("lags capped at 200")
    gen = rng.stream(seed, 0)
    if map_kind == "doubling":
        xs = measure._doubling_sample(orbit_len, 0, gen)[:, 0]
        psi = xs.copy()
    elif map_kind == "lorenz":
        pts = measure._lorenz_sample(params, orbit_len, 1_000, gen)
        cx, cy = generic_center(params, seed + 1)
        psi = _bump(pts[:, 0], pts[:, 1], cx, cy)
    elif map_kind == "baker":
        pts = measure._baker_sample(orbit_len, 0, gen)
        psi = _bump(pts[:, 0], pts[:, 1], 0.1, 0.1)
    else:
        raise ValueError(f"unknown map kind {map_kind!r}")
    if observable == "constant":
        psi = np.ones_like(psi)
    L = len(psi)
    z = psi - psi.mean()
    nfft = 1 << int(math.ceil(math.log2(L + lags + 1)))
    f = np.fft.rfft(z, n=nfft)
    acov = np.fft.irfft(f * np.conj(f))[:lags + 1]
    acov /= np.arange(L, L - lags - 1, -1)
    var = float(acov[0])
    floor = 3.0 * var / math.sqrt(L)
    ns = np.arange(1, lags + 1)
    c = acov[1:]
    above = np.abs(c) >= floor
    cut = int(np.argmin(above)) if not above.all() else lags
    fit = None
    if cut >= 3:
        from scipy.stats import linregress
        res = linregress(ns[:cut], np.log(np.abs(c[:cut]) + 1e-300))
        if res.slope < 0:
            fit = {"rate": float(-res.slope), "r2": float(res.rvalue ** 2),
                   "fit_range": int(cut)}
    return {"lags": ns, "corr": c, "var": var, "noise_floor": floor,
            "fit": fit}


def _run_corr(config):
    table = corr_estimate(config.system, config.params, lags=config.lags,
                          orbit_len=config.orbit_len, seed=config.seed)
    rows = [[int(n), c] for n, c in zip(table["lags"], table["corr"])]
    summary = {"var": table["var"], "noise_floor": table["noise_floor"],
               "fit": table["fit"]}
    warnings_ = [] if table["fit"] else ["no decaying envelope fit"]
    return _report(config, ["lag", "corr"], rows, summary, warnings_)


_HANDLERS = {
    "measure": _run_measure,
    "sbc": _run_sbc,
    "evt": _run_evt,
    "dprime": _run_dprime,
    "d3": _run_d3,
    "repp": _run_repp,
    "flow-evt": _run_flow_evt,
    "corr": _run_corr,
}
