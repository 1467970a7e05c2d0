"""
Seeded Monte Carlo experiments and their CSV/JSON emission.

Trial ``t`` draws from ``SeedSequence([seed, t])``, spawned into separate
channel, data and noise streams, so every estimator in a run sees the same
channels, bits and noise. Trials are averaged in index order, which keeps the
output bytes independent of the number of worker processes.
"""
from concurrent.futures import ProcessPoolExecutor
import configparser
from dataclasses import asdict, dataclass, field, replace
import hashlib
import json
from pathlib import Path
import re

import numpy as np
import scipy.linalg as la

from . import uwb
from .analysis import delta_mse_surface, mse_lower_bound, surface_minimum
from .estimators import (GseState, RlsState, group_energies, rls_update,
                         rls_update_normal)
from .numerics import GroupPartition

SCENARIOS = ("sce", "receiver", "bounds", "surface")
DEFAULT_DELTA = {"sce": 10.0, "receiver": 0.2, "bounds": 10.0, "surface": 10.0}
DEFAULT_BOUND_GROUPS = (1, 2, 4, 10, 20, 50, 100)
DEFAULT_ESTIMATORS = {
    "sce": ("RLS", "GSE-EB(1)", "GSE-EB(L)", "GSE-AT(L)"),
    "receiver": ("RLS", "GSE-EB(M)", "GSE-AT(M)", "ideal-MMSE"),
    "bounds": (),
    "surface": ("GSE-EB(2)",),
}


class SpecError(ValueError):
    """Invalid experiment specification; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


_EST_RE = re.compile(r"^(RLS|ideal-MMSE|GSE-(EB|AT)\((?:S=)?(\d+|L|M)\))$")


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator of a run; ``groups`` is the resolved S for GSE variants."""
    kind: str
    groups: int = 0

    @property
    def name(self):
        if self.kind in ("EB", "AT"):
            return f"GSE-{self.kind}(S={self.groups})"
        return self.kind

    @classmethod
    def parse(cls, text, param_len, cfg):
        m = _EST_RE.match(text.strip())
        if m is None:
            raise ValueError(f"unknown estimator {text!r}")
        if m.group(1) in ("RLS", "ideal-MMSE"):
            return cls(m.group(1))
        token = m.group(3)
        S = {"L": cfg.L, "M": cfg.M}.get(token)
        S = int(token) if S is None else S
        if not 1 <= S <= param_len:
            raise ValueError(f"{text}: S={S} outside [1, {param_len}]")
        return cls(m.group(2), S)


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    cfg: uwb.SystemConfig = field(default_factory=uwb.SystemConfig)
    estimators: tuple = None
    n_blocks: int = 1000
    n_trials: int = 200
    lam: float = 0.998
    delta: float = None
    mu: float = 0.075
    mu_p: float = 0.05
    at_iterations: int = 1
    profile: object = field(default_factory=uwb.ExpDecay)
    channel_file: str = None
    n_data_blocks: int = 400
    snr_list: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    bound_groups: tuple = DEFAULT_BOUND_GROUPS
    surface_step: float = 0.01

    def __post_init__(self):
        if self.delta is None and self.scenario in DEFAULT_DELTA:
            object.__setattr__(self, "delta", DEFAULT_DELTA[self.scenario])
        if self.estimators is None:
            object.__setattr__(self, "estimators", DEFAULT_ESTIMATORS.get(self.scenario, ()))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        problems = self.problems()
        if problems:
            raise SpecError(problems)

    @property
    def param_len(self):
        return self.cfg.M if self.scenario == "receiver" else self.cfg.L

    def problems(self):
        out = []
        if self.scenario not in SCENARIOS:
            out.append(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
            return out
        if self.n_trials < 1:
            out.append("n_trials must be >= 1")
        if self.n_blocks < 1:
            out.append("n_blocks must be >= 1")
        if not 0 < self.lam <= 1:
            out.append("lam must lie in (0, 1]")
        if not self.delta > 0:
            out.append("delta must be positive")
        if self.mu <= 0 or self.mu_p <= 0:
            out.append("mu and mu_p must be positive")
        if self.at_iterations < 1:
            out.append("at_iterations must be >= 1")
        if self.n_data_blocks < 0:
            out.append("n_data_blocks must be >= 0")
        for e in self.estimators:
            try:
                est = EstimatorSpec.parse(e, self.param_len, self.cfg)
            except ValueError as exc:
                out.append(str(exc))
                continue
            if est.kind == "ideal-MMSE" and self.scenario != "receiver":
                out.append("ideal-MMSE is only available in the receiver scenario")
        for S in self.bound_groups:
            if not 1 <= S <= self.cfg.L:
                out.append(f"bound group count {S} outside [1, {self.cfg.L}]")
        if self.scenario == "surface":
            gse = [e for e in self.parsed_estimators_unchecked() if e.kind in ("EB", "AT")]
            if len(gse) != 1 or gse[0].groups != 2:
                out.append("surface needs exactly one GSE estimator with S=2")
        return out

    def parsed_estimators_unchecked(self):
        out = []
        for e in self.estimators:
            try:
                out.append(EstimatorSpec.parse(e, self.param_len, self.cfg))
            except ValueError:
                pass
        return out

    def parsed_estimators(self):
        return [EstimatorSpec.parse(e, self.param_len, self.cfg) for e in self.estimators]

    def to_dict(self):
        d = asdict(self)
        d["profile"] = {"kind": type(self.profile).__name__, **asdict(self.profile)}
        d["estimators"] = list(self.estimators)
        d["snr_list"] = list(self.snr_list)
        d["bound_groups"] = list(self.bound_groups)
        return d

    def run_id(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ExperimentResult:
    """
    Trial-averaged output of one run.

    ``trajectories[estimator][metric]`` and ``references[name]`` are per-block
    arrays; ``summary[estimator][metric]`` holds scalars such as BER. Scenario
    specific tables (bounds sweep, surface grid) live in ``tables``.
    """
    spec: ExperimentSpec
    trajectories: dict = field(default_factory=dict)
    references: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def run_id(self):
        return self.spec.run_id()


# --------------------------------------------------------------------------- #
# trial machinery

def _streams(seed, t):
    ch, data, noise = np.random.SeedSequence([seed, t]).spawn(3)
    return (np.random.default_rng(ch), np.random.default_rng(data),
            np.random.default_rng(noise))


def _channel(spec, rng):
    if spec.channel_file:
        return uwb.load_channel(spec.channel_file, spec.cfg.chip_duration)
    return uwb.gen_channel(spec.profile, spec.cfg.L, rng, spec.cfg.chip_duration)


def _bits(cfg, rng):
    return rng.choice(np.array([-1, 1]), size=(cfg.K, cfg.N))


def _gse_states(spec, ests):
    return {e.name: GseState(GroupPartition(spec.param_len, e.groups), mode=e.kind,
                             mu=spec.mu, mu_p=spec.mu_p, iterations=spec.at_iterations)
            for e in ests if e.kind in ("EB", "AT")}


def _inv_trace(G):
    """``tr(G^-1)`` via Cholesky, or NaN while G is still singular."""
    try:
        c = la.cho_factor(G, lower=True, check_finite=False)
    except la.LinAlgError:
        return np.nan, None
    inv = la.cho_solve(c, np.eye(len(G)), check_finite=False)
    return float(np.trace(inv).real), inv


def _sce_trial(spec, t, record_alpha=False):
    cfg = spec.cfg
    rng_ch, rng_data, rng_noise = _streams(cfg.seed, t)
    ch = _channel(spec, rng_ch)
    if ch.L != cfg.L:
        raise ValueError(f"channel has {ch.L} taps, config expects L={cfg.L}")
    h = ch.taps
    sigma2 = cfg.noise_variance(ch)
    L, B = cfg.L, spec.n_blocks
    ests = spec.parsed_estimators()
    gse = _gse_states(spec, ests)
    rls = RlsState.initial(L, spec.lam, spec.delta)

    out = {e.name: np.empty(B) for e in ests}
    ref_groups = sorted({e.groups for e in ests if e.groups} | {1, L})
    refs = {"crlb": np.empty(B), "rls_variance": np.empty(B)}
    refs.update({f"bound(S={S})": np.empty(B) for S in ref_groups})
    energies = {S: group_energies(h, GroupPartition(L, S)) for S in ref_groups}
    alphas = []
    # unweighted, lam-weighted and lam^2-weighted sums of the block Gram matrices
    G_sum = np.zeros((L, L), dtype=complex)
    R = np.zeros((L, L), dtype=complex)
    Q = np.zeros((L, L), dtype=complex)

    for i in range(1, B + 1):
        frame = uwb.transmit_sce(cfg, ch, _bits(cfg, rng_data), rng_noise, sigma2, i)
        gram, xhz = uwb.sce_normal_equations(frame.delta_i, frame.z_freq, L)
        rls = rls_update_normal(rls, gram, xhz)
        G_sum += gram
        R = spec.lam * R + gram
        Q = spec.lam ** 2 * Q + gram

        tr, _ = _inv_trace(G_sum)
        refs["crlb"][i - 1] = sigma2 * tr
        _, Rinv = _inv_trace(R)
        v = np.nan if Rinv is None else sigma2 * float(np.sum((Rinv @ Q) * Rinv.T).real)
        refs["rls_variance"][i - 1] = v
        for S in ref_groups:
            refs[f"bound(S={S})"][i - 1] = (np.nan if np.isnan(v)
                                            else mse_lower_bound(v, energies[S], S))

        for e in ests:
            if e.kind == "RLS":
                est = rls.estimate
            else:
                g = gse[e.name]
                est = g.biased(rls.estimate)
                gse[e.name] = g.step(rls.estimate)
            out[e.name][i - 1] = np.sum(np.abs(h - est) ** 2)
        if record_alpha:
            alphas.append(next(iter(gse.values())).alpha.copy())
    extra = {"alpha": np.array(alphas), "rls_variance": refs["rls_variance"][-1],
             "energies": energies} if record_alpha else {}
    return {"mse": out}, refs, extra


def _receiver_trial(spec, t):
    cfg = spec.cfg
    rng_ch, rng_data, rng_noise = _streams(cfg.seed, t)
    ch = _channel(spec, rng_ch)
    sigma2 = cfg.noise_variance(ch)
    M, B = cfg.M, spec.n_blocks
    ests = spec.parsed_estimators()
    gse = _gse_states(spec, ests)
    rls = RlsState.initial(M, spec.lam, spec.delta)
    w_mmse = None
    if any(e.kind == "ideal-MMSE" for e in ests):
        w_mmse = np.conj(uwb.mmse_receiver_ideal(cfg, ch, sigma2))

    def weights(e):
        if e.kind == "RLS":
            return rls.estimate
        if e.kind == "ideal-MMSE":
            return w_mmse
        return gse[e.name].biased(rls.estimate)

    nmse = {e.name: np.empty(B) for e in ests}
    for i in range(1, B + 1):
        bits = _bits(cfg, rng_data)
        frame = uwb.transmit_receiver(cfg, ch, bits, rng_noise, sigma2, i)
        for e in ests:
            _, soft = uwb.detect(frame.Y_i, weights(e))
            nmse[e.name][i - 1] = uwb.normalized_mse(bits[0], soft)
        rls = rls_update(rls, frame.Y_i, bits[0])
        for name, g in gse.items():
            gse[name] = g.step(rls.estimate)

    errors = {e.name: 0 for e in ests}
    for _ in range(spec.n_data_blocks):
        bits = _bits(cfg, rng_data)
        frame = uwb.transmit_receiver(cfg, ch, bits, rng_noise, sigma2)
        for e in ests:
            hard, _ = uwb.detect(frame.Y_i, weights(e))
            errors[e.name] += int(np.sum(hard != bits[0]))
    n_bits = spec.n_data_blocks * cfg.N
    ber = {k: (v / n_bits if n_bits else np.nan) for k, v in errors.items()}
    return {"nmse": nmse}, {}, {"ber": ber}


def _map_trials(fn, spec, workers):
    trials = range(spec.n_trials)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, [spec] * spec.n_trials, trials))
    return [fn(spec, t) for t in trials]


def _mean_over_trials(arrays):
    return np.mean(np.stack(arrays), axis=0)


# --------------------------------------------------------------------------- #
# experiments

def run_sce_experiment(spec, workers=1):
    """Per-block ``||h - h_hat(i)||^2`` averaged over trials, with references."""
    if spec.scenario != "sce":
        raise SpecError([f"expected scenario 'sce', got {spec.scenario!r}"])
    trials = _map_trials(_sce_trial, spec, workers)
    names = [e.name for e in spec.parsed_estimators()]
    traj = {n: {"mse": _mean_over_trials([r[0]["mse"][n] for r in trials])} for n in names}
    refs = {k: _mean_over_trials([r[1][k] for r in trials]) for k in trials[0][1]}
    return ExperimentResult(spec, traj, refs, meta=_meta(spec))


def run_receiver_experiment(spec, workers=1):
    """Per-block training NMSE of user 1's soft outputs and post-training BER."""
    if spec.scenario != "receiver":
        raise SpecError([f"expected scenario 'receiver', got {spec.scenario!r}"])
    trials = _map_trials(_receiver_trial, spec, workers)
    names = [e.name for e in spec.parsed_estimators()]
    traj = {n: {"nmse": _mean_over_trials([r[0]["nmse"][n] for r in trials])} for n in names}
    summary = {n: {"ber": float(np.mean([r[2]["ber"][n] for r in trials]))} for n in names}
    return ExperimentResult(spec, traj, {}, summary, meta=_meta(spec))


def _bounds_trial(spec, t):
    """Unweighted SCE Gram trace and channel for one trial (noise-free)."""
    cfg = spec.cfg
    rng_ch, rng_data, _ = _streams(cfg.seed, t)
    ch = _channel(spec, rng_ch)
    G = np.zeros((cfg.L, cfg.L), dtype=complex)
    for _ in range(spec.n_blocks):
        frame = uwb.transmit_sce(cfg, ch, _bits(cfg, rng_data), None, 0.0)
        G += uwb.sce_normal_equations(frame.delta_i, frame.z_freq, cfg.L)[0]
    tr, _ = _inv_trace(G)
    return ch, tr


def run_bounds(spec, workers=1):
    """
    Unbiased variance ``v`` and the GSE lower bound for each S, per SNR,
    averaged over the channel ensemble.
    """
    if spec.scenario != "bounds":
        raise SpecError([f"expected scenario 'bounds', got {spec.scenario!r}"])
    trials = _map_trials(_bounds_trial, spec, workers)
    rows = []
    for snr in spec.snr_list:
        cfg = replace(spec.cfg, snr_db=snr)
        vs, bounds = [], {S: [] for S in spec.bound_groups}
        for ch, tr in trials:
            v = cfg.noise_variance(ch) * tr
            vs.append(v)
            for S in spec.bound_groups:
                e = group_energies(ch.taps, GroupPartition(ch.L, S))
                bounds[S].append(mse_lower_bound(v, e, S))
        rows.append((snr, "v", None, float(np.mean(vs))))
        rows.extend((snr, "bound", S, float(np.mean(bounds[S]))) for S in spec.bound_groups)
    return ExperimentResult(spec, tables={"bounds": rows}, meta=_meta(spec))


def run_surface(spec, workers=1):
    """
    MSE-difference surface for S=2 on trial 0's channel, and the adaptive
    shrinkage pair reached after ``n_blocks``.

    The analytic surface uses the true group energies and ``v / 2`` with ``v``
    the RLS estimate's variance at the last block. The converged point is the
    mean of ``1 + alpha`` over the final ``min(100, n_blocks)`` blocks.
    """
    if spec.scenario != "surface":
        raise SpecError([f"expected scenario 'surface', got {spec.scenario!r}"])
    trial_spec = replace(spec, n_trials=1)
    traj, refs, extra = _sce_trial(trial_spec, 0, record_alpha=True)
    sigma2 = extra["rls_variance"] / 2
    sf, D = delta_mse_surface(extra["energies"][2], sigma2, spec.surface_step)
    tail = min(100, spec.n_blocks)
    converged = 1.0 + extra["alpha"][-tail:].mean(axis=0)
    optimum = surface_minimum(sf, D)
    meta = _meta(spec)
    meta.update(converged=converged.tolist(), surface_minimum=optimum.tolist(),
                sigma2_tilde=float(sigma2))
    name = next(e.name for e in spec.parsed_estimators() if e.groups == 2)
    trajectories = {n: {"mse": v} for n, v in traj["mse"].items()}
    trajectories[name]["shrinkage_1"] = 1.0 + extra["alpha"][:, 0]
    trajectories[name]["shrinkage_2"] = 1.0 + extra["alpha"][:, 1]
    return ExperimentResult(spec, trajectories, refs,
                            summary={name: {"sf1": float(converged[0]),
                                            "sf2": float(converged[1])}},
                            tables={"surface": (sf, D)}, meta=meta)


RUNNERS = {"sce": run_sce_experiment, "receiver": run_receiver_experiment,
           "bounds": run_bounds, "surface": run_surface}


def run(spec, workers=1):
    return RUNNERS[spec.scenario](spec, workers)


def _meta(spec):
    cfg = spec.cfg
    return {
        "seed": cfg.seed,
        "snr_definition": "per-bin noise variance = user-1 received power per chip / 10^(snr_db/10)",
        "uncoded_bit_rate_bps": cfg.symbol_rate,
        "N": cfg.N, "Nc": cfg.Nc, "chip_duration": cfg.chip_duration,
        "cp_len_chips": cfg.cp_len_chips,
    }


# --------------------------------------------------------------------------- #
# emission

def _fmt(x):
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def csv_lines(result):
    """CSV rows (header first) for a result; schema depends on the scenario."""
    scen = result.spec.scenario
    if scen == "bounds":
        lines = ["snr_db,quantity,S,value"]
        lines += [f"{_fmt(snr)},{q},{'' if S is None else S},{_fmt(v)}"
                  for snr, q, S, v in result.tables["bounds"]]
        return lines
    if scen == "surface":
        sf, D = result.tables["surface"]
        lines = ["sf1,sf2,delta_mse"]
        lines += [f"{_fmt(a)},{_fmt(b)},{_fmt(D[i, j])}"
                  for i, a in enumerate(sf) for j, b in enumerate(sf)]
        return lines
    lines = ["block,estimator,metric,value"]
    for name, metrics in result.trajectories.items():
        for metric, values in metrics.items():
            lines += [f"{i},{name},{metric},{_fmt(v)}" for i, v in enumerate(values, 1)]
    for name, values in result.references.items():
        lines += [f"{i},reference,{name},{_fmt(v)}" for i, v in enumerate(values, 1)]
    for name, metrics in result.summary.items():
        for metric, v in metrics.items():
            lines.append(f"{result.spec.n_blocks},{name},{metric},{_fmt(v)}")
    return lines


def result_json(result):
    scen = result.spec.scenario
    results = {"trajectories": result.trajectories, "summary": result.summary}
    if scen == "bounds":
        results["bounds"] = [{"snr_db": s, "quantity": q, "S": S, "value": v}
                             for s, q, S, v in result.tables["bounds"]]
    elif scen == "surface":
        sf, D = result.tables["surface"]
        results["surface"] = {"sf": sf, "delta_mse": D}
    return {"spec": result.spec.to_dict(), "results": _jsonable(results),
            "references": _jsonable(result.references), "run_id": result.run_id,
            "meta": _jsonable(result.meta)}


def write_result(result, out_dir, fmt="csv"):
    """Write ``<scenario>.csv`` plus ``meta.json``, or a single ``<scenario>.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scen = result.spec.scenario
    if fmt == "csv":
        path = out / f"{scen}.csv"
        path.write_text("\n".join(csv_lines(result)) + "\n")
        meta = {"spec": result.spec.to_dict(), "run_id": result.run_id,
                "meta": _jsonable(result.meta)}
        (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return [path, out / "meta.json"]
    if fmt == "json":
        path = out / f"{scen}.json"
        path.write_text(json.dumps(result_json(result), indent=2, sort_keys=True) + "\n")
        return [path]
    raise ValueError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------- #
# configuration files

_CONFIG_KEYS = {
    "experiment": {"scenario": str, "estimators": "list", "n_blocks": int,
                   "n_trials": int, "n_data_blocks": int},
    "system": {"N": int, "Nc": int, "K": int, "L": int, "cp_len_chips": int,
               "samples_per_chip": int, "snr_db": float, "chip_duration": float,
               "seed": int},
    "hyperparams": {"lam": float, "delta": float, "mu": float, "mu_p": float,
                    "at_iterations": int},
    "channel": {"profile": str, "rate": float, "n_clusters": int,
                "intra_rate": float, "inter_rate": float, "file": str},
    "bounds": {"snr_db": "floats", "groups": "ints"},
    "surface": {"step": float},
}


def _convert(kind, raw, where):
    try:
        if kind == "list":
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        if kind == "floats":
            return tuple(float(s) for s in raw.split(",") if s.strip())
        if kind == "ints":
            return tuple(int(s) for s in raw.split(",") if s.strip())
        return kind(raw)
    except ValueError:
        raise SpecError([f"{where}: cannot parse {raw!r}"]) from None


def load_config(path, scenario=None):
    """
    Parse an INI experiment file into an :class:`ExperimentSpec`.

    Unknown sections or keys are errors. ``scenario`` (e.g. from the CLI
    subcommand) fills in or must agree with ``[experiment] scenario``.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(Path(path).read_text(), source=str(path))
    except configparser.Error as exc:
        raise SpecError([str(exc)]) from None
    values, problems = {}, []
    for section in cp.sections():
        if section not in _CONFIG_KEYS:
            problems.append(f"unknown section [{section}]")
            continue
        for key, raw in cp.items(section):
            kind = _CONFIG_KEYS[section].get(key)
            if kind is None:
                problems.append(f"unknown key '{key}' in [{section}]")
                continue
            try:
                values[(section, key)] = _convert(kind, raw, f"[{section}] {key}")
            except SpecError as exc:
                problems.extend(exc.problems)
    if problems:
        raise SpecError(problems)
    return spec_from_values(values, scenario)


def spec_from_values(values, scenario=None):
    def pick(section):
        return {k: v for (s, k), v in values.items() if s == section}

    exp = pick("experiment")
    scen = exp.pop("scenario", scenario)
    if scenario is not None and scen != scenario:
        raise SpecError([f"config scenario {scen!r} does not match {scenario!r}"])
    if scen is None:
        raise SpecError(["no scenario given"])
    try:
        cfg = uwb.SystemConfig(**pick("system"))
    except ValueError as exc:
        raise SpecError([str(exc)]) from None

    chan = pick("channel")
    kind = chan.pop("profile", "exp_decay")
    channel_file = chan.pop("file", None)
    if kind == "exp_decay":
        allowed, ctor = {"rate"}, uwb.ExpDecay
    elif kind == "cluster":
        allowed, ctor = {"n_clusters", "intra_rate", "inter_rate"}, uwb.Cluster
    else:
        raise SpecError([f"unknown channel profile {kind!r}"])
    extra = set(chan) - allowed
    if extra:
        raise SpecError([f"[channel] keys {sorted(extra)} do not apply to profile {kind}"])

    kwargs = dict(exp)
    kwargs.update(pick("hyperparams"))
    bounds = pick("bounds")
    if "snr_db" in bounds:
        kwargs["snr_list"] = bounds["snr_db"]
    if "groups" in bounds:
        kwargs["bound_groups"] = bounds["groups"]
    if "step" in pick("surface"):
        kwargs["surface_step"] = pick("surface")["step"]
    return ExperimentSpec(scenario=scen, cfg=cfg, profile=ctor(**chan),
                          channel_file=channel_file, **kwargs)
