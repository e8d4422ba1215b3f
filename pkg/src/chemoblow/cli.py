"""Experiment orchestration: config parsing, pipeline runs, artifact emission.

A single plain-text config (key = value) drives four scenarios:

    certify-only       select constants and machine-check the residual signs
    blowup             full pipeline: select -> certify -> generate data ->
                       simulate -> compare ordering -> verdict
    subcritical-probe  empirical boundedness run on smooth bump data
    sweep              one row per sigma in sigma_list, classified against
                       the critical exponent 4/n (exactly-critical values are
                       reported inconclusive: neither regime covers them)

Exit codes: 0 all requested checks pass, 1 usage/config error,
2 certification failure, 3 ordering/verdict failure.  Outputs are plain CSV
plus a self-contained matplotlib plot script; same config, byte-identical
artifacts.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import mass, radial, verify
from .errors import ChemoblowError, ConfigError
from .params import (
    MODEL_KEYS,
    ModelParams,
    derived_constants,
    params_from_mapping,
    parse_kv_text,
)
from .radial import RunControls, build_grid, run
from .subsolution import (
    initial_data,
    initial_state,
    select_exponents,
    select_parameters,
    spec_to_config,
    write_profile_csv,
    y_of_t,
)

SCENARIOS = ("blowup", "subcritical-probe", "certify-only", "sweep")

_DEFAULTS = {
    "M": 256,
    "Ns": 512,
    "Nt": 256,
    "t_end": 1.0,
    "dt_init": 1e-3,
    "dt_min": 1e-8,
    "blowup_factor": 1e6,
    "T_star": 1.0,
    "u_amp": 2.0,
    "w_amp": 1.0,
}

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CERTIFICATION = 2
EXIT_VERDICT = 3

#: ordering slack relative to max U (discretization allowance)
ORDERING_RTOL = 1e-4


@dataclass
class ExperimentConfig:
    params: ModelParams
    mode: str
    scenario: str
    M: int
    Ns: int
    Nt: int
    t_end: float
    dt_init: float
    dt_min: float
    blowup_factor: float
    T_star: float
    u_amp: float
    w_amp: float
    sigma_list: list = field(default_factory=list)
    out_dir: Path = Path("out")
    verbose: bool = False


def config_from_mapping(mapping: dict, out_dir="out", scenario_override=None,
                        verbose=False) -> ExperimentConfig:
    """Validate the full experiment mapping before any computation starts."""
    known = set(MODEL_KEYS) | set(_DEFAULTS) | {"scenario", "sigma_list"}
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    model_map = {k: v for k, v in mapping.items() if k in MODEL_KEYS}
    params, mode = params_from_mapping(model_map)
    scenario = scenario_override or mapping.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    vals = {}
    for key, default in _DEFAULTS.items():
        raw = mapping.get(key, default)
        try:
            vals[key] = type(default)(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    sigma_list = []
    if "sigma_list" in mapping:
        try:
            sigma_list = [float(x) for x in str(mapping["sigma_list"]).split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad sigma_list: {mapping['sigma_list']!r}") from exc
    if scenario == "sweep" and not sigma_list:
        raise ConfigError("scenario=sweep requires sigma_list")
    return ExperimentConfig(
        params=params, mode=mode, scenario=scenario, sigma_list=sigma_list,
        out_dir=Path(out_dir), verbose=verbose, **vals,
    )


def config_from_file(path, out_dir="out", scenario_override=None,
                     verbose=False) -> ExperimentConfig:
    text = Path(path).read_text()
    return config_from_mapping(parse_kv_text(text), out_dir, scenario_override, verbose)


def _say(cfg: ExperimentConfig, msg: str) -> None:
    if cfg.verbose:
        print(msg)


def _verdict_line(scenario, sigma, n, passed, t_trigger) -> str:
    trig = "none" if t_trigger is None else repr(float(t_trigger))
    return (f"scenario={scenario} sigma={float(sigma)!r} n={n} "
            f"pass={'true' if passed else 'false'} t_trigger={trig}\n")


def _controls(cfg: ExperimentConfig, t_end=None, keep_states=False) -> RunControls:
    return RunControls(
        t_end=cfg.t_end if t_end is None else t_end,
        dt_init=cfg.dt_init,
        dt_min=cfg.dt_min,
        blowup_factor=cfg.blowup_factor,
        keep_states=keep_states,
    )


def _emit_plot_script(out: Path) -> None:
    out.joinpath("plot.py").write_text(
        '"""Plot the CSV artifacts in this directory (matplotlib required)."""\n'
        "import csv\n"
        "import os\n"
        "import matplotlib.pyplot as plt\n"
        "\n"
        "def load(name):\n"
        "    with open(os.path.join(os.path.dirname(__file__) or '.', name)) as fh:\n"
        "        rows = list(csv.DictReader(fh))\n"
        "    return {k: [float(r[k]) for r in rows] for k in rows[0]\n"
        "            if k not in ('side', 'region')}\n"
        "\n"
        "if os.path.exists('run.csv'):\n"
        "    d = load('run.csv')\n"
        "    plt.figure()\n"
        "    plt.semilogy(d['t'], d['sup_u'], label='sup u')\n"
        "    plt.semilogy(d['t'], d['sup_w'], label='sup w')\n"
        "    plt.xlabel('t'); plt.legend(); plt.title('density peaks')\n"
        "    plt.savefig('sup_u.png', dpi=150)\n"
        "\n"
        "for name in sorted(os.listdir(os.path.dirname(__file__) or '.')):\n"
        "    if name.startswith('overlay_') and name.endswith('.csv'):\n"
        "        d = load(name)\n"
        "        plt.figure()\n"
        "        plt.plot(d['s'], d['U_sim'], label='U (simulated)')\n"
        "        plt.plot(d['s'], d['uU'], '--', label='uU (candidate)')\n"
        "        plt.xlabel('s'); plt.legend(); plt.title(name)\n"
        "        plt.savefig(name.replace('.csv', '.png'), dpi=150)\n"
        "\n"
        "if os.path.exists('residual_grid.csv'):\n"
        "    d = load('residual_grid.csv')\n"
        "    plt.figure()\n"
        "    sc = plt.scatter(d['s'], d['t'], c=d['p_value'], s=6)\n"
        "    plt.colorbar(sc, label='P residual')\n"
        "    plt.xscale('log'); plt.xlabel('s'); plt.ylabel('t')\n"
        "    plt.savefig('residual_grid.png', dpi=150)\n"
        "print('plots written')\n"
    )


@dataclass
class RunArtifacts:
    """Optional bundle of everything a scenario produced; emit what exists."""

    report: object = None
    sim: list = None
    spec: object = None
    certificate: object = None
    ordering: object = None


def emit_outputs(out_dir, artifacts: RunArtifacts) -> None:
    """Write CSV artifacts and the plot script for whatever was produced.

    Emits: run series and first/last checkpoints from a run report, the
    initial mass state and candidate overlays from a cumulated sequence,
    ordering margins, certificate text + CSV, closed-form residual grid
    samples, and a self-contained plot.py referencing the CSVs.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    a = artifacts
    if a.report is not None:
        radial.write_run_csv(out / "run.csv", a.report)
        if a.report.states:
            radial.write_checkpoint_csv(out / "checkpoint_first.csv", a.report.states[0])
            radial.write_checkpoint_csv(out / "checkpoint_last.csv", a.report.states[-1])
    if a.sim:
        mass.write_mass_csv(out / "mass_initial.csv", a.sim[0])
        if a.spec is not None:
            _emit_overlays(out, a.sim, a.spec)
    if a.ordering is not None:
        verify.write_ordering_csv(out / "ordering.csv", a.ordering)
    if a.certificate is not None:
        out.joinpath("certificate.txt").write_text(
            verify.certificate_to_text(a.certificate))
        verify.write_certificate_csv(out / "certificate.csv", a.certificate)
    if a.spec is not None:
        _emit_residual_grid(a.spec, out)
        spec = a.spec
        t_mid = float(spec.T) * 0.5
        # kink-adjacent samples plus a geometric sweep up to the outer boundary;
        # the kink can underflow float64 for extreme candidates, hence the floor
        kink = max(float(1 / y_of_t(spec, t_mid)), 1e-290)
        smax = float(spec.s_max)
        s = np.unique(np.concatenate([
            np.array([kink * (1 - 1e-9), kink * (1 + 1e-9)]),
            np.geomspace(kink * 1e-3, smax * (1 - 1e-12), 64),
        ]))
        write_profile_csv(out / "profiles_mid.csv", spec, s, t_mid)
    _emit_plot_script(out)


def _emit_residual_grid(spec, out: Path, ns: int = 48, nt: int = 8) -> None:
    """Coarse closed-form residual samples across all regions (heat-map data)."""
    records = []
    times = spec.T * (np.arange(nt, dtype=np.longdouble) + 0.5) / nt
    for t in times:
        tf = float(t)
        for region in verify.regions_for(spec):
            s = verify._region_s_samples(region, tf, ns)
            uU = verify.eval_sub(spec, "U", s, tf)
            uW = verify.eval_sub(spec, "W", s, tf)
            phi = mass.ProfilePoint(uU.value, uU.d_t, uU.d_s, uU.d_ss)
            psi = mass.ProfilePoint(uW.value, uW.d_t, uW.d_s, uW.d_ss)
            pv = mass.p_residual(phi, uW.value, spec.mu_hi, spec.n, s)
            qv = mass.q_residual(psi, uU.value, spec.K_big, spec.sigma, spec.n, s)
            kink = uU.kink
            for j in range(s.size):
                ratio = float(s[j]) / kink if kink > 0 else np.inf
                if region.kind == "inner" and ratio > 1.0 - 1e-5:
                    side = "left-limit"
                elif region.kind.startswith("intermediate") and ratio < 1.0 + 1e-5:
                    side = "right-limit"
                else:
                    side = "interior"
                records.append(mass.OperatorResidual(
                    float(s[j]), tf, float(pv[j]), float(qv[j]), side))
    mass.write_residual_csv(out / "residual_grid.csv", records)


def _run_blowup_pipeline(cfg: ExperimentConfig, out: Path) -> int:
    p = cfg.params
    dc = derived_constants(p)
    ex = select_exponents(p.n, p.sigma)
    spec = select_parameters(p, dc, ex, cfg.T_star)
    out.joinpath("spec.txt").write_text(spec_to_config(spec))
    _say(cfg, f"selected candidate: theta={float(spec.theta):.6g} "
              f"y0={float(spec.y0):.6g} T={float(spec.T):.6g}")

    cert = verify.certify_subsolution(spec, p, dc, cfg.Ns, cfg.Nt)
    if not cert.passed:
        emit_outputs(out, RunArtifacts(spec=spec, certificate=cert))
        out.joinpath("verdict.txt").write_text(
            _verdict_line("blowup", p.sigma, p.n, False, None))
        return EXIT_CERTIFICATION

    data = initial_data(spec, p)
    out.joinpath("initial_data.txt").write_text(
        f"c = {np.format_float_scientific(data.c)}\n"
        f"mass_u = {data.mass_u!r}\n"
        f"mass_w = {data.mass_w!r}\n"
        f"w_sup = {np.format_float_scientific(data.w_sup)}\n"
        f"w_sup_bound = {data.w_sup_bound!r}\n"
        f"w_sup_ok = {'true' if data.w_sup_ok else 'false'}\n"
    )
    grid = build_grid(p, cfg.M)
    state0 = initial_state(spec, p, grid, data)
    report = run(state0, p, _controls(cfg, t_end=cfg.T_star, keep_states=True))
    sim = [mass.cumulate(s, grid) for s in report.states]
    ordering = verify.compare_orderings(sim, spec, dc)
    ordering_ok = ordering.min_margin_u >= -ORDERING_RTOL * ordering.max_U
    verdict = verify.detect_blowup(report, spec)
    passed = bool(verdict.blew_up_before and ordering_ok)

    emit_outputs(out, RunArtifacts(report=report, sim=sim, spec=spec,
                                   certificate=cert, ordering=ordering))
    out.joinpath("ordering.txt").write_text(
        f"checked_times = {len(ordering.checked_times)}\n"
        f"min_margin_u = {ordering.min_margin_u!r} "
        f"at t = {ordering.min_margin_u_time!r}, s = {ordering.min_margin_u_s!r}\n"
        f"min_margin_w = {ordering.min_margin_w!r}\n"
        f"c3_ok = {'true' if ordering.c3_ok else 'false'}\n"
        f"c4_min_margin = {ordering.c4_min_margin!r}\n"
        f"ordering_ok = {'true' if ordering_ok else 'false'}\n"
        f"envelope_check = {verdict.lower_envelope_check}\n"
        f"envelope_min_gap = {verdict.envelope_min_gap!r}\n"
    )
    out.joinpath("verdict.txt").write_text(
        _verdict_line("blowup", p.sigma, p.n, passed, verdict.t_trigger))
    return EXIT_OK if passed else EXIT_VERDICT


def _emit_overlays(out: Path, sim, spec) -> None:
    """U vs uU overlays at up to three checked times."""
    if not sim:
        return
    picks = sorted({0, len(sim) // 2, len(sim) - 1})
    for idx in picks:
        ms = sim[idx]
        if ms.t >= float(spec.T):
            continue
        uU = verify.eval_sub(spec, "U", ms.sgrid.s.astype(float), ms.t)
        uW = verify.eval_sub(spec, "W", ms.sgrid.s.astype(float), ms.t)
        with open(out / f"overlay_{idx}.csv", "w") as fh:
            fh.write("s,U_sim,uU,W_sim,uW\n")
            for j in range(ms.sgrid.s.size):
                fh.write(",".join(repr(float(x)) for x in (
                    ms.sgrid.s[j], ms.U[j], uU.value[j], ms.W[j], uW.value[j],
                )) + "\n")


def _run_probe(cfg: ExperimentConfig, out: Path, sigma=None) -> int:
    p = cfg.params if sigma is None else ModelParams(
        n=cfg.params.n, R=cfg.params.R, k=cfg.params.k, sigma=sigma,
        M_lo=cfg.params.M_lo, M_hi=cfg.params.M_hi)
    probe = verify.boundedness_probe(
        p, _controls(cfg), M=cfg.M, u_amp=cfg.u_amp, w_amp=cfg.w_amp)
    emit_outputs(out, RunArtifacts(report=probe.run_report))
    out.joinpath("verdict.txt").write_text(
        _verdict_line("subcritical-probe", p.sigma, p.n, probe.bounded,
                      probe.run_report.blowup_time_estimate))
    return EXIT_OK if probe.bounded else EXIT_VERDICT


def _run_sweep(cfg: ExperimentConfig, out: Path) -> int:
    critical = 4.0 / cfg.params.n
    rows = []
    all_ok = True
    for sigma in cfg.sigma_list:
        tag = f"sigma_{sigma!r}".replace(".", "p")
        sub = out / tag
        sub.mkdir(parents=True, exist_ok=True)
        if sigma == critical:
            rows.append((sigma, "inconclusive", "critical exponent: outside both regimes"))
            sub.joinpath("verdict.txt").write_text(
                _verdict_line("sweep-critical", sigma, cfg.params.n, True, None))
            continue
        sub_params = ModelParams(
            n=cfg.params.n, R=cfg.params.R, k=cfg.params.k, sigma=sigma,
            M_lo=cfg.params.M_lo, M_hi=cfg.params.M_hi)
        sub_cfg = ExperimentConfig(
            params=sub_params, mode=cfg.mode, scenario=cfg.scenario,
            M=cfg.M, Ns=cfg.Ns, Nt=cfg.Nt, t_end=cfg.t_end,
            dt_init=cfg.dt_init, dt_min=cfg.dt_min,
            blowup_factor=cfg.blowup_factor, T_star=cfg.T_star,
            u_amp=cfg.u_amp, w_amp=cfg.w_amp, out_dir=sub, verbose=cfg.verbose)
        if sigma > critical:
            code = _run_blowup_pipeline(sub_cfg, sub)
            rows.append((sigma, "blowup" if code == EXIT_OK else "failed",
                         f"exit {code}"))
        else:
            code = _run_probe(sub_cfg, sub, sigma=sigma)
            rows.append((sigma, "bounded" if code == EXIT_OK else "failed",
                         f"exit {code}"))
        all_ok = all_ok and code == EXIT_OK
    with open(out / "sweep.csv", "w") as fh:
        fh.write("sigma,outcome,detail\n")
        for sigma, outcome, detail in rows:
            fh.write(f"{sigma!r},{outcome},{detail}\n")
    return EXIT_OK if all_ok else EXIT_VERDICT


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run the configured scenario; writes artifacts under cfg.out_dir."""
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    if cfg.scenario == "certify-only":
        p = cfg.params
        dc = derived_constants(p)
        spec = select_parameters(p, dc, select_exponents(p.n, p.sigma), cfg.T_star)
        out.joinpath("spec.txt").write_text(spec_to_config(spec))
        cert = verify.certify_subsolution(spec, p, dc, cfg.Ns, cfg.Nt)
        emit_outputs(out, RunArtifacts(spec=spec, certificate=cert))
        out.joinpath("verdict.txt").write_text(
            _verdict_line("certify-only", p.sigma, p.n, cert.passed, None))
        return EXIT_OK if cert.passed else EXIT_CERTIFICATION
    if cfg.scenario == "blowup":
        return _run_blowup_pipeline(cfg, out)
    if cfg.scenario == "subcritical-probe":
        return _run_probe(cfg, out)
    if cfg.scenario == "sweep":
        return _run_sweep(cfg, out)
    raise ConfigError(f"unhandled scenario {cfg.scenario!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chemoblow",
        description="simulate and certify finite-time blow-up in the "
                    "indirect-signal chemotaxis model",
    )
    parser.add_argument("--config", required=True, help="key = value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--scenario", default=None, help="override config scenario")
    parser.add_argument("--seed", default=None,
                        help="reserved; the pipeline is deterministic")
    parser.add_argument("--verbose", action="store_true")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        cfg = config_from_file(args.config, args.out, args.scenario, args.verbose)
        return run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChemoblowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
