"""Command-line interface.

Subcommands: ``fit`` (single model run), ``simulate`` (synthetic
historical/current Poisson pair), ``elicit`` (hyperparameters from a
previous study), ``compare`` (prior-comparison batch over a lambda grid),
and ``iid`` (intercept-only closed-form analysis).

Every fit writes a reproducibility manifest; rerunning with
``--from-manifest`` produces byte-identical draws files.  All file writes
are whole-file atomic (write to a temp name, then rename).  Exit codes:
0 success, 2 configuration error, 3 data error, 4 numeric or convergence
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    build_design,
    file_sha256,
    load_batch_config,
    load_run_config,
    load_table,
    parse_run_config,
)
from .elicit import HistoricalSummary, build_hpp_from_summary, summary_from_data
from .errors import ConfigError, DataError, HppglmError
from .iid import (
    DyPrior,
    Hyperprior,
    dy_update,
    hyperprior_standard_form,
    limiting_m_posterior,
    m_posterior_moments,
)
from .kernels import CiPrior, GlmData, GppConfig, HppHyper, PowerPriorConfig
from .linear import sample_lm_hpp_joint
from .sampling import (
    BetaPosteriorModel,
    Draws,
    HppModel,
    SamplerConfig,
    sample_posterior,
)
from .simulate import SimSpec, simulate_pair
from .summarize import format_table, summarize

FMT = "%.17g"


# -- atomic file helpers -------------------------------------------------------


def _atomic_write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fd, tmp = tempfile.mkstemp(
        dir=os.path.dirname(os.path.abspath(path)), suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_line(values):
    return ",".join(
        v if isinstance(v, str) else FMT % v for v in values
    )


def write_draws_csv(path, draws: Draws):
    lines = [_csv_line(["chain", "draw"] + draws.param_names + ["log_posterior"])]
    c, k, d = draws.samples.shape
    for ch in range(c):
        for i in range(k):
            row = [str(ch), str(i)] + [
                FMT % v for v in draws.samples[ch, i]
            ] + [FMT % draws.log_posterior[ch, i]]
            lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_summary_csv(path, rows):
    header = (
        "parameter,mean,sd,hpd_lower,hpd_upper,prob_nonpositive,mc_se,ess,rhat,flag"
    )
    lines = [header]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.name,
                    FMT % r.mean,
                    FMT % r.sd,
                    FMT % r.hpd_lower,
                    FMT % r.hpd_upper,
                    FMT % r.prob_nonpositive,
                    FMT % r.mc_se,
                    FMT % r.ess,
                    (FMT % r.rhat) if r.rhat is not None else "",
                    r.flag or "",
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_matrix_csv(path, header, matrix):
    lines = [",".join(header)]
    for row in np.atleast_2d(matrix):
        lines.append(",".join(FMT % v for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


# -- prior/model assembly -------------------------------------------------------


def _historical_from_summary_spec(spec, family, data_spec):
    """HistoricalSummary from a config prior.summary node."""
    if "path" in spec:
        from dataclasses import replace

        hist_spec = replace(data_spec, path=spec["path"], groups=None)
        hist_data, _, _ = build_design(hist_spec, family)
        return summary_from_data(family, hist_data), hist_data
    beta0 = np.asarray(spec["beta0"], dtype=float)
    se0 = np.asarray(spec["se0"], dtype=float)
    return HistoricalSummary(beta0, se0), None


def _resolve_mu0(cfg: RunConfig, data, labels, table, summary):
    node = cfg.prior.mu0
    fam = cfg.family
    n = data.n
    if node == "from_summary" or node is None:
        if summary is None:
            raise ConfigError("mu0 from_summary requires prior.summary")
        return build_hpp_from_summary(data.X, summary, fam).hyper.mu0
    if not isinstance(node, dict):
        raise ConfigError(
            "prior.mu0 must be a mapping (values/piecewise/coefficients/file) "
            "or the string 'from_summary'"
        )
    if "values" in node:
        mu0 = np.asarray(node["values"], dtype=float)
        if mu0.size == 1:
            mu0 = np.full(n, float(mu0))
        if mu0.shape != (n,):
            raise ConfigError(f"mu0.values must have length {n}")
        return mu0
    if "file" in node:
        cols = load_table(node["file"])
        if "mu0" not in cols:
            raise DataError(f"{node['file']}: expected a mu0 column")
        mu0 = cols["mu0"]
        if mu0.shape != (n,):
            raise ConfigError(f"{node['file']}: mu0 length {mu0.size}, expected {n}")
        return mu0
    if "piecewise" in node:
        rule = node["piecewise"]
        for key in ("column", "cutoff", "below", "above"):
            if key not in rule:
                raise ConfigError(f"mu0.piecewise needs {key!r}")
        col = rule["column"]
        if col not in table:
            raise DataError(f"piecewise column {col!r} not in the data file")
        vals = table[col]
        return np.where(
            vals < float(rule["cutoff"]), float(rule["below"]), float(rule["above"])
        )
    if "coefficients" in node:
        from .kernels import mu0_from_coefficients

        rule = node["coefficients"]
        alpha0 = np.asarray(rule.get("alpha0"), dtype=float)
        want = rule.get("columns")
        if want is None:
            raise ConfigError("mu0.coefficients needs 'columns' (design labels)")
        missing = [c for c in want if c not in labels]
        if missing:
            raise ConfigError(f"unknown design columns in mu0.coefficients: {missing}")
        X1 = data.X[:, [labels.index(c) for c in want]]
        return mu0_from_coefficients(X1, alpha0, cfg.family)
    raise ConfigError("unrecognized mu0 specification")


def _resolve_lambda0(cfg: RunConfig, data, summary, mu0):
    node = cfg.prior.lambda0
    n = data.n
    if node == "from_summary":
        if summary is None:
            raise ConfigError("lambda0 from_summary requires prior.summary")
        res = build_hpp_from_summary(data.X, summary, cfg.family)
        return res.hyper.lambda0, res.capped
    if isinstance(node, dict) and "file" in node:
        cols = load_table(node["file"])
        if "lambda0" not in cols:
            raise DataError(f"{node['file']}: expected a lambda0 column")
        lam0 = cols["lambda0"]
    elif isinstance(node, (list, tuple)):
        lam0 = np.asarray(node, dtype=float)
    else:
        lam0 = np.full(n, float(node))
    if lam0.shape != (n,):
        raise ConfigError(f"lambda0 must be a scalar or length-{n} vector")
    return lam0, np.zeros(n, dtype=bool)


def build_model(cfg: RunConfig):
    """Assemble the posterior model from a parsed run configuration.

    Returns (model, labels, meta) where model is an HppModel, a
    BetaPosteriorModel, or a ("lm_exact", ...) tuple for the normal-family
    closed-form path.
    """
    data, labels, table = build_design(cfg.data, cfg.family)
    summary = None
    hist_data = None
    if cfg.prior.summary is not None:
        summary, hist_data = _historical_from_summary_spec(
            cfg.prior.summary, cfg.family, cfg.data
        )
    meta = {"design_columns": labels, "n": data.n, "p": data.p}

    kind = cfg.prior.kind
    if kind == "flat":
        return BetaPosteriorModel(cfg.family, data), labels, meta
    if kind == "gpp":
        gpp = GppConfig(summary.beta0_hat, summary.se0, cfg.prior.lam)
        return BetaPosteriorModel(cfg.family, data, gpp), labels, meta
    if kind == "pp":
        if hist_data is None:
            raise ConfigError("the power prior requires the full historical data set")
        pp = PowerPriorConfig(cfg.prior.lam, hist_data.y, hist_data.X)
        return BetaPosteriorModel(cfg.family, data, pp), labels, meta
    mu0 = _resolve_mu0(cfg, data, labels, table, summary)
    if kind == "ci":
        prior = CiPrior(cfg.prior.lam, mu0)
        return BetaPosteriorModel(cfg.family, data, prior), labels, meta
    lam0, capped = _resolve_lambda0(cfg, data, summary, mu0)
    if np.any(capped):
        idx = np.where(capped)[0]
        print(
            f"warning: lambda0 capped at degeneracy bound for component(s) "
            f"{idx.tolist()} (hyperprior is effectively a point mass there)",
            file=sys.stderr,
        )
    hyper = HppHyper(lam0, mu0)
    scalar_lam0 = np.all(lam0 == lam0[0])
    if cfg.family == "normal" and scalar_lam0:
        return ("lm_exact", data, cfg.prior.lam, float(lam0[0]), mu0), labels, meta
    model = HppModel(cfg.family, data, cfg.prior.lam, hyper, cfg.prior.normconst)
    return model, labels, meta


def _exact_normal_draws(parts, scfg: SamplerConfig) -> Draws:
    """Exact joint draws for the normal-family HPP closed form."""
    _, data, lam, lam0, mu0 = parts
    X, y = data.X, data.y
    n, p = data.n, data.p
    seeds = np.random.SeedSequence(scfg.seed).spawn(scfg.n_chains)
    chains = []
    lps = []
    gram = X.T @ X
    hat = X @ np.linalg.solve(gram, X.T)
    sign, logdet = np.linalg.slogdet(lam * gram)
    logz_const = 0.5 * p * np.log(2.0 * np.pi) - 0.5 * logdet
    for ss in seeds:
        rng = np.random.default_rng(ss)
        zz = sample_lm_hpp_joint(X, y, lam, lam0, mu0, scfg.n_keep, rng)
        beta, m = zz[:, :p], zz[:, p:]
        eta = beta @ X.T
        kern = np.sum((y + lam * m) * eta, axis=1) - 0.5 * (1.0 + lam) * np.sum(
            eta**2, axis=1
        )
        hyper = np.sum(lam0 * (m * mu0 - 0.5 * m**2), axis=1)
        logz = logz_const + 0.5 * lam * np.sum(m * (m @ hat.T), axis=1)
        chains.append(zz)
        lps.append(kern + hyper - logz)
    names = [f"beta{j}" for j in range(p)] + [f"m{i + 1}" for i in range(n)]
    return Draws(
        samples=np.stack(chains),
        param_names=names,
        log_posterior=np.stack(lps),
        acceptance_rate=np.ones(scfg.n_chains),
        seed=scfg.seed,
        algorithm="exact_normal",
    )


def run_fit(cfg: RunConfig):
    """Execute a fit configuration; returns (draws, rows, labels, meta)."""
    model, labels, meta = build_model(cfg)
    s = cfg.sampler
    scfg = SamplerConfig(
        n_chains=s.chains,
        n_warmup=s.warmup,
        n_keep=s.keep,
        seed=s.seed,
        algorithm=s.algorithm,
        thinning=s.thinning,
        target_accept=s.target_accept,
    )
    if isinstance(model, tuple) and model[0] == "lm_exact":
        draws = _exact_normal_draws(model, scfg)
        meta = dict(meta, path="closed_form")
    else:
        draws = sample_posterior(model, scfg)
        meta = dict(meta, path="mcmc")
    rows = summarize(draws, level=cfg.level, params="beta")
    if cfg.m_summaries:
        rows = rows + summarize(draws, level=cfg.level, params="m")
    return draws, rows, labels, meta


def _write_fit_outputs(cfg: RunConfig, raw_cfg: dict, base: str, draws, rows, labels, meta):
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    draws_path = os.path.join(out, "draws.csv")
    write_draws_csv(draws_path, draws)
    write_summary_csv(os.path.join(out, "summary.csv"), rows)
    table = format_table(rows, cfg.level)
    _atomic_write(os.path.join(out, "summary.txt"), table + "\n")
    manifest = {
        "package": "hppglm",
        "version": __version__,
        "command": "fit",
        "config": raw_cfg,
        "config_base": base,
        "seed": cfg.sampler.seed,
        "design_columns": labels,
        "meta": meta,
        "inputs": {cfg.data.path: file_sha256(cfg.data.path)},
        "outputs": ["draws.csv", "summary.csv", "summary.txt"],
    }
    if cfg.prior.summary and "path" in cfg.prior.summary:
        p = cfg.prior.summary["path"]
        manifest["inputs"][p] = file_sha256(p)
    _atomic_write(
        os.path.join(out, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )
    return table


def cmd_fit(args) -> int:
    if args.from_manifest:
        with open(args.from_manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        raw = manifest["config"]
        base = manifest["config_base"]
        cfg = parse_run_config(raw, base)
        for path, digest in manifest.get("inputs", {}).items():
            if file_sha256(path) != digest:
                raise DataError(f"input {path} changed since the manifest was written")
    else:
        if not args.config:
            raise ConfigError("fit requires --config or --from-manifest")
        cfg = load_run_config(args.config)
        raw = cfg.raw
        base = os.path.dirname(os.path.abspath(args.config))
    overrides = {
        key: getattr(args, key)
        for key in ("seed", "chains", "keep", "warmup")
        if getattr(args, key) is not None
    }
    if overrides or args.out is not None:
        raw = dict(raw)
        if overrides:
            raw["sampler"] = dict(raw.get("sampler", {}), **overrides)
        if args.out is not None:
            raw["output"] = dict(raw.get("output", {}), dir=os.path.abspath(args.out))
        cfg = parse_run_config(raw, base)
    table = _write_fit_outputs(cfg, raw, base, *run_fit(cfg))
    print(table)
    print(f"outputs written to {cfg.out_dir}")
    return 0


# -- simulate -------------------------------------------------------------------


def _write_dataset_csv(path, data: GlmData):
    header = ["y", "treatment", "race", "age"]
    rows = np.column_stack([data.y, data.X[:, 1], data.X[:, 2], data.X[:, 3]])
    write_matrix_csv(path, header, rows)


def cmd_simulate(args) -> int:
    beta_hist = tuple(args.beta_historical)
    spec = SimSpec(
        n=args.n,
        n0=args.n0,
        beta_historical=beta_hist,
        beta_current=beta_hist,
        seed=args.seed,
    )
    if args.scenario == "incompatible":
        spec = spec.incompatible()
    hist, cur = simulate_pair(spec)
    os.makedirs(args.out, exist_ok=True)
    hist_path = os.path.join(args.out, "historical.csv")
    cur_path = os.path.join(args.out, f"current_{args.scenario}.csv")
    _write_dataset_csv(hist_path, hist)
    _write_dataset_csv(cur_path, cur)
    manifest = {
        "package": "hppglm",
        "version": __version__,
        "command": "simulate",
        "spec": {
            "n": spec.n,
            "n0": spec.n0,
            "beta_historical": list(spec.beta_historical),
            "beta_current": list(spec.beta_current),
            "treat_prob": spec.treat_prob,
            "race_prob": spec.race_prob,
            "age_mean": spec.age_mean,
            "age_sd": spec.age_sd,
            "seed": spec.seed,
        },
        "outputs": [os.path.basename(hist_path), os.path.basename(cur_path)],
    }
    _atomic_write(
        os.path.join(args.out, "simulate_manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )
    print(f"wrote {hist_path} and {cur_path}")
    return 0


# -- elicit ----------------------------------------------------------------------


def cmd_elicit(args) -> int:
    cfg = load_run_config(args.config)
    data, labels, _ = build_design(cfg.data, cfg.family)
    if cfg.prior.summary is None:
        raise ConfigError("elicit requires prior.summary in the config")
    summary, _ = _historical_from_summary_spec(cfg.prior.summary, cfg.family, cfg.data)
    res = build_hpp_from_summary(data.X, summary, cfg.family)
    out = args.out or os.path.join(cfg.out_dir, "hyper.csv")
    header = ["mu0", "lambda0", "tau", "capped"]
    rows = np.column_stack(
        [res.hyper.mu0, res.hyper.lambda0, res.tau, res.capped.astype(float)]
    )
    write_matrix_csv(out, header, rows)
    n_capped = int(res.capped.sum())
    if n_capped:
        print(
            f"warning: {n_capped} component(s) capped at the degeneracy bound",
            file=sys.stderr,
        )
    print(f"wrote {out}")
    return 0


# -- compare ----------------------------------------------------------------------


def _compare_cell(cell):
    """Run one (prior, lam) cell of a comparison batch."""
    (kind, lam, batch, seed) = cell
    from dataclasses import replace

    data, labels, table = build_design(batch.data, batch.family)
    hist_spec = replace(batch.data, path=batch.historical_path, groups=None)
    hist_data, _, _ = build_design(hist_spec, batch.family)
    summary = summary_from_data(batch.family, hist_data)
    if kind == "flat":
        model = BetaPosteriorModel(batch.family, data)
    elif kind == "gpp":
        model = BetaPosteriorModel(
            batch.family, data, GppConfig(summary.beta0_hat, summary.se0, lam)
        )
    elif kind == "pp":
        model = BetaPosteriorModel(
            batch.family, data, PowerPriorConfig(lam, hist_data.y, hist_data.X)
        )
    elif kind == "ci":
        res = build_hpp_from_summary(data.X, summary, batch.family)
        model = BetaPosteriorModel(batch.family, data, CiPrior(lam, res.hyper.mu0))
    else:
        res = build_hpp_from_summary(data.X, summary, batch.family)
        model = HppModel(batch.family, data, lam, res.hyper)
    s = batch.sampler
    scfg = SamplerConfig(
        n_chains=s.chains,
        n_warmup=s.warmup,
        n_keep=s.keep,
        seed=seed,
        algorithm=s.algorithm,
        thinning=s.thinning,
        target_accept=s.target_accept,
    )
    draws = sample_posterior(model, scfg)
    rows = summarize(draws, level=batch.level, params="beta")
    return draws, rows


def cmd_compare(args) -> int:
    batch = load_batch_config(args.config)
    jobs = args.jobs if args.jobs is not None else batch.jobs
    cells = []
    for kind in batch.priors:
        if kind == "flat":
            cells.append((kind, 1.0, batch, None))
            continue
        for lam in batch.lambdas:
            cells.append((kind, lam, batch, None))
    # deterministic per-cell seeds derived from the root seed by position
    cells = [
        (kind, lam, batch, batch.sampler.seed * 1000 + i)
        for i, (kind, lam, batch, _) in enumerate(cells)
    ]
    os.makedirs(batch.out_dir, exist_ok=True)
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_compare_cell, c) for c in cells]
            outcomes = []
            for fut in futures:
                try:
                    outcomes.append((fut.result(), None))
                except HppglmError as exc:
                    outcomes.append((None, exc))
    else:
        outcomes = []
        for c in cells:
            try:
                outcomes.append((_compare_cell(c), None))
            except HppglmError as exc:
                outcomes.append((None, exc))
    lines = [
        "prior,lam,parameter,mean,sd,hpd_lower,hpd_upper,prob_nonpositive,ess,rhat,status"
    ]
    for (kind, lam, _, seed), (outcome, err) in zip(cells, outcomes):
        tag = f"{kind}_lam{lam:g}"
        if err is not None:
            lines.append(f"{kind},{lam:g},,,,,,,,,failed: {err}")
            results.append((kind, lam, None))
            continue
        draws, rows = outcome
        write_draws_csv(os.path.join(batch.out_dir, f"draws_{tag}.csv"), draws)
        for r in rows:
            lines.append(
                ",".join(
                    [
                        kind,
                        "%g" % lam,
                        r.name,
                        FMT % r.mean,
                        FMT % r.sd,
                        FMT % r.hpd_lower,
                        FMT % r.hpd_upper,
                        FMT % r.prob_nonpositive,
                        FMT % r.ess,
                        (FMT % r.rhat) if r.rhat is not None else "",
                        "ok",
                    ]
                )
            )
        results.append((kind, lam, rows))
    _atomic_write(os.path.join(batch.out_dir, "comparison.csv"), "\n".join(lines) + "\n")
    manifest = {
        "package": "hppglm",
        "version": __version__,
        "command": "compare",
        "config": batch.raw,
        "inputs": {
            batch.data.path: file_sha256(batch.data.path),
            batch.historical_path: file_sha256(batch.historical_path),
        },
        "outputs": ["comparison.csv"],
    }
    _atomic_write(
        os.path.join(batch.out_dir, "compare_manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )
    n_failed = sum(1 for _, _, rows in results if rows is None)
    print(f"wrote {batch.out_dir}/comparison.csv ({n_failed} failed cells)")
    return 0 if n_failed == 0 else 4


# -- iid --------------------------------------------------------------------------


def cmd_iid(args) -> int:
    fam = args.family
    hp = Hyperprior(fam, args.lambda0, args.mu0)
    dens = hyperprior_standard_form(fam, hp)
    mean, sd, logz = m_posterior_moments(fam, args.n, args.ybar, args.lam, hp)
    dy_post = dy_update(args.n, args.ybar, DyPrior(fam, args.lam, args.mu0))
    out = {
        "family": fam,
        "n": args.n,
        "ybar": args.ybar,
        "lam": args.lam,
        "lambda0": args.lambda0,
        "mu0": args.mu0,
        "hyperprior": {"kind": dens.kind, "params": list(dens.params)},
        "m_posterior": {"mean": mean, "sd": sd, "log_normconst": logz},
        "dy_posterior_at_mu0": {"lam": dy_post.lam, "m": dy_post.m},
    }
    try:
        mix = limiting_m_posterior(fam, args.n, args.ybar, args.lam, hp)
        out["limiting_approx"] = {
            "weights": [float(w) for w in mix.weights],
            "components": [
                {"kind": c.kind, "params": list(c.params)} for c in mix.components
            ],
        }
    except HppglmError as exc:
        out["limiting_approx"] = {"unavailable": str(exc)}
    text = json.dumps(out, indent=2)
    if args.json:
        _atomic_write(args.json, text + "\n")
        print(f"wrote {args.json}")
    else:
        print(text)
    return 0


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hppglm",
        description="Bayesian GLMs with hierarchical prediction priors",
    )
    ap.add_argument("--version", action="version", version=f"hppglm {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="run a configured model fit")
    fit.add_argument("--config", help="YAML run configuration")
    fit.add_argument("--from-manifest", help="re-run from a manifest.json")
    fit.add_argument("--seed", type=int, help="override sampler seed")
    fit.add_argument("--chains", type=int, help="override chain count")
    fit.add_argument("--keep", type=int, help="override kept draws per chain")
    fit.add_argument("--warmup", type=int, help="override warmup iterations")
    fit.add_argument("--out", help="override output directory")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="generate a historical/current Poisson pair")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--n", type=int, default=75, help="current sample size")
    sim.add_argument("--n0", type=int, default=50, help="historical sample size")
    sim.add_argument(
        "--scenario",
        choices=("compatible", "incompatible"),
        default="compatible",
        help="current-data treatment effect equal to historical, or null",
    )
    sim.add_argument(
        "--beta-historical",
        type=float,
        nargs=4,
        default=list(SimSpec().beta_historical),
        metavar=("B0", "B1", "B2", "B3"),
        help="true historical coefficients (intercept, treatment, race, age)",
    )
    sim.set_defaults(func=cmd_simulate)

    eli = sub.add_parser("elicit", help="hyperparameters from a previous study")
    eli.add_argument("--config", required=True, help="fit-style YAML config")
    eli.add_argument("--out", help="output CSV (default <output.dir>/hyper.csv)")
    eli.set_defaults(func=cmd_elicit)

    cmp_ = sub.add_parser("compare", help="prior comparison over a lambda grid")
    cmp_.add_argument("--config", required=True, help="batch YAML config")
    cmp_.add_argument("--jobs", type=int, help="parallel cells (default from config)")
    cmp_.set_defaults(func=cmd_compare)

    iid = sub.add_parser("iid", help="intercept-only closed-form analysis")
    iid.add_argument("--family", required=True, choices=list(FAMILIES_CHOICES))
    iid.add_argument("--n", type=int, required=True)
    iid.add_argument("--ybar", type=float, required=True)
    iid.add_argument("--lam", type=float, required=True)
    iid.add_argument("--lambda0", type=float, required=True)
    iid.add_argument("--mu0", type=float, required=True)
    iid.add_argument("--json", help="write the report to this path")
    iid.set_defaults(func=cmd_iid)
    return ap


FAMILIES_CHOICES = ("bernoulli", "poisson", "gamma", "normal")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except HppglmError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
