"""Run-configuration parsing and data loading for the CLI.

Configs are YAML files (key-value with nested sections); the full schema
is documented in the README.  Paths inside a config resolve relative to
the config file's directory and are stored absolute so a run manifest
can reproduce the run from anywhere.
"""

from __future__ import annotations

import csv
import hashlib
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError, DataError
from .kernels import GlmData

__all__ = [
    "CovariateSpec",
    "DataSpec",
    "PriorSpec",
    "SamplerSpec",
    "RunConfig",
    "load_run_config",
    "load_batch_config",
    "load_table",
    "build_design",
    "file_sha256",
]

PRIOR_KINDS = ("hpp", "ci", "pp", "gpp", "flat")
FAMILIES = ("bernoulli", "poisson", "gamma", "normal")
TRANSFORMS = ("none", "log")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def load_table(path) -> dict[str, np.ndarray]:
    """Read a numeric CSV with a header row into column arrays."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise DataError(f"{path}: empty file, expected a CSV header row")
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    out = {}
    for name in reader.fieldnames:
        vals = []
        for i, row in enumerate(rows):
            cell = row[name]
            if cell is None or cell == "":
                raise DataError(f"{path}: missing value for {name!r} in row {i + 2}")
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} for {name!r} in row {i + 2}"
                ) from None
        out[name] = np.asarray(vals)
    return out


@dataclass(frozen=True)
class CovariateSpec:
    column: str
    transform: str = "none"

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.transform == "none":
            return values
        if np.any(values <= 0):
            raise DataError(f"log transform of {self.column!r} needs positive values")
        return np.log(values)

    @property
    def label(self) -> str:
        return self.column if self.transform == "none" else f"log({self.column})"


@dataclass(frozen=True)
class DataSpec:
    path: str
    response: str
    covariates: tuple
    intercept: bool = True
    groups: str | None = None


@dataclass(frozen=True)
class PriorSpec:
    kind: str
    lam: float = 1.0
    lambda0: object = None  # float | list | "from_summary" | {"file": path}
    mu0: object = None  # {"values"|"piecewise"|"coefficients"|"file"|"from_summary": ...}
    normconst: str = "laplace"
    summary: object = None  # {"path": csv} | {"beta0": [...], "se0": [...]}


@dataclass(frozen=True)
class SamplerSpec:
    chains: int = 4
    warmup: int = 1000
    keep: int = 6000
    seed: int = 0
    algorithm: str = "adaptive_rw"
    thinning: int = 1
    target_accept: float = 0.8


@dataclass(frozen=True)
class RunConfig:
    family: str
    data: DataSpec
    prior: PriorSpec
    sampler: SamplerSpec
    out_dir: str = "out"
    level: float = 0.95
    m_summaries: bool = False
    raw: dict = field(default_factory=dict)


def _require(section, key, where):
    if key not in section:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return section[key]


def _as_mapping(node, where):
    if not isinstance(node, dict):
        raise ConfigError(f"{where} must be a mapping")
    return node


def _parse_data(node, base) -> DataSpec:
    node = _as_mapping(node, "data")
    path = os.path.normpath(os.path.join(base, str(_require(node, "path", "data"))))
    response = str(_require(node, "response", "data"))
    covs = []
    for item in node.get("covariates", []):
        if isinstance(item, str):
            covs.append(CovariateSpec(item))
            continue
        item = _as_mapping(item, "data.covariates entry")
        tr = str(item.get("transform", "none"))
        if tr not in TRANSFORMS:
            raise ConfigError(f"unknown covariate transform {tr!r}")
        covs.append(CovariateSpec(str(_require(item, "column", "covariate")), tr))
    if not covs:
        raise ConfigError("data.covariates must list at least one covariate")
    return DataSpec(
        path=path,
        response=response,
        covariates=tuple(covs),
        intercept=bool(node.get("intercept", True)),
        groups=node.get("groups"),
    )


def _parse_prior(node, base) -> PriorSpec:
    node = _as_mapping(node, "prior")
    kind = str(_require(node, "kind", "prior"))
    if kind not in PRIOR_KINDS:
        raise ConfigError(f"prior.kind must be one of {PRIOR_KINDS}, got {kind!r}")
    lam = float(node.get("lam", 1.0))
    if lam <= 0:
        raise ConfigError("prior.lam must be positive")
    summary = node.get("summary")
    if summary is not None:
        summary = _as_mapping(summary, "prior.summary")
        if "path" in summary:
            summary = dict(summary)
            summary["path"] = os.path.normpath(os.path.join(base, str(summary["path"])))
        elif not ("beta0" in summary and "se0" in summary):
            raise ConfigError("prior.summary needs 'path' or explicit 'beta0'/'se0'")
    mu0 = node.get("mu0")
    if isinstance(mu0, dict) and "file" in mu0:
        mu0 = {"file": os.path.normpath(os.path.join(base, str(mu0["file"])))}
    lambda0 = node.get("lambda0")
    if isinstance(lambda0, dict) and "file" in lambda0:
        lambda0 = {"file": os.path.normpath(os.path.join(base, str(lambda0["file"])))}
    normconst = str(node.get("normconst", "laplace"))
    if normconst not in ("laplace", "exact_categorical"):
        raise ConfigError("prior.normconst must be 'laplace' or 'exact_categorical'")

    if kind == "pp" and not (summary and "path" in summary):
        raise ConfigError("the power prior requires prior.summary.path "
                          "(the full historical data set)")
    if kind == "gpp" and summary is None:
        raise ConfigError("the Gaussian power prior requires prior.summary")
    if kind in ("hpp", "ci"):
        if mu0 is None and lambda0 != "from_summary":
            raise ConfigError(f"prior.kind={kind} requires a mu0 specification")
        if kind == "hpp" and lambda0 is None:
            raise ConfigError("prior.kind=hpp requires lambda0")
        if (mu0 == "from_summary" or lambda0 == "from_summary") and summary is None:
            raise ConfigError("from_summary elicitation requires prior.summary")
    return PriorSpec(
        kind=kind, lam=lam, lambda0=lambda0, mu0=mu0, normconst=normconst,
        summary=summary,
    )


def _parse_sampler(node) -> SamplerSpec:
    node = _as_mapping(node or {}, "sampler")
    spec = SamplerSpec(
        chains=int(node.get("chains", 4)),
        warmup=int(node.get("warmup", 1000)),
        keep=int(node.get("keep", 6000)),
        seed=int(node.get("seed", 0)),
        algorithm=str(node.get("algorithm", "adaptive_rw")),
        thinning=int(node.get("thinning", 1)),
        target_accept=float(node.get("target_accept", 0.8)),
    )
    if spec.algorithm not in ("adaptive_rw", "hmc_fd"):
        raise ConfigError("sampler.algorithm must be adaptive_rw or hmc_fd")
    if min(spec.chains, spec.keep, spec.thinning) < 1 or spec.warmup < 0:
        raise ConfigError("sampler counts must be positive")
    return spec


def _load_yaml(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def parse_run_config(doc: dict, base: str) -> RunConfig:
    family = str(_require(doc, "family", "config"))
    if family not in FAMILIES:
        raise ConfigError(f"family must be one of {FAMILIES}, got {family!r}")
    out = _as_mapping(doc.get("output", {}), "output")
    out_dir = os.path.normpath(os.path.join(base, str(out.get("dir", "out"))))
    level = float(out.get("level", 0.95))
    if not 0.0 < level < 1.0:
        raise ConfigError("output.level must lie in (0, 1)")
    return RunConfig(
        family=family,
        data=_parse_data(_require(doc, "data", "config"), base),
        prior=_parse_prior(_require(doc, "prior", "config"), base),
        sampler=_parse_sampler(doc.get("sampler")),
        out_dir=out_dir,
        level=level,
        m_summaries=bool(out.get("m_summaries", False)),
        raw=doc,
    )


def load_run_config(path) -> RunConfig:
    return parse_run_config(_load_yaml(path), os.path.dirname(os.path.abspath(path)))


@dataclass(frozen=True)
class BatchConfig:
    family: str
    data: DataSpec
    historical_path: str
    lambdas: tuple
    priors: tuple
    sampler: SamplerSpec
    out_dir: str
    level: float
    jobs: int
    raw: dict


def load_batch_config(path) -> BatchConfig:
    doc = _load_yaml(path)
    base = os.path.dirname(os.path.abspath(path))
    family = str(_require(doc, "family", "config"))
    if family not in FAMILIES:
        raise ConfigError(f"family must be one of {FAMILIES}, got {family!r}")
    hist = _as_mapping(_require(doc, "historical", "config"), "historical")
    hist_path = os.path.normpath(os.path.join(base, str(_require(hist, "path", "historical"))))
    lambdas = tuple(float(v) for v in doc.get("lambdas", [0.5, 0.75, 1.0]))
    if not lambdas or any(v <= 0 for v in lambdas):
        raise ConfigError("lambdas must be a nonempty list of positive values")
    priors = tuple(str(p) for p in doc.get("priors", ["hpp", "ci", "pp", "gpp"]))
    for p in priors:
        if p not in PRIOR_KINDS:
            raise ConfigError(f"unknown prior {p!r} in priors")
    out = _as_mapping(doc.get("output", {}), "output")
    return BatchConfig(
        family=family,
        data=_parse_data(_require(doc, "data", "config"), base),
        historical_path=hist_path,
        lambdas=lambdas,
        priors=priors,
        sampler=_parse_sampler(doc.get("sampler")),
        out_dir=os.path.normpath(os.path.join(base, str(out.get("dir", "compare_out")))),
        level=float(out.get("level", 0.95)),
        jobs=int(doc.get("jobs", 1)),
        raw=doc,
    )


def build_design(spec: DataSpec, family: str):
    """Load the CSV and assemble (GlmData, design column labels, raw columns)."""
    table = load_table(spec.path)
    missing = [spec.response] + [c.column for c in spec.covariates]
    missing = [name for name in missing if name not in table]
    if spec.groups is not None and spec.groups not in table:
        missing.append(spec.groups)
    if missing:
        raise DataError(
            f"{spec.path}: missing column(s) {missing}; available: {sorted(table)}"
        )
    y = table[spec.response]
    cols = []
    labels = []
    if spec.intercept:
        cols.append(np.ones(y.size))
        labels.append("intercept")
    for cov in spec.covariates:
        cols.append(cov.apply(table[cov.column]))
        labels.append(cov.label)
    X = np.column_stack(cols)
    groups = None
    if spec.groups is not None:
        groups = table[spec.groups].astype(int)
    data = GlmData(y=y, X=X, groups=groups)
    return data, labels, table
