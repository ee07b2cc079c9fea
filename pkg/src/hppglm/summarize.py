"""Posterior summaries: means, SDs, HPD intervals, tail probabilities.

HPD intervals use the empirical shortest-window method on sorted draws.
Monte Carlo standard errors are ESS-adjusted so reported tolerances are
self-documenting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDrawsError
from .sampling import Draws, diagnostics

__all__ = ["SummaryRow", "hpd_interval", "summarize", "format_table"]


@dataclass(frozen=True)
class SummaryRow:
    name: str
    mean: float
    sd: float
    hpd_lower: float
    hpd_upper: float
    ess: float
    rhat: float | None
    prob_nonpositive: float
    mc_se: float
    flag: str | None = None


def hpd_interval(draws_1d, level: float):
    """Shortest interval of consecutive order statistics holding ``level`` mass."""
    x = np.sort(np.asarray(draws_1d, dtype=float))
    n = x.size
    if n < 100:
        raise InsufficientDrawsError(f"need at least 100 draws for an HPD, got {n}")
    if not 0.0 < level < 1.0:
        raise InsufficientDrawsError("level must lie in (0, 1)")
    k = int(np.ceil(level * n))
    if k >= n:
        k = n - 1
    widths = x[k:] - x[: n - k]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k])


def summarize(draws: Draws, level: float = 0.95, params: str = "beta") -> list[SummaryRow]:
    """One summary row per selected coordinate of a Draws object.

    ``params`` selects "beta" (default), "m", or "all" coordinates; m
    components are summarized on the mean scale as sampled.
    """
    diag = diagnostics(draws)
    names = draws.param_names
    if params == "beta":
        idx = [j for j, nm in enumerate(names) if nm.startswith("beta")]
    elif params == "m":
        idx = [j for j, nm in enumerate(names) if nm.startswith("m")]
    elif params == "all":
        idx = list(range(len(names)))
    else:
        raise ValueError("params must be 'beta', 'm', or 'all'")
    flat = draws.flat()
    rows = []
    for j in idx:
        x = flat[:, j]
        mean = float(x.mean())
        sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
        ess = float(diag["ess"][j])
        rhat = None if diag["rhat"] is None else float(diag["rhat"][j])
        flag = None
        if sd == 0.0:
            lo = hi = mean
            flag = "insufficient-variation"
        else:
            lo, hi = hpd_interval(x, level)
        rows.append(
            SummaryRow(
                name=names[j],
                mean=mean,
                sd=sd,
                hpd_lower=lo,
                hpd_upper=hi,
                ess=ess,
                rhat=rhat,
                prob_nonpositive=float(np.mean(x <= 0.0)),
                mc_se=sd / np.sqrt(max(ess, 1.0)),
                flag=flag,
            )
        )
    return rows


def format_table(rows: list[SummaryRow], level: float = 0.95) -> str:
    """Fixed-width text table for terminal output."""
    pct = f"{100 * level:g}%"
    header = (
        f"{'parameter':<12}{'mean':>10}{'sd':>10}{'hpd_lo':>10}{'hpd_hi':>10}"
        f"{'P(<=0)':>9}{'mc_se':>9}{'ess':>8}{'rhat':>7}"
    )
    lines = [f"posterior summary ({pct} HPD)", header, "-" * len(header)]
    for r in rows:
        rhat = f"{r.rhat:7.3f}" if r.rhat is not None else "      -"
        lines.append(
            f"{r.name:<12}{r.mean:>10.4f}{r.sd:>10.4f}{r.hpd_lower:>10.4f}"
            f"{r.hpd_upper:>10.4f}{r.prob_nonpositive:>9.4f}{r.mc_se:>9.5f}"
            f"{r.ess:>8.0f}{rhat}"
            + (f"  [{r.flag}]" if r.flag else "")
        )
    return "\n".join(lines)
