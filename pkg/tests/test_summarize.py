import numpy as np
import pytest

from hppglm import Draws, InsufficientDrawsError, hpd_interval, summarize
from hppglm.summarize import format_table


def make_draws(samples, names=None):
    samples = np.asarray(samples, dtype=float)
    c, k, d = samples.shape
    return Draws(
        samples=samples,
        param_names=names or [f"beta{j}" for j in range(d)],
        log_posterior=np.zeros((c, k)),
        acceptance_rate=np.ones(c),
        seed=0,
        algorithm="adaptive_rw",
    )


def test_hpd_standard_normal():
    rng = np.random.default_rng(0)
    lo, hi = hpd_interval(rng.standard_normal(1_000_000), 0.95)
    assert lo == pytest.approx(-1.96, abs=0.01)
    assert hi == pytest.approx(1.96, abs=0.01)


def test_hpd_symmetric_about_median():
    rng = np.random.default_rng(1)
    x = rng.standard_t(df=5, size=400_000)
    lo, hi = hpd_interval(x, 0.9)
    med = np.median(x)
    assert (med - lo) == pytest.approx(hi - med, abs=0.02)


def test_hpd_exponential_hugs_mode():
    rng = np.random.default_rng(2)
    x = rng.exponential(1.0, 1_000_000)
    lo, hi = hpd_interval(x, 0.95)
    assert lo == pytest.approx(0.0, abs=0.005)
    assert hi == pytest.approx(2.9957, abs=0.02)


def test_hpd_no_wider_than_equal_tailed():
    rng = np.random.default_rng(3)
    for x in (
        rng.standard_normal(5000),
        rng.exponential(2.0, 5000),
        rng.beta(0.7, 3.0, 5000),
        np.concatenate([rng.normal(-2, 1, 2500), rng.normal(2, 1, 2500)]),
    ):
        for level in (0.5, 0.9, 0.95):
            lo, hi = hpd_interval(x, level)
            qlo, qhi = np.quantile(x, [(1 - level) / 2, (1 + level) / 2])
            assert hi - lo <= qhi - qlo + 1e-12


def test_hpd_insufficient_draws():
    with pytest.raises(InsufficientDrawsError):
        hpd_interval(np.arange(50.0), 0.95)


def test_summarize_rows():
    rng = np.random.default_rng(4)
    draws = make_draws(rng.normal(1.0, 2.0, size=(2, 4000, 2)))
    rows = summarize(draws, level=0.95)
    assert [r.name for r in rows] == ["beta0", "beta1"]
    for r in rows:
        assert r.mean == pytest.approx(1.0, abs=0.15)
        assert r.sd == pytest.approx(2.0, abs=0.12)
        assert r.prob_nonpositive == pytest.approx(0.3085, abs=0.03)
        assert r.mc_se > 0
        assert r.rhat == pytest.approx(1.0, abs=0.01)


def test_summarize_degenerate_flagged():
    draws = make_draws(np.full((1, 500, 1), 3.25))
    row = summarize(draws)[0]
    assert row.flag == "insufficient-variation"
    assert row.hpd_lower == row.hpd_upper == 3.25
    assert row.sd == 0.0


def test_summarize_invariant_to_chain_order():
    rng = np.random.default_rng(5)
    sample = rng.normal(size=(3, 2000, 1))
    a = summarize(make_draws(sample))[0]
    b = summarize(make_draws(sample[::-1]))[0]
    assert a.mean == b.mean
    assert a.sd == b.sd
    assert (a.hpd_lower, a.hpd_upper) == (b.hpd_lower, b.hpd_upper)
    assert a.prob_nonpositive == b.prob_nonpositive


def test_summarize_m_selection():
    rng = np.random.default_rng(6)
    draws = make_draws(
        rng.normal(size=(1, 1500, 3)), names=["beta0", "m1", "m2"]
    )
    assert [r.name for r in summarize(draws, params="beta")] == ["beta0"]
    assert [r.name for r in summarize(draws, params="m")] == ["m1", "m2"]
    assert len(summarize(draws, params="all")) == 3


def test_format_table_runs():
    rng = np.random.default_rng(7)
    rows = summarize(make_draws(rng.normal(size=(2, 1000, 2))))
    text = format_table(rows)
    assert "beta0" in text and "hpd_lo" in text
