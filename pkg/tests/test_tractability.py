import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tractlab import KernelModel, ParameterDomainError, SequenceFamily
from tractlab.complexity import info_complexity
from tractlab.tractability import (DEFAULT_ST_GRID, Holds, Notion, check_implications, classify,
                                   classify_exp_korobov, classify_weighted_korobov, estimate_liminf,
                                   verdict_table)

CASES = json.loads((Path(__file__).parent / "fixtures" / "tractability_cases.json").read_text())["cases"]


def _run(case, mode, crit, notion, **kw):
    if case["family"] == "weighted_korobov":
        return classify_weighted_korobov(case["g"], None, notion, crit, mode, **kw)
    return classify_exp_korobov(case["a"], case["b"], case["omega"], mode, notion, crit)


def _expand(cases):
    for case in cases:
        for mode, crit, notion, want in case["checks"]:
            for c in (("abs", "nor") if crit == "both" else (crit,)):
                yield pytest.param(case, mode, c, notion, want, id=f"{case['id']}-{mode}-{c}-{notion}")


def test_fixture_grid_is_large_enough():
    assert len(CASES) >= 12
    assert sum(len(c["checks"]) for c in CASES) >= 80


@pytest.mark.parametrize("case, mode, crit, notion, want", list(_expand(CASES)))
def test_fixture_verdicts(case, mode, crit, notion, want):
    v = _run(case, mode, crit, notion)
    assert v.holds.value == want, v.summary()


def test_uwt_rule_flag():
    g = SequenceFamily.power_law(1.0, 1.0)
    assert classify_weighted_korobov(g, notion="uwt").holds is Holds.BOUNDARY
    assert classify_weighted_korobov(g, notion="uwt", uwt_rule="ge").holds is Holds.YES
    assert classify_weighted_korobov(g, notion="uwt", uwt_rule="gt").holds is Holds.NO
    with pytest.raises(ValueError):
        classify_weighted_korobov(g, notion="uwt", uwt_rule="maybe")


def test_near_threshold_is_boundary():
    # beta one ulp above 1 cannot be told apart from the threshold
    g = SequenceFamily.power_law(1.0, 1.0 + 2e-16)
    assert classify_weighted_korobov(g, notion="pt").holds is Holds.BOUNDARY
    a = SequenceFamily.power_law(1.0, -2.0)
    v = classify_exp_korobov(a, 1.0, 0.5, "exp", Notion.st(1 / 3, 0.5))
    assert v.holds is Holds.BOUNDARY


def test_exp_notion_on_weighted_korobov_has_note():
    v = classify_weighted_korobov("power:beta=2", notion="spt", mode="exp")
    assert v.holds is Holds.NO
    assert v.certificate["note"] == "polynomial eigenvalue decay"


def test_certificates_carry_limits():
    v = classify_weighted_korobov("power:beta=2", notion="pt")
    assert v.certificate["liminf"] == 2.0 and v.certificate["threshold"] == 1.0
    v = classify_weighted_korobov("power:beta=0.5", notion=Notion.st(1, 0.5))
    assert v.certificate["exponent"] == 0.0 and v.holds is Holds.NO


def test_st_wt_limit_numeric_crosscheck():
    """j^(1-t) g_j ln+(1/g_j) for g_j = j^(-1/2), t = 1/2 grows without bound."""
    j = np.array([1e3, 1e4, 1e5, 1e6])
    g = j**-0.5
    vals = j**0.5 * g * np.maximum(1.0, np.log(1 / g))
    assert np.all(np.diff(vals) > 0) and vals[-1] > 6


def test_ek_alg_spt_numeric_spotcheck():
    lnw = math.log(2.0)
    a = SequenceFamily.log_power(2.0 / lnw, 1.0, 0.0)
    j = np.array([1e3, 1e5, 1e7])
    ratio = np.array([a.value(int(x)) for x in j]) / np.log(j)
    assert np.all(ratio > 1.0 / lnw)
    assert classify_exp_korobov(a, 1.0, 0.5, "alg", "spt").holds is Holds.YES


def test_notion_parsing():
    assert Notion.parse("SPT").kind == "spt"
    n = Notion.parse("(1,0.5)-wt")
    assert (n.kind, n.s, n.t) == ("st_wt", 1.0, 0.5)
    assert Notion.parse("st_wt(2,0.25)").label == "(2,0.25)-WT"
    assert Notion.parse("st_wt:s=1,t=2") == Notion.st(1, 2)
    with pytest.raises(ParameterDomainError):
        Notion.parse("ppt")


def test_invalid_inputs():
    with pytest.raises(ParameterDomainError):
        classify_exp_korobov(1.0, 1.0, 1.5, "alg", "pt")
    with pytest.raises(ParameterDomainError):
        classify_weighted_korobov("power:c=2,beta=1", notion="pt")  # g_1 > 1
    with pytest.raises(ParameterDomainError):
        classify_weighted_korobov({"kind": "exp", "c": 0.1, "rho": 2.0}, notion="pt")
    with pytest.raises(ParameterDomainError):
        classify_exp_korobov("power:beta=1", 1.0, 0.5, "alg", "pt")  # a decreasing


# --- numeric liminf estimator -------------------------------------------------


def test_estimate_power_law():
    j = np.arange(1, 10_001)
    est = estimate_liminf(j**-2.0, "log_inv_over_log")
    assert est.estimate == pytest.approx(2.0, abs=0.01)
    assert est.trend == "flat"


def test_estimate_constant():
    est = estimate_liminf(np.ones(5000), "log_inv_over_log")
    assert est.estimate == pytest.approx(0.0, abs=1e-12)
    assert est.trend == "flat"


def test_estimate_alternating():
    vals = np.tile([1.0, 3.0], 500)
    est = estimate_liminf(vals, "identity")
    assert est.estimate == 1.0
    assert est.trend == "flat"


def test_estimate_window_too_short():
    with pytest.raises(ValueError):
        estimate_liminf(np.ones(100), window=(10, 15))


def test_tabulated_routes_to_estimator():
    j = np.arange(1, 20_001)
    v = classify_weighted_korobov(SequenceFamily.tabulated(j**-2.0), notion="pt")
    assert v.holds is Holds.YES and "liminf_estimate" in v.certificate
    v = classify_weighted_korobov(SequenceFamily.tabulated(j**-1.0), notion="pt")
    assert v.holds is Holds.UNKNOWN
    v = classify_exp_korobov(1.0, SequenceFamily.tabulated([1.0, 2.0, 3.0]), 0.5, "exp", "pt")
    assert v.holds is Holds.NO  # a_j = 1 already rules it out
    v = classify_exp_korobov("exp:rho=2", SequenceFamily.tabulated([1.0, 2.0, 3.0]), 0.5, "exp", "pt")
    assert v.holds is Holds.UNKNOWN


# --- batch table --------------------------------------------------------------


def test_verdict_table_full_sweep():
    m = KernelModel.weighted_korobov(3, 1.0, "power:beta=2")
    rows = verdict_table(m, modes=("alg",), criteria=("abs",))
    assert [v.holds for v in rows[:5]] == [Holds.YES] * 5
    assert len(rows) == 5 + len(DEFAULT_ST_GRID)


def test_boundary_flagged_in_sweep():
    m = KernelModel.weighted_korobov(2, 1.0, "power:beta=1")
    rows = {v.notion.kind: v for v in verdict_table(m, modes=("alg",), criteria=("abs",))}
    assert rows["uwt"].holds is Holds.BOUNDARY
    assert rows["qpt"].holds is Holds.UNKNOWN


def test_check_implications_detects_violation():
    good = verdict_table(KernelModel.exp_korobov(2, 1.0, 1.0, 0.5), modes=("alg",), criteria=("abs",))
    assert check_implications(good) == []
    bad = [v for v in good]
    bad[0] = type(bad[0])(bad[0].notion, bad[0].mode, bad[0].criterion, Holds.YES, "forced")
    wt = next(i for i, v in enumerate(bad) if v.notion.kind == "wt")
    bad[wt] = type(bad[wt])(bad[wt].notion, bad[wt].mode, bad[wt].criterion, Holds.NO, "forced")
    assert check_implications(bad)


# --- randomized families ------------------------------------------------------

_BETAS = st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 3.0]) | st.floats(0.0, 4.0)


@st.composite
def g_sequences(draw):
    kind = draw(st.sampled_from(["constant", "power", "logpower", "exp"]))
    if kind == "constant":
        return SequenceFamily.constant(draw(st.floats(0.05, 1.0)))
    if kind == "power":
        return SequenceFamily.power_law(draw(st.floats(0.05, 1.0)), draw(_BETAS))
    if kind == "logpower":
        gamma = draw(st.floats(-3.0, 0.0))
        beta = draw(_BETAS)
        if beta == 0.0 and gamma == 0.0:
            gamma = -1.0
        c = draw(st.floats(0.05, 1.0)) * math.log(2.0) ** (-gamma) * 0.999
        return SequenceFamily.log_power(c, gamma, beta)
    rho = draw(st.floats(0.1, 0.95))
    return SequenceFamily.exp_growth(draw(st.floats(0.05, 1.0)), rho)


@st.composite
def a_sequences(draw):
    kind = draw(st.sampled_from(["constant", "power", "logpower", "exp"]))
    c = draw(st.floats(0.1, 5.0))
    if kind == "constant":
        return SequenceFamily.constant(c)
    if kind == "power":
        return SequenceFamily.power_law(c, -draw(_BETAS))
    if kind == "logpower":
        return SequenceFamily.log_power(c, draw(st.floats(0.0, 2.0)), -draw(st.sampled_from([0.0, 0.5, 1.0])))
    return SequenceFamily.exp_growth(c, draw(st.floats(1.0, 3.0)))


@st.composite
def families(draw):
    if draw(st.booleans()):
        return ("wk", draw(g_sequences()))
    b = draw(st.sampled_from([SequenceFamily.constant(1.0), SequenceFamily.power_law(1.0, -2.0),
                              SequenceFamily.power_law(1.0, -1.0), SequenceFamily.exp_growth(1.0, 1.5)]))
    return ("ek", draw(a_sequences()), b, draw(st.floats(0.05, 0.95)))


def _classify(fam, notion, mode, crit):
    if fam[0] == "wk":
        return classify_weighted_korobov(fam[1], None, notion, crit, mode)
    return classify_exp_korobov(fam[1], fam[2], fam[3], mode, notion, crit)


_ST = [(s, t) for s in (0.25, 0.5, 1.0, 2.0) for t in (0.25, 0.5, 1.0, 1.5)]


@settings(max_examples=200, deadline=None)
@given(families())
def test_random_families_lattice_and_universality(fam):
    for mode in ("alg", "exp"):
        for crit in ("abs", "nor"):
            vs = [_classify(fam, Notion(k), mode, crit) for k in ("spt", "pt", "qpt", "uwt", "wt")]
            assert check_implications(vs) == []
            for s in (0.5, 1.0, 3.0):
                for t in (1.01, 2.0, 5.0):
                    v = _classify(fam, Notion.st(s, t), mode, crit)
                    if mode == "alg" or fam[0] == "ek":
                        assert v.holds is Holds.YES
            got = {st_: _classify(fam, Notion.st(*st_), mode, crit).holds for st_ in _ST}
            for (s, t), h in got.items():
                if h is not Holds.YES:
                    continue
                for (s2, t2), h2 in got.items():
                    if s2 >= s and t2 >= t:
                        assert h2 is Holds.YES, f"{mode}/{crit}: ({s},{t}) yes but ({s2},{t2}) {h2.value}"


# --- numeric cross-check of an SPT verdict -----------------------------------


@pytest.mark.slow
def test_spt_verdict_matches_measured_growth():
    """Fit n(eps, d) ~ C eps^-p on eps in [1e-4, 1e-2] for d = 1..6.

    Local exponents include the ln^(d-1) factors of product spectra, so they
    rise with d before settling; SPT shows up as p and C saturating in d.
    """
    base = KernelModel.weighted_korobov(6, 2.0, "power:beta=6")
    assert classify(base, "spt").holds is Holds.YES
    eps = np.geomspace(1e-2, 1e-4, 9)
    ps, Cs = [], []
    for d in range(1, 7):
        n = np.array([info_complexity(base.with_dimension(d), e) for e in eps], dtype=float)
        p, logC = np.polyfit(np.log(1 / eps), np.log(n), 1)
        ps.append(p)
        Cs.append(math.exp(logC))
    steps = np.diff(ps)
    assert np.all(steps > 0) and np.all(np.diff(steps) < 0)
    assert steps[-1] < 0.05
    assert max(Cs[2:]) / min(Cs[2:]) < 2.0
