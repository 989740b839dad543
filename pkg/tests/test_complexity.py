import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tractlab import ComplexityCapExceeded, KernelModel, ParameterDomainError
from tractlab.complexity import (approx_number, complexity_table, criterion_scale, info_complexity,
                                 initial_error, lq_error_bound, std_complexity_bound)
from tractlab.spectrum import Spectrum, trace

EK1 = KernelModel.exp_korobov(1, 1.0, 1.0, 0.5)
WK1 = KernelModel.weighted_korobov(1, 1.0, 1.0)

MODELS = [
    EK1,
    KernelModel.exp_korobov(3, [1.0, 1.2, 1.5], 1.0, 0.5),
    KernelModel.exp_korobov(2, 0.5, 2.0, 0.8),
    WK1,
    KernelModel.weighted_korobov(2, 2.0, "power:beta=3"),
    KernelModel.weighted_korobov(3, 1.5, "power:beta=2"),
]
# smallest epsilon per model that stays well inside the default cap of 10^7
EPS_MIN = [1e-4, 1e-4, 1e-4, 1e-3, 1e-4, 1e-3]
CASES = list(zip(MODELS, EPS_MIN))


def test_approx_number_examples():
    assert approx_number(EK1, 3) == pytest.approx(1.0, abs=1e-15)
    assert approx_number(EK1, 0) == initial_error(EK1) == pytest.approx(math.sqrt(3))
    assert approx_number(WK1, 3) == pytest.approx(math.sqrt(math.pi**2 / 3 - 2), rel=1e-13)
    assert approx_number(WK1, 3) == pytest.approx(1.13573, abs=1e-5)


def test_lq_bound():
    assert lq_error_bound(EK1, 0, 4.0) == pytest.approx((5 / 3) ** 0.25, rel=1e-14)
    for n in (0, 5, 50):
        assert lq_error_bound(WK1, n, 1e6) == pytest.approx(approx_number(WK1, n), abs=1e-4)
    assert lq_error_bound(EK1, 60, 4.0) < 1e-3
    with pytest.raises(ParameterDomainError):
        lq_error_bound(EK1, 0, 2.0)


def test_info_complexity_examples():
    assert info_complexity(EK1, 1.0, "abs") == 3
    assert info_complexity(EK1, 1.0, "nor") == 0
    assert info_complexity(EK1, math.sqrt(3), "abs") == 0
    assert info_complexity(EK1, 2.0, "abs") == 0
    with pytest.raises(ParameterDomainError):
        info_complexity(EK1, 0.0)


@pytest.mark.parametrize("model, eps_min", CASES, ids=[m.model_id for m in MODELS])
def test_bracketing_on_log_grid(model, eps_min):
    spec = Spectrum(model, keep_indices=False)
    for eps in np.geomspace(1.0, eps_min, 50):
        n = info_complexity(spec, eps, "abs")
        assert approx_number(spec, n) <= eps
        if n >= 1:
            assert approx_number(spec, n - 1) > eps


@pytest.mark.parametrize("model, eps_min", CASES, ids=[m.model_id for m in MODELS])
def test_nor_abs_identity(model, eps_min):
    spec = Spectrum(model, keep_indices=False)
    root = math.sqrt(spec.trace)
    for eps in np.geomspace(1.0, eps_min * 10 / root, 20):
        assert info_complexity(spec, eps, "nor") == info_complexity(spec, eps * root, "abs")
    assert criterion_scale(spec, "nor") == root and criterion_scale(spec, "abs") == 1.0


def test_std_bound_examples():
    for eps in (1.0, 0.3, 0.05):
        assert std_complexity_bound(EK1, eps, c1=1, c2=1) == 2 * info_complexity(EK1, eps)
    assert std_complexity_bound(EK1, 1.0, c1=2, c2=2) == 4 * info_complexity(EK1, 0.5)
    assert info_complexity(EK1, 0.5) == 7  # tails 3, 2, 1.5, 1, .75, .5, .375, .25
    with pytest.raises(ParameterDomainError):
        std_complexity_bound(EK1, 1.0, c1=0.5)


@pytest.mark.parametrize("model, eps_min", CASES, ids=[m.model_id for m in MODELS])
def test_std_bound_dominates(model, eps_min):
    spec = Spectrum(model, keep_indices=False)
    prev = None
    for eps in np.geomspace(0.5, eps_min * 30, 15):
        n_all = info_complexity(spec, eps)
        b = std_complexity_bound(spec, eps)
        assert n_all <= b
        assert b == 2 * 43200 * info_complexity(spec, eps / 30.0)
        if prev is not None:
            assert b >= prev
        prev = b


def test_cap_signal():
    slow = KernelModel.weighted_korobov(1, 0.55, 1.0)
    with pytest.raises(ComplexityCapExceeded) as exc:
        info_complexity(slow, 1e-3, cap=5000)
    assert exc.value.cap == 5000
    assert exc.value.tail_at_cap > exc.value.target


def test_table_flags_cap_rows():
    # tail(n) ~ 4/n, so eps = 1e-1 needs about 400 terms and eps / 30 about 360000
    rows = complexity_table(WK1, [1.0, 1e-1, 1e-7], cap=10_000)
    assert [r.status for r in rows] == ["ok", "std_cap_exceeded", "cap_exceeded"]
    assert rows[0].n_all == info_complexity(WK1, 1.0)
    assert rows[2].n_all is None and rows[2].detail["cap"] == 10_000


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 2.0), st.floats(1e-3, 2.0))
def test_monotone_in_epsilon(e1, e2):
    lo, hi = sorted((e1, e2))
    model = MODELS[4]
    assert info_complexity(model, lo) >= info_complexity(model, hi)
    assert std_complexity_bound(model, lo) >= std_complexity_bound(model, hi)


def test_nor_equals_abs_trace_scale():
    m = MODELS[1]
    assert initial_error(m) == pytest.approx(math.sqrt(trace(m)), rel=1e-15)
