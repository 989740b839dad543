import numpy as np
import pytest

from tractlab import KernelModel


def coord_values_bruteforce(model, j, H):
    """Coordinate ``j`` (0-based) stream over |h| <= H, evaluated straight from the weight formula."""
    vals = [1.0]
    for h in range(1, H + 1):
        if model.family.value == "weighted_korobov":
            v = model.g[j] * float(h) ** (-2.0 * model.r[j])
        else:
            v = model.omega ** (model.a[j] * float(h) ** model.b[j])
        vals += [v, v]
    return np.array(vals)


def brute_force_top(model, count, H=200):
    """``count`` largest products over the box |h_j| <= H, multiplied left to right.

    Every factor of an entry among the ``count`` largest products is itself
    among the ``count`` largest values of its coordinate (the other factors are
    at most 1), so pruning each coordinate and every partial product to the
    top ``count`` leaves the result unchanged while avoiding a 401^d grid.
    """
    acc = np.array([1.0])
    for j in range(model.d):
        c = np.sort(coord_values_bruteforce(model, j, H))[::-1][:count]
        acc = np.sort(np.multiply.outer(acc, c).ravel())[::-1][:count]
    return acc


def box_complete(model, values, H=200):
    """How many leading ``values`` are guaranteed to lie inside the box |h_j| <= H.

    Any multi-index outside the box has some |h_j| > H, so its eigenvalue is at
    most the largest first out-of-box coordinate value.
    """
    outside = max(coord_values_bruteforce(model, j, H + 1)[-1] for j in range(model.d))
    return int(np.count_nonzero(np.asarray(values) > outside))


MODELS_SMALL = {
    "ek1": KernelModel.exp_korobov(1, 1.0, 1.0, 0.5),
    "ek2": KernelModel.exp_korobov(2, [1.0, 1.5], [1.0, 2.0], 0.5),
    "ek3": KernelModel.exp_korobov(3, 1.0, [1.0, 0.5, 2.0], 0.7),
    "wk1": KernelModel.weighted_korobov(1, 1.0, 1.0),
    "wk2": KernelModel.weighted_korobov(2, [1.0, 1.0], [1.0, 0.5]),
    "wk3": KernelModel.weighted_korobov(3, 2.0, "power:beta=3"),
}


@pytest.fixture(params=sorted(MODELS_SMALL))
def small_model(request):
    return MODELS_SMALL[request.param]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
