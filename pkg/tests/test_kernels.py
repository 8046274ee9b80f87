import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import components, directed_hausdorff
from salimits import kernels

BACKENDS = [pytest.param(kernels.pure, id="numpy")]
if kernels.compiled is not None:
    BACKENDS.append(pytest.param(kernels.compiled, id="cython"))

coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=64)


def clouds(k):
    return arrays(np.float64, st.tuples(st.integers(1, 40), st.just(k)), elements=coords)


@pytest.mark.parametrize("mod", BACKENDS)
@given(st.integers(1, 4).flatmap(lambda k: st.tuples(clouds(k), clouds(k))))
def test_brute_matches_loops(mod, pair):
    A, B = pair
    got = math.sqrt(mod.directed_sq_brute(A, B))
    assert got == pytest.approx(directed_hausdorff(A.tolist(), B.tolist()), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("mod", BACKENDS)
@given(st.integers(1, 4).flatmap(lambda k: st.tuples(clouds(k), clouds(k))), st.floats(0.05, 30))
def test_grid_equals_brute_bitwise(mod, pair, cell):
    A, B = pair
    assert mod.directed_sq_grid(A, B, cell) == mod.directed_sq_brute(A, B)


@given(st.integers(1, 3).flatmap(lambda k: st.tuples(clouds(k), clouds(k))), st.floats(0.05, 30))
def test_backends_agree(pair, cell):
    if kernels.compiled is None:
        pytest.skip("compiled kernels not built")
    A, B = pair
    assert kernels.compiled.directed_sq_grid(A, B, cell) == kernels.pure.directed_sq_grid(A, B, cell)
    assert kernels.compiled.directed_sq_brute(A, B) == kernels.pure.directed_sq_brute(A, B)


@pytest.mark.parametrize("mod", BACKENDS)
@given(st.integers(1, 3).flatmap(clouds), st.floats(0.1, 6))
def test_components_match_bfs(mod, P, radius):
    n, labels = mod.components_grid(P, radius)
    assert n == components(P.tolist(), radius)
    assert labels.shape == (P.shape[0],)
    # labels are numbered by first occurrence
    seen = []
    for lab in labels.tolist():
        if lab not in seen:
            seen.append(lab)
    assert seen == list(range(n))


@pytest.mark.parametrize("mod", BACKENDS)
def test_components_same_labels_across_points(mod):
    rng = np.random.default_rng(5)
    P = np.concatenate([rng.normal(0, 0.1, (200, 2)), rng.normal(5, 0.1, (200, 2))])
    n, labels = mod.components_grid(P, 0.5)
    assert n == 2
    assert set(labels[:200]) == {0} and set(labels[200:]) == {1}


def test_backends_give_identical_labels():
    if kernels.compiled is None:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(11)
    P = rng.uniform(-3, 3, (3000, 2))
    a = kernels.compiled.components_grid(P, 0.05)
    b = kernels.pure.components_grid(P, 0.05)
    assert a[0] == b[0] and np.array_equal(a[1], b[1])


def test_env_var_forces_numpy():
    code = "import salimits.kernels as k; print(k.BACKEND_NAME)"
    env = dict(os.environ, SALIMITS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
