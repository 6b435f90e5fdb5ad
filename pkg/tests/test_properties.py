import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ecclab import _peel_py
from ecclab.gf import GF
from ecclab.gfft import TransformPlan, dft_naive, fft_staged
from ecclab.polar_design import psi
from ecclab.scldpc import EnsembleParams, peel_decode, sample_graph

FIELDS = [7, 13, 16, 17, 256, 257, 1024]


@st.composite
def field_triples(draw):
    q = draw(st.sampled_from(FIELDS))
    el = st.integers(0, q - 1)
    return GF(q), draw(el), draw(el), draw(el)


@given(field_triples())
def test_field_axioms(t):
    f, a, b, c = t
    assert f.add(a, f.add(b, c)) == f.add(f.add(a, b), c)
    assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.add(a, 0) == a and f.mul(a, 1) == a
    assert f.sub(f.add(a, b), b) == a
    if b:
        assert f.mul(f.div(a, b), b) == a


PLANS = [(7, 6, (3, 2)), (16, 15, (3, 5)), (31, 30, (5, 2, 3)), (257, 16, None), (13, 12, (2, 3, 2))]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(PLANS), st.integers(0, 2**32 - 1))
def test_transform_round_trip(spec, seed):
    q, n, fac = spec
    plan = TransformPlan.create(GF(q), n, fac)
    x = np.random.default_rng(seed).integers(0, q, n)
    y = fft_staged(x, plan)
    assert np.array_equal(y, dft_naive(x, plan))
    assert np.array_equal(fft_staged(y, plan, inverse=True), x)


@given(st.integers(2, 17), st.floats(0.0, 1.0))
def test_psi_mean_and_polarization(ell, eps):
    vals = [psi(ell, j, eps) for j in range(ell)]
    assert abs(sum(vals) / ell - eps) < 1e-12
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.2, 0.6))
def test_peeling_backends_agree(seed, eps):
    rng = np.random.default_rng(seed)
    g = sample_graph(EnsembleParams(3, 6, 3, 18, 6, "random-multiedge"), rng)
    mask = rng.random(g.n_vn) < eps
    fast = peel_decode(g, mask)
    slow = np.flatnonzero(_peel_py.peel_residual(g.vn_cn, g.n_cn, mask.astype(np.uint8)))
    assert np.array_equal(fast, slow)
    # the residual is a stopping set inside the erasures
    assert set(fast.tolist()) <= set(np.flatnonzero(mask).tolist())
    if fast.size:
        cnt = np.bincount(g.vn_cn[fast].ravel(), minlength=g.n_cn)
        assert not np.any(cnt == 1)
