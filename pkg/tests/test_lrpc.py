import itertools

import numpy as np
import pytest

from grlrpc import linalg
from grlrpc.errors import DecompositionFailure, ParameterError
from grlrpc.lrpc import (
    _contains_subring,
    build_h_ext,
    check_properties,
    code_from_json,
    decompose,
    encode,
    extract_message,
    gen_code,
    load_code,
    save_code,
    subring_generator,
    syndrome,
)
from grlrpc.rings import make_ring, make_rng, make_tower
from grlrpc.submodules import canonicalize


@pytest.fixture(scope="module")
def fig1_code():
    S = make_tower(make_ring(2, 2, 1), 21)
    return gen_code(S, 20, 8, 2, make_rng(0))


@pytest.fixture(scope="module")
def small_code():
    S = make_tower(make_ring(2, 2, 2), 5)
    return gen_code(S, 8, 4, 3, make_rng(1))


def test_fig1_code_properties(fig1_code):
    props = check_properties(fig1_code)
    assert all(props.values()), props
    assert fig1_code.params == {"p": 2, "r": 2, "s": 1, "m": 21, "n": 20, "k": 8, "lambda": 2}
    # re-checking is idempotent
    assert check_properties(fig1_code) == props


def test_small_code_properties(small_code):
    assert all(check_properties(small_code).values())


@pytest.mark.slow
def test_headline_size_code():
    S = make_tower(make_ring(2, 2, 4), 101)
    code = gen_code(S, 101, 40, 2, make_rng(0))
    assert all(check_properties(code).values())


def test_parameter_errors():
    S = make_tower(make_ring(2, 2, 1), 21)
    rng = make_rng(0)
    with pytest.raises(ParameterError):
        gen_code(S, 20, 12, 2, rng)  # 2 * 8 < 20
    with pytest.raises(ParameterError):
        gen_code(S, 20, 20, 2, rng)
    with pytest.raises(ParameterError):
        gen_code(S, 20, 8, 22, rng)
    with pytest.raises(ParameterError):
        gen_code(make_ring(2, 2, 1), 4, 2, 2, rng)


def test_reproducible():
    S = make_tower(make_ring(2, 2, 2), 5)
    a = gen_code(S, 8, 4, 3, make_rng(42))
    b = gen_code(S, 8, 4, 3, make_rng(42))
    assert np.array_equal(a.H, b.H) and np.array_equal(a.f, b.f) and np.array_equal(a.G, b.G)


def test_h_ext_layout(small_code):
    c = small_code
    S, R = c.tower, c.tower.base
    Hx = build_h_ext(c)
    assert np.array_equal(Hx, c.H_ext)
    for i in range(c.n - c.k):
        for j in range(c.n):
            total = sum(S.scale(c.f[l], Hx[i * c.lam + l, j]) for l in range(c.lam)) % S.q
            assert np.array_equal(total, c.H[i, j])
    v = R.valuation(Hx)
    assert np.all((v == 0) | ~Hx.any(axis=-1))
    assert linalg.rank_frk(linalg.RingMatrix(R, Hx)) == (c.n, c.n)


def test_h_ext_for_lambda_one():
    # with F = <1> every entry lies in R and H_ext is H read over R
    S = make_tower(make_ring(2, 2, 1), 5)
    rng = make_rng(3)
    H = np.zeros((2, 4, S.degree), dtype=np.int64)
    H[..., 0] = rng.integers(0, S.q, size=(2, 4))
    coeffs = decompose(S, S.one[None], H)
    assert coeffs.shape == (2, 4, 1, 1)
    assert np.array_equal(coeffs[..., 0, 0], H[..., 0])


def test_decomposition_failure(small_code):
    c = small_code
    S = c.tower
    bad = c.H.copy()
    # some element outside F = span(f) of rank 3 in a degree-5 extension
    for x in S.random(make_rng(9), (50,)):
        if not canonicalize(S, c.f).contains(x):
            bad[0, 0] = x
            break
    with pytest.raises(DecompositionFailure):
        decompose(S, c.f, bad)


def test_encode_and_syndrome(small_code):
    c = small_code
    S = c.tower
    rng = make_rng(5)
    assert not encode(c, np.zeros((c.k, S.degree), dtype=np.int64)).any()
    for _ in range(20):
        msg = S.random(rng, (c.k,))
        cw = encode(c, msg)
        assert not syndrome(c, cw).any()
        assert np.array_equal(extract_message(c, cw), msg)
        e = S.random(rng, (c.n,))
        assert np.array_equal(syndrome(c, (cw + e) % S.q), syndrome(c, e))
    with pytest.raises(ParameterError):
        encode(c, S.random(rng, (c.k + 1,)))
    with pytest.raises(ParameterError):
        syndrome(c, S.random(rng, (c.n - 1,)))


def test_generator_spans_kernel(small_code):
    c = small_code
    S = c.tower
    assert linalg.rank_frk(linalg.RingMatrix(S, c.G)) == (c.k, c.k)
    HG = S.mul(c.H[:, None], c.G[None]).sum(axis=2) % S.q
    assert not HG.any()


def test_codebook_size_micro():
    S = make_tower(make_ring(2, 1, 1), 2)
    code = gen_code(S, 3, 1, 2, make_rng(7))
    assert all(check_properties(code).values())
    words = [np.stack(w) for w in itertools.product(S.elements(), repeat=3)]
    kernel = {w.tobytes() for w in words if not syndrome(code, w).any()}
    assert len(kernel) == S.size ** code.k == 2 ** (1 * 1 * 2 * 1)
    image = {encode(code, m[None]).tobytes() for m in S.elements()}
    assert image == kernel


def test_subring_exclusion():
    S = make_tower(make_ring(2, 2, 1), 6)
    # the degree-2 and degree-3 intermediate rings
    for ell in (2, 3):
        z = subring_generator(S, ell)
        Q = 2**ell - 1
        assert np.array_equal(S.power(z, Q), S.one)
        basis = [S.power(z, i) for i in range(ell)]
        F = canonicalize(S, basis)
        assert F.frk == ell
        assert _contains_subring(F, S, ell)
    code = gen_code(S, 6, 3, 3, make_rng(11))
    assert not _contains_subring(code.F, S, 3)


def test_json_roundtrip(small_code, tmp_path):
    c = small_code
    path = tmp_path / "code.json"
    save_code(c, path)
    back = load_code(path)
    assert np.array_equal(back.H, c.H) and np.array_equal(back.f, c.f)
    assert np.array_equal(back.G, c.G) and np.array_equal(back.H_ext, c.H_ext)
    assert code_from_json(c.to_json()).params == c.params
