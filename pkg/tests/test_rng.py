"""Counter-stream primitives: determinism and scalar/vector agreement."""

import numpy as np

from pureucb import _rng


def test_scalar_vector_agreement():
    key = _rng.stream_key(123456789, 7)
    block = _rng.uniform_block(key, 5, 1000)
    scalars = np.array([_rng.uniform(key, 5 + t) for t in range(1000)])
    assert (block == scalars).all()


def test_uniforms_strictly_inside_unit_interval():
    key = _rng.stream_key(0, 0)
    u = _rng.uniform_block(key, 0, 100000)
    assert u.min() > 0.0 and u.max() < 1.0


def test_stream_keys_distinct_across_arms_and_seeds():
    keys = {_rng.stream_key(s, a) for s in range(50) for a in range(50)}
    assert len(keys) == 2500


def test_hash64_stable_across_calls():
    # regression pin: the value must never change, or every stored seed moves
    assert _rng.hash64(0, "x", 1) == _rng.hash64(0, "x", 1)
    assert _rng.hash64(1, "x") != _rng.hash64(2, "x")
    assert _rng.hash64(20240501, 12345, "ucbe(a=1)", 32, 0) == 7198529310875700556
