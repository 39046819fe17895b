"""Field arithmetic, modulus validation, and the seeded sampling contract."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgcode.field import (
    DEFAULT_MODULUS,
    INT64_SAFE_MODULUS,
    DivisionByZero,
    FieldElement,
    NotPrime,
    SeededRng,
    TooLarge,
    derive_seed,
    element,
    inv,
    make_field,
    sample_array,
    sample_uniform,
    uniform_ints,
)

MERSENNE_61 = (1 << 61) - 1

SMALL_PRIMES = [2, 3, 7, 97, DEFAULT_MODULUS]


# ---- modulus validation ------------------------------------------------------


@pytest.mark.parametrize("q", [2, 3, 5, 7, 65537, DEFAULT_MODULUS, MERSENNE_61])
def test_make_field_accepts_primes(q):
    assert make_field(q).q == q


@pytest.mark.parametrize("q", [0, 1, 4, 6, 9, 561, 2147483646, (1 << 61) + 1])
def test_make_field_rejects_composites(q):
    # 561 is a Carmichael number; trial division alone would be fooled by
    # a composite with only large factors, so the witness loop must run.
    with pytest.raises(NotPrime):
        make_field(q)


@pytest.mark.parametrize("q", [1 << 62, (1 << 62) + 1, 1 << 80])
def test_make_field_rejects_oversized(q):
    with pytest.raises(TooLarge):
        make_field(q)


def test_default_modulus_is_the_int64_cutoff():
    assert DEFAULT_MODULUS == INT64_SAFE_MODULUS == 2147483647
    assert make_field(DEFAULT_MODULUS).dtype() is np.int64
    assert make_field(MERSENNE_61).dtype() is object


# ---- element arithmetic ------------------------------------------------------


def test_element_reduces_into_range():
    f7 = make_field(7)
    assert element(-1, f7).value == 6
    assert element(15, f7).value == 1
    assert element(0, f7).value == 0


def test_field_element_validates_range():
    f7 = make_field(7)
    with pytest.raises(ValueError):
        FieldElement(7, f7)
    with pytest.raises(ValueError):
        FieldElement(-1, f7)


def test_mixed_moduli_rejected():
    a = element(1, make_field(7))
    b = element(1, make_field(11))
    with pytest.raises(ValueError):
        a + b


def test_inverse_of_zero_rejected():
    with pytest.raises(DivisionByZero):
        inv(element(0, make_field(7)))


@settings(max_examples=60, deadline=None)
@given(
    q=st.sampled_from(SMALL_PRIMES),
    data=st.data(),
)
def test_field_axioms(q, data):
    field = make_field(q)
    draw = st.integers(min_value=0, max_value=q - 1)
    a = FieldElement(data.draw(draw), field)
    b = FieldElement(data.draw(draw), field)
    c = FieldElement(data.draw(draw), field)
    zero = FieldElement(0, field)
    one = element(1, field)
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a * (b + c) == a * b + a * c
    assert a - a == zero
    assert a + (-a) == zero
    assert a * one == a
    if a.value != 0:
        assert a * inv(a) == one
        # Fermat: the multiplicative group has order q - 1.
        assert a ** (q - 1) == one


def test_pow_matches_repeated_multiplication():
    f = make_field(97)
    a = element(5, f)
    acc = element(1, f)
    for k in range(6):
        assert a**k == acc
        acc = acc * a


# ---- seed derivation and raw streams -----------------------------------------


def test_derive_seed_is_deterministic_and_sensitive():
    s = derive_seed(42, "coding")
    assert s == derive_seed(42, "coding")
    assert s != derive_seed(43, "coding")
    assert s != derive_seed(42, "coding2")
    assert 0 <= s < 1 << 64


def test_rng_stream_is_reproducible():
    a = SeededRng(7).raw(32)
    b = SeededRng(7).raw(32)
    assert a.dtype == np.uint64
    assert np.array_equal(a, b)


def test_rng_spawn_is_deterministic_and_distinct():
    parent = SeededRng(7)
    child = parent.spawn("x")
    assert child.seed == derive_seed(7, "x")
    assert np.array_equal(child.raw(8), SeededRng(7).spawn("x").raw(8))
    assert not np.array_equal(SeededRng(7).raw(8), SeededRng(7).spawn("x").raw(8))


def test_rng_rejects_out_of_range_seeds():
    with pytest.raises(ValueError):
        SeededRng(-1)
    with pytest.raises(ValueError):
        SeededRng(1 << 64)


# ---- uniform sampling --------------------------------------------------------


def test_uniform_ints_respects_bound_and_determinism():
    vals = uniform_ints(SeededRng(3), 10, 1000)
    assert vals.shape == (1000,)
    assert int(vals.max()) < 10
    assert np.array_equal(vals, uniform_ints(SeededRng(3), 10, 1000))


def test_uniform_ints_edge_bounds():
    assert uniform_ints(SeededRng(0), 1, 50).tolist() == [0] * 50
    assert uniform_ints(SeededRng(0), 5, 0).size == 0
    with pytest.raises(ValueError):
        uniform_ints(SeededRng(0), 0, 1)


def test_uniform_ints_matches_rejection_oracle():
    # Independent replay of the documented contract: walk the same raw
    # 64-bit stream, drop words in the final partial block, reduce mod bound.
    bound = 1000000007
    want = uniform_ints(SeededRng(11), bound, 200)
    raw = SeededRng(11).raw(208)
    threshold = (1 << 64) - ((1 << 64) % bound)
    kept = [int(w) % bound for w in raw if int(w) < threshold][:200]
    assert want.tolist() == kept


def test_uniform_ints_frequency_sanity():
    # q = 2 with a fixed seed: the bit average sits near one half.
    bits = uniform_ints(SeededRng(1), 2, 10000)
    mean = float(np.mean(bits))
    assert 0.45 <= mean <= 0.55


def test_sample_array_dtype_follows_modulus():
    small = sample_array(SeededRng(5), make_field(DEFAULT_MODULUS), 64)
    big = sample_array(SeededRng(5), make_field(MERSENNE_61), 64)
    assert small.dtype == np.int64
    assert big.dtype == object
    assert all(0 <= int(v) < MERSENNE_61 for v in big)


def test_sample_uniform_yields_field_elements():
    field = make_field(97)
    values = sample_uniform(SeededRng(9), field, 20)
    assert len(values) == 20
    assert all(v.modulus == field for v in values)
    again = sample_uniform(SeededRng(9), field, 20)
    assert values == again
    with pytest.raises(ValueError):
        sample_uniform(SeededRng(9), field, -1)
