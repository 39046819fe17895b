"""Certification checks: decodability, encodability, the rank-based security
measure against a direct oracle and a brute-force enumeration oracle, entropy
accounting, monotonicity, and the certificate report format."""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

import numpy as np
import pytest

from sgcode.exactmat import FieldMatrix
from sgcode.field import TooLarge, make_field
from sgcode.scheme import (
    DataAssignment,
    DemandMatrix,
    SchemeArtifact,
    SchemeParams,
    build_scheme,
)
from sgcode.verifier import (
    Certificate,
    LinearObservable,
    certify,
    conditional_mi_direct,
    conditional_mi_rank,
    entropy_accounting,
    entropy_bruteforce,
    rank_entropy,
    verify_decodability,
    verify_encodability,
    verify_monotonicity,
    verify_transcript_determinism,
)

Q = make_field(2147483647)


# ---- fixtures ---------------------------------------------------------------


@pytest.fixture(scope="module")
def worked() -> SchemeArtifact:
    params = SchemeParams(K=3, N=3, Nr=3, M=2, S=2, q=Q)
    assignment = DataAssignment.from_datasets(3, [[2, 3], [1, 2], [1, 2]])
    return build_scheme(params, assignment, seed=0)


@pytest.fixture(scope="module")
def wide() -> SchemeArtifact:
    return build_scheme(SchemeParams(K=2, N=5, Nr=4, M=2, S=3, q=Q), seed=0)


@pytest.fixture(scope="module")
def tiny3() -> SchemeArtifact:
    # Small enough that all 3^9 variable assignments can be enumerated.
    return build_scheme(SchemeParams(K=2, N=3, Nr=3, M=2, S=2, q=make_field(3)), seed=0)


def corrupt_coding(scheme: SchemeArtifact, row: int, col: int) -> SchemeArtifact:
    field = scheme.params.q
    data = scheme.c.data.copy()
    data[row, col] = (int(data[row, col]) + 1) % field.q
    coding = dataclasses.replace(scheme.coding, matrix=FieldMatrix.wrap(data, field))
    return dataclasses.replace(scheme, coding=coding)


def corrupt_demand(
    scheme: SchemeArtifact, row: int, col: int, value: int
) -> SchemeArtifact:
    field = scheme.params.q
    n, kc = scheme.dims.n, scheme.dims.key_cols
    nk = n * scheme.params.K
    data = scheme.f.data.copy()
    data[row, col] = value
    full = FieldMatrix.wrap(data, field)
    demand = DemandMatrix(
        f1=full.take_rows(range(n)).take_cols(range(nk)),
        f2=full.take_rows(range(n, n + kc)).take_cols(range(nk)),
        f3=full.take_rows(range(n, n + kc)).take_cols(range(nk, nk + kc)),
        matrix=full,
    )
    return dataclasses.replace(scheme, demand=demand)


# ---- decodability and encodability ------------------------------------------


def test_decodability_worked_example(worked):
    report = verify_decodability(worked)
    assert report.passed
    assert report.subsets_checked == 1
    assert report.first_failure is None


def test_decodability_checks_every_responder_subset(wide):
    report = verify_decodability(wide)
    assert report.passed
    assert report.subsets_checked == 5  # C(5, 4)


def test_encodability_worked_example(worked):
    report = verify_encodability(worked)
    assert report.passed
    assert report.violations == ()


def test_corrupted_coding_entry_breaks_encodability(worked):
    bad = corrupt_coding(worked, 0, 0)
    report = verify_encodability(bad)
    assert not report.passed
    # Row 0 belongs to server 1; free column 0 feeds the piece sums that
    # include dataset 1, which server 1 does not hold.
    assert any("server 1" in v and "dataset 1" in v for v in report.violations)


def test_corrupted_key_coefficient_breaks_encodability(worked):
    n = worked.dims.n
    old = int(worked.f.data[n, 0])
    bad = corrupt_demand(worked, n, 0, (old + 1) % Q.q)
    assert not verify_encodability(bad).passed


# ---- security measure -------------------------------------------------------


def test_security_zero_for_certified_schemes(worked, wide):
    assert conditional_mi_rank(worked) == 0
    assert conditional_mi_rank(wide) == 0


def test_rank_measure_matches_direct_oracle(worked, wide):
    assert conditional_mi_rank(worked) == conditional_mi_direct(worked)
    assert conditional_mi_rank(wide) == conditional_mi_direct(wide)


def test_rank_measure_matches_direct_oracle_on_corrupted_schemes(worked):
    n, nk = worked.dims.n, worked.dims.n * worked.params.K
    variants = [
        corrupt_coding(worked, 0, 0),
        corrupt_demand(worked, n, 0, (int(worked.f.data[n, 0]) + 1) % Q.q),
        corrupt_demand(worked, n, nk, 0),
    ]
    for bad in variants:
        assert conditional_mi_rank(bad) == conditional_mi_direct(bad)


def test_unmasked_key_column_leaks_information(worked):
    # Zeroing a diagonal entry of the key identity block removes one key from
    # the transcript, so the piece differences are no longer fully masked.
    n, nk = worked.dims.n, worked.dims.n * worked.params.K
    bad = corrupt_demand(worked, n, nk, 0)
    assert conditional_mi_rank(bad) == 1


def test_security_matches_bruteforce_enumeration(tiny3):
    # I(transcript; gradients | sum) from exhaustive enumeration over GF(3).
    field = tiny3.params.q
    dims, params = tiny3.dims, tiny3.params
    nk = dims.n * params.K
    var_count = dims.f_cols

    transcript = LinearObservable(
        FieldMatrix.wrap((tiny3.c @ tiny3.f).data.copy(), field)
    )
    sum_rows = np.zeros((dims.n, var_count), dtype=np.int64)
    sum_rows[:, :nk] = tiny3.demand.f1.data
    gradient_rows = np.zeros((nk, var_count), dtype=np.int64)
    np.fill_diagonal(gradient_rows[:, :nk], 1)
    the_sum = LinearObservable(FieldMatrix.wrap(sum_rows, field))
    gradients = LinearObservable(FieldMatrix.wrap(gradient_rows, field))

    singles = entropy_bruteforce([transcript, the_sum, gradients], 3, var_count)
    h_x, h_s, h_g = singles.entropies
    h_xs = entropy_bruteforce([transcript, the_sum], 3, var_count).joint_entropy
    h_xg = entropy_bruteforce([transcript, gradients], 3, var_count).joint_entropy

    # The sum is a deterministic function of the gradients, so
    # I(X; G | S) = H(X, S) + H(G) - H(S) - H(X, G).
    mi = h_xs + h_g - h_s - h_xg
    assert mi == 0
    assert mi == conditional_mi_rank(tiny3)
    assert h_x == rank_entropy(transcript)
    assert h_s == rank_entropy(the_sum) == dims.n
    assert h_g == rank_entropy(gradients) == nk


# ---- brute-force oracle behavior --------------------------------------------


def test_rank_entropy_known_values():
    f3 = make_field(3)
    assert rank_entropy(LinearObservable(FieldMatrix.identity(4, f3))) == 4
    assert rank_entropy(LinearObservable(FieldMatrix.zeros(2, 5, f3))) == 0


def test_bruteforce_agrees_with_rank_entropy_on_random_observables():
    field = make_field(3)
    rng = np.random.default_rng(7)
    for _ in range(25):
        rows = int(rng.integers(1, 4))
        coeff = FieldMatrix.wrap(
            rng.integers(0, 3, size=(rows, 5)).astype(np.int64), field
        )
        obs = LinearObservable(coeff)
        report = entropy_bruteforce([obs], 3, 5)
        assert report.entropies[0] == rank_entropy(obs)


def test_bruteforce_pairwise_mi():
    field = make_field(3)
    e1 = LinearObservable(FieldMatrix.from_rows([[1, 0]], field))
    e2 = LinearObservable(FieldMatrix.from_rows([[0, 1]], field))
    same = LinearObservable(FieldMatrix.from_rows([[2, 0]], field))
    report = entropy_bruteforce([e1, e2, same], 3, 2)
    assert report.entropies == (1, 1, 1)
    assert report.joint_entropy == 2
    assert report.pairwise_mi[(0, 1)] == 0  # independent coordinates
    assert report.pairwise_mi[(0, 2)] == 1  # scalar multiples determine each other
    assert report.pairwise_mi[(1, 2)] == 0


def test_bruteforce_empty_observable_list():
    report = entropy_bruteforce([], 5, 3)
    assert report.entropies == ()
    assert report.joint_entropy == 0
    assert report.pairwise_mi == {}


def test_bruteforce_refuses_oversized_enumeration():
    field = make_field(2)
    obs = LinearObservable(FieldMatrix.zeros(1, 20, field))
    with pytest.raises(TooLarge):
        entropy_bruteforce([obs], 2, 20)


def test_bruteforce_validates_width_and_modulus():
    f3 = make_field(3)
    with pytest.raises(ValueError, match="width"):
        entropy_bruteforce([LinearObservable(FieldMatrix.zeros(1, 4, f3))], 3, 5)
    with pytest.raises(ValueError, match="modulus"):
        entropy_bruteforce([LinearObservable(FieldMatrix.zeros(1, 5, f3))], 5, 5)


# ---- determinism and accounting ---------------------------------------------


def test_transcript_determinism(worked, wide):
    for scheme in (worked, wide):
        report = verify_transcript_determinism(scheme)
        assert report.all_determined
        assert report.first_mismatch is None
        assert report.transcript_rank == scheme.dims.n + scheme.dims.key_cols
    assert verify_transcript_determinism(worked).subsets_checked == 1
    assert verify_transcript_determinism(wide).subsets_checked == 5


def test_entropy_accounting_has_no_slack(worked, wide, tiny3):
    for scheme in (worked, wide, tiny3):
        report = entropy_accounting(scheme)
        assert report.transcript_rank == scheme.dims.n + scheme.dims.key_cols
        assert report.expected_content == scheme.dims.n + scheme.dims.key_cols
        assert report.slack == 0


# ---- monotonicity -----------------------------------------------------------


def test_monotonicity_worked_example(worked):
    report = verify_monotonicity(worked.params)
    assert report.f_values == (Fraction(2),)
    assert report.g_values == (Fraction(5), Fraction(3), Fraction(2))
    assert report.f_strictly_decreasing
    assert report.g_non_increasing
    assert report.f_endpoint_is_r
    assert report.g_endpoint_is_r
    assert report.passed


def test_monotonicity_values_recomputed_independently():
    # N=6, Nr=5, M=3, S=3: r = 20 - 1 = 19, alpha = 3, n = 95 - 60 = 35.
    report = verify_monotonicity(SchemeParams(K=1, N=6, Nr=5, M=3, S=3, q=Q))
    assert report.f_values == (Fraction(30), Fraction(24), Fraction(19))
    assert report.g_values == (
        Fraction(65),
        Fraction(83, 2),
        Fraction(92, 3),
        Fraction(95, 4),
        Fraction(19),
    )
    assert report.passed


# ---- certificates -----------------------------------------------------------


def test_certificate_passes_on_worked_example(worked):
    cert = certify(worked)
    assert isinstance(cert, Certificate)
    assert cert.passed
    assert cert.decodability.passed
    assert cert.encodability.passed
    assert cert.security_mi == 0
    assert cert.dims_identity


def test_certificate_json_shape(worked):
    payload = json.loads(certify(worked).to_json())
    assert set(payload) == {
        "decodability",
        "encodability",
        "security",
        "dims",
        "passed",
    }
    assert payload["decodability"] == {
        "subsets_checked": 1,
        "pass": True,
        "first_failure": None,
    }
    assert payload["encodability"] == {"violations": []}
    assert payload["security"] == {"mi_value": "0"}
    assert payload["dims"] == {"identity_holds": True}
    assert payload["passed"] is True
    assert certify(worked).to_json().endswith("\n")


def test_certificate_fails_on_each_corruption(worked):
    n, nk = worked.dims.n, worked.dims.n * worked.params.K
    coding_bad = certify(corrupt_coding(worked, 0, 0))
    assert not coding_bad.passed and not coding_bad.encodability.passed

    key_bad = certify(
        corrupt_demand(worked, n, 0, (int(worked.f.data[n, 0]) + 1) % Q.q)
    )
    assert not key_bad.passed and not key_bad.encodability.passed

    mask_bad = certify(corrupt_demand(worked, n, nk, 0))
    assert not mask_bad.passed and mask_bad.security_mi > 0
