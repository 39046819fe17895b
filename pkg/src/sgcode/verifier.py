"""Machine checks for a built scheme: decodability over every responder
subset, encodability of the unassigned-data and unavailable-key pattern, an
exact rank-based conditional mutual-information security check, counting and
monotonicity identities, and a brute-force entropy oracle that validates the
rank method on tiny instances."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exactmat import FieldMatrix, rank
from .field import TooLarge
from .keyspace import comb0, enumerate_groups, unavailable_key_columns
from .scheme import SchemeArtifact, SchemeParams, derive_dims, gradient_columns

BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class LinearObservable:
    """A linear function of the message variables (all gradient pieces, then
    all key pieces), one output per coefficient row."""

    coeff: FieldMatrix


def rank_entropy(obs: LinearObservable) -> Fraction:
    """Entropy of a linear function of iid uniform field variables, in log-q
    units per symbol column: exactly the coefficient rank."""
    return Fraction(rank(obs.coeff))


# ---- decodability and encodability ------------------------------------------


@dataclass(frozen=True)
class DecodabilityReport:
    subsets_checked: int
    passed: bool
    first_failure: Optional[Tuple[int, ...]]


def verify_decodability(scheme: SchemeArtifact) -> DecodabilityReport:
    """Every size-Nr responder subset must stack to an invertible C_U."""
    dims = scheme.dims
    arr = scheme.c.data
    checked = 0
    for subset in combinations(range(1, scheme.params.N + 1), scheme.params.Nr):
        rows = np.concatenate(
            [np.arange((s - 1) * dims.r, s * dims.r) for s in subset]
        )
        checked += 1
        if rank(FieldMatrix.wrap(arr[rows], scheme.params.q)) < dims.f_rows:
            return DecodabilityReport(checked, False, subset)
    return DecodabilityReport(checked, True, None)


@dataclass(frozen=True)
class EncodabilityReport:
    violations: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_encodability(scheme: SchemeArtifact) -> EncodabilityReport:
    """Compute P = C F once and demand zeros at every (server, column) pair
    the server must not touch: pieces of unassigned datasets and pieces of
    unavailable keys."""
    params, dims = scheme.params, scheme.dims
    p = (scheme.c @ scheme.f).data
    index = enumerate_groups(params.N, params.S)
    violations: List[str] = []
    for k in range(1, params.K + 1):
        cols = gradient_columns(dims, params, k)
        for server in sorted(scheme.assignment.non_holders(k, params.N)):
            block = p[(server - 1) * dims.r : server * dims.r][:, cols]
            if np.any(block):
                violations.append(
                    f"server {server} touches unassigned dataset {k}"
                )
    for server in range(1, params.N + 1):
        cols = sorted(
            c - 1 for c in unavailable_key_columns(params, index, server)
        )
        if not cols:
            continue
        block = p[(server - 1) * dims.r : server * dims.r][:, cols]
        if np.any(block):
            violations.append(f"server {server} touches an unavailable key")
    return EncodabilityReport(tuple(violations))


# ---- security ---------------------------------------------------------------


def _transcript_coeff(scheme: SchemeArtifact) -> np.ndarray:
    return (scheme.c @ scheme.f).data


def _sum_coeff(scheme: SchemeArtifact) -> np.ndarray:
    """[F1 | 0]: the piece sums as a function of the message variables."""
    dims = scheme.dims
    out = np.zeros((dims.n, dims.f_cols), dtype=scheme.params.q.dtype())
    out[:, : dims.n * scheme.params.K] = scheme.demand.f1.data
    return out


def _gradient_coeff(scheme: SchemeArtifact) -> np.ndarray:
    """[I | 0]: the gradient pieces themselves."""
    dims = scheme.dims
    nk = dims.n * scheme.params.K
    out = np.zeros((nk, dims.f_cols), dtype=scheme.params.q.dtype())
    np.fill_diagonal(out[:, :nk], 1)
    return out


def conditional_mi_rank(scheme: SchemeArtifact) -> Fraction:
    """I(all transcripts ; gradients | gradient sum), exactly, in log-q units
    per symbol column:

        [rank([A; Ssum]) - rank(Ssum)] - [rank([A; G]) - rank(G)]

    with A = C F, Ssum = [F1 | 0], G = [I | 0]. Both stacked ranks reduce
    structurally: G's identity block clears A's gradient columns, so
    rank([A; G]) = nK + rank(A_keys); Ssum's rows have disjoint supports
    (one per piece, covering its K dataset columns), so eliminating them
    replaces each piece's columns by differences against its first dataset
    column and rank([A; Ssum]) = n + rank([A_diff | A_keys]). The subtracted
    terms rank(Ssum) = n and rank(G) = nK cancel exactly."""
    dims = scheme.dims
    params = scheme.params
    q = params.q.q
    a = _transcript_coeff(scheme)
    nk = dims.n * params.K
    a_keys = a[:, nk:]
    blocks = a[:, :nk].reshape(a.shape[0], dims.n, params.K)
    diffs = (blocks[:, :, 1:] - blocks[:, :, :1]) % q
    diffs = diffs.reshape(a.shape[0], dims.n * (params.K - 1))
    given_sum = np.concatenate([diffs, a_keys], axis=1)
    field = params.q
    mi = rank(FieldMatrix.wrap(given_sum, field)) - rank(
        FieldMatrix.wrap(a_keys.copy(), field)
    )
    return Fraction(mi)


def conditional_mi_direct(scheme: SchemeArtifact) -> Fraction:
    """Reference implementation of the same quantity with explicit stacked
    eliminations and no structural shortcuts."""
    a = _transcript_coeff(scheme)
    ssum = _sum_coeff(scheme)
    grad = _gradient_coeff(scheme)
    field = scheme.params.q

    def _rank(arr: np.ndarray) -> int:
        return rank(FieldMatrix.wrap(arr.copy(), field))

    h_x_given_sum = _rank(np.concatenate([a, ssum], axis=0)) - _rank(ssum)
    h_x_given_g = _rank(np.concatenate([a, grad], axis=0)) - _rank(grad)
    return Fraction(h_x_given_sum - h_x_given_g)


@dataclass(frozen=True)
class DeterminismReport:
    """Whether any Nr responder blocks already span all transcript rows."""

    transcript_rank: int
    subsets_checked: int
    all_determined: bool
    first_mismatch: Optional[Tuple[int, ...]]


def verify_transcript_determinism(scheme: SchemeArtifact) -> DeterminismReport:
    dims = scheme.dims
    a = _transcript_coeff(scheme)
    field = scheme.params.q
    total = rank(FieldMatrix.wrap(a.copy(), field))
    checked = 0
    for subset in combinations(range(1, scheme.params.N + 1), scheme.params.Nr):
        rows = np.concatenate(
            [np.arange((s - 1) * dims.r, s * dims.r) for s in subset]
        )
        checked += 1
        if rank(FieldMatrix.wrap(a[rows], field)) != total:
            return DeterminismReport(total, checked, False, subset)
    return DeterminismReport(total, checked, True, None)


@dataclass(frozen=True)
class AccountingReport:
    """Transcript entropy versus the counted content (piece sums plus keys),
    in log-q units per symbol column; slack is reported, not failed."""

    transcript_rank: int
    expected_content: int

    @property
    def slack(self) -> int:
        return self.expected_content - self.transcript_rank


def entropy_accounting(scheme: SchemeArtifact) -> AccountingReport:
    a = _transcript_coeff(scheme)
    total = rank(FieldMatrix.wrap(a.copy(), scheme.params.q))
    dims = scheme.dims
    return AccountingReport(
        transcript_rank=total, expected_content=dims.n + dims.key_cols
    )


# ---- brute-force entropy oracle ---------------------------------------------


def _entropy_from_codes(codes: np.ndarray, q: int, var_count: int) -> Fraction:
    """Exact base-q entropy of the empirical distribution of codes over all
    q^var_count equiprobable assignments. Counts must be powers of q, which
    holds for linear observables (fibers are cosets)."""
    _, counts = np.unique(codes, return_counts=True)
    total = q**var_count
    acc = Fraction(0)
    for c in counts:
        c = int(c)
        e = 0
        while c % q == 0:
            c //= q
            e += 1
        if c != 1:
            raise ValueError("count is not a power of q; entropy not rational")
        acc += Fraction(e * (q**e), total)
    return Fraction(var_count) - acc


@dataclass(frozen=True)
class BruteForceReport:
    entropies: Tuple[Fraction, ...]
    joint_entropy: Fraction
    pairwise_mi: Dict[Tuple[int, int], Fraction]


def entropy_bruteforce(
    observables: Sequence[LinearObservable], q: int, var_count: int
) -> BruteForceReport:
    """Enumerate all q^var_count assignments and measure exact entropies of
    each observable, the joint, and every pairwise mutual information."""
    if q**var_count > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{q}^{var_count} exceeds {BRUTE_FORCE_LIMIT}")
    for obs in observables:
        if obs.coeff.cols != var_count:
            raise ValueError("coefficient width differs from var_count")
        if obs.coeff.modulus.q != q:
            raise ValueError("observable modulus differs from q")
    total = q**var_count
    idx = np.arange(total, dtype=np.int64)
    assign = np.empty((total, var_count), dtype=np.int64)
    for j in range(var_count):
        assign[:, j] = (idx // q**j) % q

    def _codes(coeff: np.ndarray) -> np.ndarray:
        vals = assign @ coeff.T.astype(np.int64) % q
        weights = q ** np.arange(vals.shape[1], dtype=np.int64)
        return vals @ weights

    per_obs = [_codes(np.asarray(obs.coeff.data)) for obs in observables]
    entropies = tuple(
        _entropy_from_codes(c, q, var_count) for c in per_obs
    )
    if observables:
        joint_arr = np.concatenate(
            [np.asarray(obs.coeff.data) for obs in observables], axis=0
        )
        joint = _entropy_from_codes(_codes(joint_arr), q, var_count)
    else:
        joint = Fraction(0)
    pairwise: Dict[Tuple[int, int], Fraction] = {}
    for i in range(len(observables)):
        for j in range(i + 1, len(observables)):
            pair = np.concatenate(
                [
                    np.asarray(observables[i].coeff.data),
                    np.asarray(observables[j].coeff.data),
                ],
                axis=0,
            )
            h_ij = _entropy_from_codes(_codes(pair), q, var_count)
            pairwise[(i, j)] = entropies[i] + entropies[j] - h_ij
    return BruteForceReport(
        entropies=entropies, joint_entropy=joint, pairwise_mi=pairwise
    )


# ---- monotonicity -----------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    f_values: Tuple[Fraction, ...]
    g_values: Tuple[Fraction, ...]
    f_strictly_decreasing: bool
    g_non_increasing: bool
    f_endpoint_is_r: bool
    g_endpoint_is_r: bool

    @property
    def passed(self) -> bool:
        return (
            self.f_strictly_decreasing
            and self.g_non_increasing
            and self.f_endpoint_is_r
            and self.g_endpoint_is_r
        )


def verify_monotonicity(params: SchemeParams) -> MonotonicityReport:
    """Evaluate f(x) = alpha*(C(N,S) - C(N-x,S))/x over x in [N-M] and
    g(x) = (n + alpha*(C(N,S) - C(N-x,S)))/x over x in [Nr], exactly."""
    dims = derive_dims(params)
    N, S = params.N, params.S

    def covered(x: int) -> int:
        return comb0(N, S) - comb0(N - x, S)

    f_vals = tuple(
        Fraction(dims.alpha * covered(x), x) for x in range(1, N - params.M + 1)
    )
    g_vals = tuple(
        Fraction(dims.n + dims.alpha * covered(x), x)
        for x in range(1, params.Nr + 1)
    )
    return MonotonicityReport(
        f_values=f_vals,
        g_values=g_vals,
        f_strictly_decreasing=all(
            a > b for a, b in zip(f_vals, f_vals[1:])
        ),
        g_non_increasing=all(a >= b for a, b in zip(g_vals, g_vals[1:])),
        f_endpoint_is_r=(not f_vals) or f_vals[-1] == dims.r,
        g_endpoint_is_r=(not g_vals) or g_vals[-1] == dims.r,
    )


# ---- certification ----------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    decodability: DecodabilityReport
    encodability: EncodabilityReport
    security_mi: Fraction
    dims_identity: bool

    @property
    def passed(self) -> bool:
        return (
            self.decodability.passed
            and self.encodability.passed
            and self.security_mi == 0
            and self.dims_identity
        )

    def to_json_dict(self) -> dict:
        return {
            "decodability": {
                "subsets_checked": self.decodability.subsets_checked,
                "pass": self.decodability.passed,
                "first_failure": (
                    list(self.decodability.first_failure)
                    if self.decodability.first_failure
                    else None
                ),
            },
            "encodability": {"violations": list(self.encodability.violations)},
            "security": {"mi_value": str(self.security_mi)},
            "dims": {"identity_holds": self.dims_identity},
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def _dims_identity(scheme: SchemeArtifact) -> bool:
    dims, params = scheme.dims, scheme.params
    groups = comb0(params.N, params.S)
    return (
        dims.r == comb0(params.N, params.S) - comb0(params.M, params.S)
        and dims.alpha == params.N - params.M
        and dims.n == dims.r * params.Nr - groups * dims.alpha
        and dims.f_rows == dims.n + dims.alpha * groups
        and dims.f_rows == dims.r * params.Nr
        and dims.f_cols == dims.n * params.K + dims.alpha * groups
        and scheme.c.shape == (dims.r * params.N, dims.f_rows)
        and scheme.f.shape == (dims.f_rows, dims.f_cols)
    )


def certify(scheme: SchemeArtifact) -> Certificate:
    """Run every certification check; all four must pass before an artifact
    may be called certified."""
    return Certificate(
        decodability=verify_decodability(scheme),
        encodability=verify_encodability(scheme),
        security_mi=conditional_mi_rank(scheme),
        dims_identity=_dims_identity(scheme),
    )
