"""Exact secrecy audit for linear codes with uniform random padding.

Every symbol an eavesdropper sees is ``A u + B r`` for message symbols ``u`` and random
symbols ``r``. With uniform independent inputs, entropies of such views are ranks
(in q-ary units), so

    I(U; E) = rank([A | B]) - rank(B).

The audit checks the two sufficient conditions separately as well:
randomness recoverable given the message (rank B = R) and the view carries at most R
units (rank [A | B] <= R). A brute-force enumerator provides an independent check of
the rank formula on small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import comb
from typing import Iterable

import numpy as np

from . import kernels
from .errors import InvalidSpec, SecrecyViolation, TooLargeForBruteForce
from .gf import GF
from .linalg import MatrixFq, hstack, rank, vstack
from .params import Mode

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class EavesdropperSpec:
    storage_nodes: frozenset[int]
    repair_nodes: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "storage_nodes", frozenset(self.storage_nodes))
        object.__setattr__(self, "repair_nodes", frozenset(self.repair_nodes))
        if not self.repair_nodes <= self.storage_nodes:
            raise InvalidSpec(f"repair nodes {sorted(self.repair_nodes)} must be among the "
                              f"storage nodes {sorted(self.storage_nodes)}")

    def __str__(self):
        stored = ",".join(map(str, sorted(self.storage_nodes))) or "-"
        repaired = ",".join(map(str, sorted(self.repair_nodes))) or "-"
        return f"{{storage: {stored}; repair: {repaired}}}"


@dataclass(frozen=True)
class ObservationSystem:
    A: MatrixFq      # e x B_s, coefficients on message symbols
    Bmat: MatrixFq   # e x R, coefficients on random symbols

    @property
    def e(self) -> int:
        return self.A.rows

    @property
    def field(self) -> GF:
        return self.A.field

    @property
    def combined(self) -> MatrixFq:
        return hstack(self.A, self.Bmat)

    @classmethod
    def empty(cls, b_s: int, r: int, field: GF) -> ObservationSystem:
        return cls(MatrixFq.zeros(0, b_s, field), MatrixFq.zeros(0, r, field))

    @classmethod
    def from_rows(cls, rows: np.ndarray, b_s: int, field: GF) -> ObservationSystem:
        rows = np.asarray(rows, dtype=np.int64)
        return cls(MatrixFq(rows[:, :b_s], field), MatrixFq(rows[:, b_s:], field))

    def extend(self, rows: np.ndarray) -> ObservationSystem:
        """Append observation rows given over the combined ``[u; r]`` basis."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.A.cols + self.Bmat.cols)
        b_s = self.A.cols
        return ObservationSystem(
            vstack(self.A, MatrixFq(rows[:, :b_s], self.field)),
            vstack(self.Bmat, MatrixFq(rows[:, b_s:], self.field)),
        )


# -- building the view ----------------------------------------------------------


def _check_nodes(code, spec: EavesdropperSpec):
    bad = [i for i in spec.storage_nodes if not 1 <= i <= code.n]
    if bad:
        raise InvalidSpec(f"node ids {sorted(bad)} outside 1..{code.n}")


def observation_rows(code, spec: EavesdropperSpec) -> np.ndarray:
    _check_nodes(code, spec)
    parts = [code.storage_coefficients(i) for i in sorted(spec.storage_nodes)]
    parts += [code.repair_coefficients(i) for i in sorted(spec.repair_nodes)]
    if not parts:
        return np.zeros((0, code.free_count), dtype=np.int64)
    return np.vstack(parts)


def build_observation(code, spec: EavesdropperSpec) -> ObservationSystem:
    """The eavesdropper's linear view for ``spec``.

    Stored data of node i contributes its alpha share symbols. A repair-observed node f
    additionally contributes the column ``M v_f`` that its replacement reconstructs from
    any d helpers; raw helper symbols span the same space whichever helpers answer.
    """
    return ObservationSystem.from_rows(observation_rows(code, spec), code.secrecy.B_s, code.field)


def helper_rows(code, failed: int, helpers: Iterable[int]) -> np.ndarray:
    """Coefficient rows of the raw symbols ``helpers`` send when ``failed`` is repaired."""
    v = code.encoding.repair_vector(failed).reshape(1, -1)
    return np.vstack([kernels.matmul(v, code.storage_coefficients(h), code.q) for h in helpers])


# -- leakage and the two proof steps ----------------------------------------


def leakage(sys: ObservationSystem) -> int:
    """Mutual information between message and view, in q-ary units."""
    return rank(sys.combined) - rank(sys.Bmat)


def step1_randomness_recoverable(sys: ObservationSystem) -> bool:
    """Given the message, do the observations pin down every random symbol?"""
    return rank(sys.Bmat) == sys.Bmat.cols


def step2_entropy_bound(sys: ObservationSystem, R: int, exact: int | None = None) -> bool:
    """Does the view carry at most ``R`` units (and exactly ``exact`` when given)?"""
    r = rank(sys.combined)
    return r <= R and (exact is None or r == exact)


# -- audit over all eavesdropper choices --------------------------------------


@dataclass(frozen=True)
class SpecResult:
    spec: EavesdropperSpec
    e: int
    view_rank: int
    random_rank: int
    leakage: int
    step1: bool | None
    step2: bool | None

    @property
    def full(self) -> bool:
        return self.step1 is not None


@dataclass
class AuditReport:
    code: str
    ell: int
    ell_prime: int
    R: int
    results: list[SpecResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.leakage == 0 for r in self.results)

    @property
    def max_rank(self) -> int:
        return max((r.view_rank for r in self.results), default=0)

    @property
    def violations(self) -> list[SpecResult]:
        return [r for r in self.results if r.leakage]

    def lines(self) -> list[str]:
        out = [f"code: {self.code}", f"audit: ell={self.ell} ell'={self.ell_prime} R={self.R}"]
        for r in self.results:
            steps = ""
            if r.full:
                steps = f" step1={'ok' if r.step1 else 'FAIL'} step2={'ok' if r.step2 else 'FAIL'}"
            out.append(f"spec {r.spec}: e={r.e} rank={r.view_rank} rank_B={r.random_rank}{steps} leakage={r.leakage}")
        out.append(f"specs={len(self.results)} max_rank={self.max_rank} "
                   f"result={'PASS' if self.passed else 'FAIL'}")
        return out


def enumerate_specs(n: int, ell: int, ell_prime: int, include_smaller: bool = False):
    sizes = range(ell + 1) if include_smaller else [ell]
    for size in sizes:
        for stored in itertools.combinations(range(1, n + 1), size):
            for r in range(min(ell_prime, size) + 1):
                for repaired in itertools.combinations(stored, r):
                    yield EavesdropperSpec(frozenset(stored), frozenset(repaired))


def audit_spec(code, spec: EavesdropperSpec, full: bool) -> SpecResult:
    sys = build_observation(code, spec)
    view = rank(sys.combined)
    rnd = rank(sys.Bmat)
    step1 = step2 = None
    if full:
        R = sys.Bmat.cols
        exact = None
        ell = len(spec.storage_nodes)
        if code.mode is Mode.MBR and ell == code.secrecy.ell:
            exact = ell * code.d - comb(ell, 2)
        step1 = rnd == R
        step2 = view <= R and (exact is None or view == exact)
    return SpecResult(spec, sys.e, view, rnd, view - rnd, step1, step2)


def audit_all(code, ell: int | None = None, ell_prime: int | None = None,
              include_smaller: bool = False, raise_on_violation: bool = True) -> AuditReport:
    """Audit every eavesdropper with ``ell`` storage nodes, ``ell_prime`` of them repair-observed.

    Defaults come from the code's own secrecy parameters. For MBR codes repair downloads
    equal what is stored, so ``ell_prime`` is taken as 0. Step 1/2 outcomes are recorded
    for the worst-case (full-size) specs; smaller specs are checked for leakage only.
    """
    ell = code.secrecy.ell if ell is None else ell
    ell_prime = code.secrecy.ell_prime if ell_prime is None else ell_prime
    if code.mode is Mode.MBR:
        ell_prime = 0
    report = AuditReport(code.describe(), ell, ell_prime, code.secrecy.R)
    for spec in enumerate_specs(code.n, ell, ell_prime, include_smaller):
        full = len(spec.storage_nodes) == ell and len(spec.repair_nodes) == ell_prime
        report.results.append(audit_spec(code, spec, full))
    if raise_on_violation and report.violations:
        bad = report.violations[0]
        raise SecrecyViolation(bad.spec, bad.leakage)
    return report


# -- brute-force oracle -------------------------------------------------------


def _entropy(counts: np.ndarray, total: int, q: int) -> float:
    p = counts / total
    return float(-(p * np.log(p)).sum() / math.log(q))


def _mutual_information(u_keys: np.ndarray, e_keys: np.ndarray, q: int) -> float:
    total = u_keys.size
    _, cu = np.unique(u_keys, return_counts=True)
    _, ce = np.unique(e_keys, return_counts=True)
    _, cj = np.unique(np.stack([u_keys, e_keys], axis=1), axis=0, return_counts=True)
    return _entropy(cu, total, q) + _entropy(ce, total, q) - _entropy(cj, total, q)


def _all_vectors(q: int, length: int) -> np.ndarray:
    """Every vector of GF(q)^length as rows (length x q**length transposed)."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(q, dtype=np.int64)] * length, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _row_keys(rows: np.ndarray, q: int) -> np.ndarray:
    """Injective integer key per row (base-q positional value, as Python ints if large)."""
    if rows.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    if q ** rows.shape[1] < 2**62:
        weights = q ** np.arange(rows.shape[1], dtype=np.int64)
        return rows @ weights
    _, inverse = np.unique(rows, axis=0, return_inverse=True)
    return inverse.ravel().astype(np.int64)


def _check_budget(q, count, budget):
    if q ** count > budget:
        raise TooLargeForBruteForce(f"{q}^{count} enumerations exceed the budget of {budget}")


def brute_force_system(sys: ObservationSystem, budget: int = DEFAULT_BUDGET) -> float:
    """I(U; E) by enumerating every (u, r) through an explicit observation system."""
    q = sys.field.q
    b_s, r = sys.A.cols, sys.Bmat.cols
    _check_budget(q, b_s + r, budget)
    z = _all_vectors(q, b_s + r)
    obs = kernels.matmul(z, sys.combined.data.T, q)
    return _mutual_information(_row_keys(z[:, :b_s], q), _row_keys(obs, q), q)


def brute_force_leakage(code, spec: EavesdropperSpec, budget: int = DEFAULT_BUDGET) -> float:
    """I(U; E) by running the encoder on every (u, r) and tallying what ``spec`` sees.

    The observations come from actual encoded shares; repair views are the raw helper
    symbols of the d lowest-numbered helpers. Nothing here uses the rank formula.
    """
    _check_nodes(code, spec)
    q, b_s = code.q, code.secrecy.B_s
    _check_budget(q, code.free_count, budget)
    z = _all_vectors(q, code.free_count)
    shares = code.encode_batch(z.T)  # n x alpha x N
    seen = [shares[i - 1] for i in sorted(spec.storage_nodes)]
    for f in sorted(spec.repair_nodes):
        helpers = [h for h in range(1, code.n + 1) if h != f][: code.d]
        seen.append(np.stack([code.helper_batch(shares[h - 1], f) for h in helpers]))
    obs = np.vstack(seen).T if seen else np.zeros((z.shape[0], 0), dtype=np.int64)
    return _mutual_information(_row_keys(z[:, :b_s], q), _row_keys(obs, q), q)
