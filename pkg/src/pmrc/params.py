"""System parameters, capacity bounds, secure symbol counts and field selection."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import comb, gcd

from .errors import DegenerateSecrecy, FieldTooSmall, InvalidParams, UnsupportedRegime
from .gf import is_prime, next_prime


class Mode(str, Enum):
    MBR = "mbr"
    MSR = "msr"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    d: int
    beta: int
    alpha: int
    B: int
    mode: Mode

    @property
    def repair_bandwidth(self) -> int:
        return self.d * self.beta

    @property
    def shortening(self) -> int:
        """Number of shortening steps needed (MSR with d > 2k - 2)."""
        if self.mode is Mode.MSR:
            return self.d - (2 * self.k - 2)
        return 0


@dataclass(frozen=True)
class SecrecyParams:
    ell: int
    ell_prime: int
    B_s: int
    R: int


def cutset_bound(alpha: int, beta: int, k: int, d: int) -> int:
    """Largest file size ``B`` that any regenerating code with these parameters can store."""
    _check_positive(alpha=alpha, beta=beta, k=k, d=d)
    if k > d:
        raise InvalidParams(f"k={k} must not exceed d={d}")
    return sum(min(alpha, (d - i) * beta) for i in range(k))


def secrecy_bound(alpha: int, beta: int, k: int, d: int, ell: int) -> int:
    _check_positive(alpha=alpha, beta=beta, k=k, d=d)
    if k > d:
        raise InvalidParams(f"k={k} must not exceed d={d}")
    if not 0 <= ell < k:
        raise InvalidParams(f"need 0 <= ell < k, got ell={ell}, k={k}")
    return sum(min(alpha, (d - i) * beta) for i in range(ell, k))


def _check_positive(**kw):
    for name, v in kw.items():
        if not isinstance(v, int) or v < 1:
            raise InvalidParams(f"{name} must be a positive integer, got {v!r}")


def _check_order(n, k, d):
    _check_positive(n=n, k=k, d=d)
    if not k <= d <= n - 1:
        raise InvalidParams(f"need k <= d <= n-1, got n={n}, k={k}, d={d}")


def mbr_params(n: int, k: int, d: int, beta: int = 1) -> CodeParams:
    _check_order(n, k, d)
    _check_positive(beta=beta)
    B = (k * d - comb(k, 2)) * beta
    return CodeParams(n, k, d, beta, d * beta, B, Mode.MBR)


def msr_params(n: int, k: int, d: int, beta: int = 1) -> CodeParams:
    _check_order(n, k, d)
    _check_positive(beta=beta)
    if d < 2 * k - 2:
        raise UnsupportedRegime(f"d ≥ 2k−2 required for MSR, got d={d}, k={k}")
    alpha = (d - k + 1) * beta
    return CodeParams(n, k, d, beta, alpha, k * alpha, Mode.MSR)


def make_params(mode, n, k, d, beta=1) -> CodeParams:
    mode = Mode(mode)
    return mbr_params(n, k, d, beta) if mode is Mode.MBR else msr_params(n, k, d, beta)


def secure_counts(p: CodeParams, ell: int, ell_prime: int = 0) -> SecrecyParams:
    if not 0 <= ell < p.k:
        raise InvalidParams(f"need 0 <= ell < k, got ell={ell}, k={p.k}")
    if p.mode is Mode.MBR:
        # repair downloads equal stored content, so ell' adds nothing
        ell_prime = 0
        R = (ell * p.d - comb(ell, 2)) * p.beta
        B_s = p.B - R
    else:
        if not 0 <= ell_prime <= ell:
            raise InvalidParams(f"need 0 <= ell' <= ell, got ell'={ell_prime}, ell={ell}")
        B_s = (p.k - ell) * (p.alpha - ell_prime * p.beta)
        R = p.B - B_s
    if B_s <= 0:
        raise DegenerateSecrecy(f"no message capacity left at ell={ell}, ell'={ell_prime}")
    return SecrecyParams(ell, ell_prime, B_s, R)


def distinct_power_count(q: int, alpha: int) -> int:
    """How many distinct values x**alpha takes over GF(q)."""
    return 1 + (q - 1) // gcd(alpha, q - 1)


def select_modulus(mode, n_points: int, alpha: int) -> int:
    """Default field size for a code evaluated at ``n_points`` points.

    MBR: the smallest prime >= n_points. MSR: the smallest prime >= n_points on which
    at least ``n_points`` elements have distinct alpha-th powers; when gcd(alpha, q-1) = 1
    every prime >= n_points qualifies, otherwise the point search has to skip ahead.
    """
    q = next_prime(n_points)
    if Mode(mode) is Mode.MBR:
        return q
    while distinct_power_count(q, alpha) < n_points:
        q = next_prime(q + 1)
    return q


def check_modulus(q: int, n_points: int):
    if not is_prime(q):
        raise InvalidParams(f"q={q} is not prime")
    if q < n_points:
        raise FieldTooSmall(f"q={q} is smaller than the {n_points} evaluation points needed")
