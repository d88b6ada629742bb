"""Predicted torsion orders from lambda-adic valuations of 1 - a_p + p.

For a newform f with coefficient field F and a prime ell dividing
G = gcd_p N(p), each prime lam | ell of F contributes the exponent
f_lam * n_lam, where n_lam = min_p v_lam(1 - a_p + p) over the window.
The predicted torsion order is prod_ell ell^max_lam(f_lam n_lam).
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from math import gcd, prod
from typing import Iterable, Sequence

from .arith import int_valuation, prime_divisors, primes_up_to
from .newform_io import MissingDataError, NewformRecord, sturm_bound
from .numfield import (
    INITIAL_PRECISION,
    FieldElement,
    InternalConsistencyError,
    decompose_prime,
    lambda_valuation,
    norm,
)

log = logging.getLogger(__name__)

# a window needs enough primes that dropping ell still leaves one
MIN_WINDOW_PRIMES = 2


class InvalidWindowError(ValueError):
    pass


class CorruptDataError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    include_p2: bool = False
    seed: int = 0
    precision: int = INITIAL_PRECISION
    check_norm_identity: bool = True
    # drop p = ell from the window when computing n_lambda for ell
    exclude_ell: bool = False


@dataclass(frozen=True)
class FrobeniusData:
    p: int
    P: FieldElement  # 1 - a_p + p
    Np: int  # |Norm(P)|


@dataclass(frozen=True)
class PrimeWindow:
    level: int
    bound: int
    include_p2: bool = False
    excluded_ell: frozenset = frozenset()

    @property
    def primes(self) -> list[int]:
        return [
            p
            for p in primes_up_to(self.bound)
            if (p != 2 or self.include_p2) and self.level % p and p not in self.excluded_ell
        ]

    def without(self, ell: int) -> "PrimeWindow":
        return PrimeWindow(self.level, self.bound, self.include_p2, self.excluded_ell | {ell})

    def doubled(self) -> "PrimeWindow":
        return PrimeWindow(self.level, 2 * self.bound, self.include_p2, self.excluded_ell)


@dataclass(frozen=True)
class LambdaEntry:
    e: int
    f: int
    n: int


@dataclass
class EllReport:
    ell: int
    entries: list = field(default_factory=list)
    predicted_exponent: int = 0
    gcd_exponent: int = 0
    unresolved: bool = False

    @property
    def sharp(self) -> bool:
        return self.predicted_exponent == self.gcd_exponent

    @property
    def inert(self) -> bool:
        return len(self.entries) == 1 and self.entries[0].e == 1


@dataclass
class TorsionAnalysis:
    label: str
    level: int
    dimension: int
    window: PrimeWindow
    G: int
    T: int
    reports: list
    stabilization: bool | None
    G_doubled: int | None = None

    @property
    def bound(self) -> int:
        return self.window.bound

    @property
    def unresolved(self) -> bool:
        return any(r.unresolved for r in self.reports)

    @property
    def sharp(self) -> bool | None:
        """T == G; None ("unknown") when some ell could not be decomposed."""
        if self.T == self.G:
            return True
        return None if self.unresolved else False


# ---------------------------------------------------------------------------


def frobenius_data(r: NewformRecord, p: int) -> FrobeniusData:
    K = r.field
    P = K.from_rational(1 + p) - r.ap(p)
    n = norm(K, P)
    if n <= 0:
        raise CorruptDataError(f"{r.label}: Norm(1 - a_{p} + {p}) = {n} is not positive")
    return FrobeniusData(p, P, int(n))


def _frobenius_table(r: NewformRecord, window: PrimeWindow) -> list[FrobeniusData]:
    primes = window.primes
    if not primes:
        raise InvalidWindowError(f"{r.label}: no admissible primes up to {window.bound}")
    if primes[-1] > r.data_bound or any(p not in r.eigenvalues for p in primes):
        need = [p for p in primes if p not in r.eigenvalues]
        raise MissingDataError(f"{r.label}: eigenvalues needed for primes {','.join(map(str, need))}")
    return [frobenius_data(r, p) for p in primes]


def gcd_norms(r: NewformRecord, window: PrimeWindow) -> int:
    return reduce(gcd, (fd.Np for fd in _frobenius_table(r, window)))


def ell_report(r: NewformRecord, ell: int, window: PrimeWindow, config: EngineConfig = EngineConfig()) -> EllReport:
    """Exponent of ell in the predicted order.

    With ``config.exclude_ell`` the prime p = ell is removed from the window
    first; by default every good prime in the window counts, ell included.
    """
    if config.exclude_ell:
        window = window.without(ell)
    table = _frobenius_table(r, window)
    report = EllReport(ell)
    report.gcd_exponent = min(int_valuation(fd.Np, ell) for fd in table)
    K = r.field
    dec = decompose_prime(K, ell, precision=config.precision, seed=config.seed)
    if not dec.maximal_at_ell:
        log.warning("%s: ell=%d divides the index of Z[theta]; exponent set to 0", r.label, ell)
        report.unresolved = True
        return report
    mins = [None] * len(dec.primes)
    for fd in table:
        vals = [lambda_valuation(K, lam, fd.P) for lam in dec.primes]
        if config.check_norm_identity:
            lhs = int_valuation(fd.Np, ell)
            rhs = sum(lam.f * v for lam, v in zip(dec.primes, vals))
            if lhs != rhs:
                raise InternalConsistencyError(
                    f"{r.label}: v_{ell}(N({fd.p})) = {lhs} but sum f*v_lambda = {rhs}"
                )
        mins = [v if m is None else min(m, v) for m, v in zip(mins, vals)]
    report.entries = [LambdaEntry(lam.e, lam.f, n) for lam, n in zip(dec.primes, mins)]
    report.predicted_exponent = max(lam.f * n for lam, n in zip(dec.primes, mins))
    if len(dec.primes) == 1 and not report.sharp:
        raise InternalConsistencyError(
            f"{r.label}: single prime over {ell} but predicted exponent "
            f"{report.predicted_exponent} != gcd exponent {report.gcd_exponent}"
        )
    return report


def auto_bound(r: NewformRecord, include_p2: bool = False) -> int:
    """Sturm bound, raised if needed until the window holds MIN_WINDOW_PRIMES primes."""
    bound = sturm_bound(r.level, 2)
    while len(PrimeWindow(r.level, bound, include_p2).primes) < MIN_WINDOW_PRIMES:
        bound += 1
    return bound


def predicted_torsion_order(
    r: NewformRecord, bound: int | str = "auto", config: EngineConfig = EngineConfig()
) -> TorsionAnalysis:
    if bound == "auto":
        bound = auto_bound(r, config.include_p2)
    window = PrimeWindow(r.level, int(bound), config.include_p2)
    G = gcd_norms(r, window)
    reports = [ell_report(r, ell, window, config) for ell in prime_divisors(G)]
    T = prod(rep.ell**rep.predicted_exponent for rep in reports)
    stabilization, G2 = None, None
    doubled = window.doubled()
    if doubled.bound <= r.data_bound:
        G2 = gcd_norms(r, doubled)
        stabilization = G2 == G
    return TorsionAnalysis(r.label, r.level, r.dimension, window, G, T, reports, stabilization, G2)


# ---------------------------------------------------------------------------
# survey


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


@dataclass
class SurveyTables:
    dimension: int
    max_level: int
    analyses: list
    predicted_orders: list  # (label, T), sorted by (level, label)
    orders: list  # distinct predicted orders
    sharp_orders: list  # distinct T with T == G
    primes: list
    divisor_closure: list
    sharp_count: int
    unresolved: list = field(default_factory=list)
    unstable: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @classmethod
    def from_analyses(cls, dimension: int, max_level: int, analyses: Sequence[TorsionAnalysis]) -> "SurveyTables":
        orders = sorted({a.T for a in analyses})
        sharp = sorted({a.T for a in analyses if a.sharp})
        closure = sorted({d for t in orders for d in divisors(t)})
        primes = sorted({p for t in orders if t > 1 for p in prime_divisors(t)})
        violations = []
        for a in analyses:
            if a.G % a.T:
                violations.append(f"{a.label}: T={a.T} does not divide G={a.G}")
        return cls(
            dimension=dimension,
            max_level=max_level,
            analyses=list(analyses),
            predicted_orders=[(a.label, a.T) for a in analyses],
            orders=orders,
            sharp_orders=sharp,
            primes=primes,
            divisor_closure=closure,
            sharp_count=sum(1 for a in analyses if a.sharp),
            unresolved=[a.label for a in analyses if a.unresolved],
            unstable=[a.label for a in analyses if a.stabilization is False],
            violations=violations,
        )


def _analyze(args):
    r, bound, config = args
    return predicted_torsion_order(r, bound, config)


def survey(
    records: Iterable[NewformRecord],
    dim: int,
    max_level: int,
    bound: int | str = "auto",
    config: EngineConfig = EngineConfig(),
    workers: int = 1,
) -> SurveyTables:
    chosen = sorted(
        (r for r in records if r.dimension == dim and r.level <= max_level), key=NewformRecord.sort_key
    )
    jobs = [(r, bound, config) for r in chosen]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            analyses = list(pool.map(_analyze, jobs, chunksize=8))
    else:
        analyses = [_analyze(j) for j in jobs]
    return SurveyTables.from_analyses(dim, max_level, analyses)
