"""Greedy sparse recovery and the Monte-Carlo success-rate harness."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .charseq import Family
from .errors import RangeError, ZeroSignal
from .seeding import float_key, trial_rng
from .sensing import (
    SensingMatrix,
    build_gaussian_matrix,
    build_matrix,
    build_partial_fourier_matrix,
)

NOISELESS_THRESHOLD = 1e-4
NOISY_THRESHOLD = 1e-2

# stream tags for per-trial generators
_SIGNAL, _MATRIX, _NOISE = 0, 1, 2


@dataclass(frozen=True)
class SparseSignal:
    N: int
    support: np.ndarray
    values: np.ndarray

    @property
    def sparsity(self) -> int:
        return len(self.support)

    def dense(self) -> np.ndarray:
        x = np.zeros(self.N)
        x[self.support] = self.values
        return x


@dataclass
class RecoveryResult:
    estimate: np.ndarray
    iterations_used: int
    residual_norm_history: list[float]
    squared_error: float | None = None
    success: bool | None = None

    def score(self, x, threshold: float) -> "RecoveryResult":
        """Fill in ``||x - estimate||^2`` and the success flag."""
        if isinstance(x, SparseSignal):
            x = x.dense()
        self.squared_error = float(np.sum(np.abs(np.asarray(x) - self.estimate) ** 2))
        self.success = self.squared_error < threshold
        return self


def generate_sparse_signal(N: int, s: int, seed) -> SparseSignal:
    """``s`` positions uniformly without replacement, each value +1 or -1."""
    if not 0 <= s <= N:
        raise RangeError(f"sparsity {s} outside [0, {N}]")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(N, size=s, replace=False))
    values = rng.choice(np.array([-1.0, 1.0]), size=s)
    return SparseSignal(N, support, values)


def _dense(mat) -> np.ndarray:
    return mat.dense if isinstance(mat, SensingMatrix) else np.asarray(mat)


def measure(mat, x) -> np.ndarray:
    a = _dense(mat)
    if isinstance(x, SparseSignal):
        return a[:, x.support] @ x.values.astype(complex) if x.sparsity else np.zeros(a.shape[0], complex)
    x = np.asarray(x)
    if x.shape != (a.shape[1],):
        raise RangeError(f"signal length {x.shape} does not match N={a.shape[1]}")
    return a @ x


def add_awgn(y: np.ndarray, snr_db: float, seed) -> np.ndarray:
    """Add circular complex Gaussian noise with ``SNR = ||y||^2 / (K sigma^2)``."""
    y = np.asarray(y, dtype=complex)
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy()
    if not math.isfinite(snr_db):
        raise RangeError(f"SNR must be finite or +inf, got {snr_db}")
    energy = float(np.vdot(y, y).real)
    if energy == 0.0:
        raise ZeroSignal("cannot scale noise to a zero measurement")
    sigma2 = energy / (y.size * 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size)
    return y + math.sqrt(sigma2 / 2.0) * z


def matching_pursuit(mat, y, max_iterations: int = 100, residual_tol: float = 1e-7) -> RecoveryResult:
    """Classic MP on a matrix with unit-norm columns.

    ``residual_norm_history[0]`` is ``||y||``; entry ``i`` is the norm after
    iteration ``i``.  Pass ``residual_tol=0`` to always run ``max_iterations``.
    """
    a = _dense(mat)
    ah = mat.adjoint if isinstance(mat, SensingMatrix) else a.conj().T
    r = np.array(y, dtype=complex)
    xhat = np.zeros(a.shape[1], dtype=complex)
    norms = [float(np.linalg.norm(r))]
    it = 0
    while it < max_iterations and norms[-1] >= residual_tol:
        corr = ah @ r
        n = int(np.argmax(np.abs(corr)))  # first index wins ties
        g = corr[n]
        xhat[n] += g
        r -= g * a[:, n]
        it += 1
        norms.append(float(np.linalg.norm(r)))
    return RecoveryResult(xhat, it, norms)


def orthogonal_matching_pursuit(mat, y, max_iterations: int = 100, residual_tol: float = 1e-7) -> RecoveryResult:
    a = _dense(mat)
    ah = mat.adjoint if isinstance(mat, SensingMatrix) else a.conj().T
    y = np.asarray(y, dtype=complex)
    r = y.copy()
    support: list[int] = []
    coef = np.zeros(0, dtype=complex)
    norms = [float(np.linalg.norm(r))]
    limit = min(max_iterations, a.shape[0])
    while len(support) < limit and norms[-1] >= residual_tol:
        n = int(np.argmax(np.abs(ah @ r)))
        if n in support:
            break
        support.append(n)
        coef, *_ = np.linalg.lstsq(a[:, support], y, rcond=None)
        r = y - a[:, support] @ coef
        norms.append(float(np.linalg.norm(r)))
    xhat = np.zeros(a.shape[1], dtype=complex)
    xhat[support] = coef
    return RecoveryResult(xhat, len(support), norms)


ALGORITHMS = {"mp": matching_pursuit, "omp": orthogonal_matching_pursuit}


# -- experiments ----------------------------------------------------------------

@dataclass
class ExperimentConfig:
    family: str
    p: int | None = None
    m: int = 1
    M: int | None = None
    K: int | None = None
    N: int | None = None
    sparsities: Sequence[int] = (1,)
    trials: int = 2000
    max_iterations: int = 100
    success_threshold: float | None = None
    snr_db: Sequence[float] = ()
    master_seed: int = 0
    algorithm: str = "mp"
    strict_iterations: bool = False
    residual_tol: float = 1e-7
    regenerate: bool = True
    threads: int = 1
    per_trial: bool = False

    def __post_init__(self):
        self.family = Family(self.family).value
        if self.trials < 1:
            raise RangeError("trials must be >= 1")
        if self.success_threshold is not None and self.success_threshold <= 0:
            raise RangeError("success threshold must be positive")
        if self.algorithm not in ALGORITHMS:
            raise RangeError(f"unknown algorithm {self.algorithm!r}")
        if Family(self.family).deterministic:
            if self.p is None or self.M is None:
                raise RangeError(f"{self.family} needs p and M")
        elif self.K is None or self.N is None:
            raise RangeError(f"{self.family} needs K and N")

    def threshold(self, noisy: bool) -> float:
        if self.success_threshold is not None:
            return self.success_threshold
        return NOISY_THRESHOLD if noisy else NOISELESS_THRESHOLD


@dataclass
class RateRow:
    family: str
    K: int
    N: int
    M: int
    algorithm: str
    s: int
    snr_db: float
    trials: int
    successes: int
    rate: float
    threshold: float
    master_seed: int
    squared_errors: list[float] | None = field(default=None, repr=False)


RATE_COLUMNS = ["family", "K", "N", "M", "algorithm", "s", "snr_db", "trials",
                "successes", "rate", "threshold", "master_seed"]


class _Harness:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        fam = Family(cfg.family)
        self.family = fam
        self.fixed: SensingMatrix | None = None
        if fam.deterministic:
            self.fixed = build_matrix(fam, cfg.p, cfg.M, cfg.m)
        elif cfg.K is None or cfg.N is None:
            raise RangeError("baseline families need K and N")
        elif not cfg.regenerate:
            self.fixed = self._baseline(trial_rng(cfg.master_seed, _MATRIX))
        if self.fixed is not None:
            self.fixed.adjoint  # materialize before threads share it
        self.K = self.fixed.K if self.fixed else cfg.K
        self.N = self.fixed.N if self.fixed else cfg.N
        self.M = self.fixed.M if self.fixed else 0
        self.solve = ALGORITHMS[cfg.algorithm]
        self.tol = 0.0 if cfg.strict_iterations else cfg.residual_tol

    def _baseline(self, rng) -> SensingMatrix:
        if self.family is Family.PARTIAL_FOURIER:
            return build_partial_fourier_matrix(self.cfg.K, self.cfg.N, rng)
        return build_gaussian_matrix(self.cfg.K, self.cfg.N, rng)

    def trial_errors(self, s: int, trial: int, snrs: Sequence[float]) -> list[float]:
        seed = self.cfg.master_seed
        mat = self.fixed or self._baseline(trial_rng(seed, s, trial, _MATRIX))
        x = generate_sparse_signal(self.N, s, trial_rng(seed, s, trial, _SIGNAL))
        y = measure(mat, x)
        xd = x.dense()
        out = []
        for snr in snrs:
            noisy = add_awgn(y, snr, trial_rng(seed, s, trial, _NOISE, float_key(snr)))
            res = self.solve(mat, noisy, self.cfg.max_iterations, self.tol)
            out.append(float(np.sum(np.abs(xd - res.estimate) ** 2)))
        return out

    def run(self, snrs: Sequence[float], threshold: float) -> list[RateRow]:
        cfg = self.cfg
        rows = []
        for s in cfg.sparsities:
            def job(t, s=s):
                return self.trial_errors(s, t, snrs)

            if cfg.threads > 1:
                with ThreadPoolExecutor(cfg.threads) as pool:
                    errs = list(pool.map(job, range(cfg.trials)))
            else:
                errs = [job(t) for t in range(cfg.trials)]
            errs = np.array(errs).reshape(cfg.trials, len(snrs))
            for j, snr in enumerate(snrs):
                wins = int((errs[:, j] < threshold).sum())
                rows.append(RateRow(
                    cfg.family, self.K, self.N, self.M, cfg.algorithm, int(s), float(snr),
                    cfg.trials, wins, wins / cfg.trials, threshold, cfg.master_seed,
                    errs[:, j].tolist() if cfg.per_trial else None,
                ))
        return rows


def run_noiseless_experiment(cfg: ExperimentConfig) -> list[RateRow]:
    """Success rate per sparsity level; ``snr_db`` is reported as ``inf``."""
    return _Harness(cfg).run([math.inf], cfg.threshold(noisy=False))


def run_noisy_experiment(cfg: ExperimentConfig) -> list[RateRow]:
    if not cfg.snr_db:
        raise RangeError("noisy experiment needs at least one SNR value")
    return _Harness(cfg).run([float(v) for v in cfg.snr_db], cfg.threshold(noisy=True))


def write_rates_csv(rows: Sequence[RateRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RATE_COLUMNS)
    for r in rows:
        w.writerow([
            r.family, r.K, r.N, r.M, r.algorithm, r.s, repr(r.snr_db), r.trials,
            r.successes, repr(r.rate), repr(r.threshold), r.master_seed,
        ])


def write_rates_json(rows: Sequence[RateRow], fh: TextIO) -> None:
    payload = []
    for r in rows:
        d = asdict(r)
        d["snr_db"] = repr(r.snr_db) if math.isinf(r.snr_db) else r.snr_db
        if d["squared_errors"] is None:
            d.pop("squared_errors")
        payload.append(d)
    json.dump(payload, fh, indent=1)
    fh.write("\n")
