"""Coherence, redundancy and condition-number statistics of sensing matrices."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .charseq import Family, roots_of_unity
from .errors import ConvergenceFailure, FamilyMismatch, RangeError
from .seeding import trial_rng
from .sensing import SensingMatrix, build_gaussian_matrix

SINGULAR_TOL = 1e-13


@dataclass
class MatrixMetrics:
    coherence: float
    welch_bound: float
    coherence_closed_form: float | None
    spectral_norm: float
    redundancy: float
    tight_frame_floor: float
    sparsity_bound: int | None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class ConditionStats:
    s: int
    trials: int
    mean: float
    std_dev: float
    seed: int
    infinite_count: int = 0


def _family(mat_or_family) -> Family:
    if isinstance(mat_or_family, SensingMatrix):
        return mat_or_family.family
    return Family(mat_or_family)


def coherence_bruteforce(mat: SensingMatrix | np.ndarray, block: int = 2048) -> float:
    """Largest ``|a_l^H a_m|`` over all distinct column pairs.

    The N x N Gram is formed in row blocks so large N stays within memory.
    """
    a = mat.dense if isinstance(mat, SensingMatrix) else np.asarray(mat)
    N = a.shape[1]
    ah = a.conj().T
    best = 0.0
    for start in range(0, N, block):
        stop = min(start + block, N)
        g = np.abs(ah[start:stop] @ a)
        idx = np.arange(start, stop)
        g[idx - start, idx] = 0.0
        best = max(best, float(g.max()))
    return best


def shift_class_correlations(mat: SensingMatrix) -> np.ndarray:
    """Inner products grouped by ``(delta_b, c1, c2)``.

    ``out[d, c1, c2] = a_(c1, b)^H a_(c2, b + d)`` for any ``b``; the value is
    independent of ``b`` because both columns are cyclic shifts of one sequence.
    Multipliers run over ``0..M-1``; index 0 is unused by the matrix.
    """
    if mat.sequence is None or not mat.family.deterministic:
        raise FamilyMismatch("structured coherence needs a deterministic family")
    s = np.asarray(mat.sequence.symbols)
    K, M = len(s), mat.M
    w = roots_of_unity(M)
    W = w[np.outer(np.arange(M), np.arange(M)) % M]  # W[c, a] = omega^(c a)
    out = np.empty((K, M, M), dtype=complex)
    for d in range(K):
        hist = np.zeros((M, M))
        np.add.at(hist, (s, np.roll(s, -d)), 1.0)
        out[d] = W.conj() @ hist @ W.T
    return out / K


def coherence_structured(mat: SensingMatrix) -> float:
    g = np.abs(shift_class_correlations(mat))[:, 1:, 1:]
    same = np.arange(mat.M - 1)
    g[0, same, same] = 0.0
    return float(g.max())


def coherence(mat: SensingMatrix) -> float:
    if mat.family.deterministic and mat.sequence is not None:
        return coherence_structured(mat)
    return coherence_bruteforce(mat)


def welch_bound(K: int, N: int) -> float:
    if N <= K:
        raise RangeError(f"Welch bound needs N > K, got K={K}, N={N}")
    return math.sqrt((N - K) / (K * (N - 1)))


def coherence_closed_form(K: int, family) -> float:
    family = _family(family)
    if family is Family.POWER_RESIDUE:
        return (math.sqrt(K) + 2) / K
    if family is Family.SIDELNIKOV:
        return (math.sqrt(K + 1) + 3) / K
    raise FamilyMismatch(f"no closed-form coherence for {family.value}")


def sparsity_bound(K: int, family) -> int:
    """Largest s with ``(2s - 1) * mu < 1`` for the closed-form coherence."""
    mu = coherence_closed_form(K, family)
    threshold = 0.5 * (1.0 / mu + 1.0)
    return math.ceil(threshold) - 1


def spectral_norm(mat: SensingMatrix | np.ndarray, method: str = "eigh", tol: float = 1e-10) -> float:
    """Largest singular value via the smaller of the two Gram matrices."""
    a = mat.dense if isinstance(mat, SensingMatrix) else np.asarray(mat)
    K, N = a.shape
    g = a @ a.conj().T if K <= N else a.conj().T @ a
    if method == "eigh":
        return math.sqrt(max(float(np.linalg.eigvalsh(g)[-1]), 0.0))
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    try:
        return math.sqrt(_power_iteration(g, tol))
    except ConvergenceFailure:
        return math.sqrt(max(float(np.linalg.eigvalsh(g)[-1]), 0.0))


def _power_iteration(g: np.ndarray, tol: float, max_iter: int = 10_000) -> float:
    # fixed pseudo-random start: avoids a start vector orthogonal to the top eigenvector
    v = np.random.default_rng(0).standard_normal(g.shape[0]).astype(g.dtype)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        u = g @ v
        lam = float(np.vdot(v, u).real)
        if np.linalg.norm(u - lam * v) <= tol * abs(lam):
            return lam
        norm = float(np.linalg.norm(u))
        if norm == 0.0:
            return 0.0
        v = u / norm
    raise ConvergenceFailure("power iteration did not converge")


def matrix_metrics(mat: SensingMatrix) -> MatrixMetrics:
    norm = spectral_norm(mat)
    det = mat.family.deterministic
    return MatrixMetrics(
        coherence=coherence(mat),
        welch_bound=welch_bound(mat.K, mat.N),
        coherence_closed_form=coherence_closed_form(mat.K, mat.family) if det else None,
        spectral_norm=norm,
        redundancy=norm**2,
        tight_frame_floor=math.sqrt(mat.N / mat.K),
        sparsity_bound=sparsity_bound(mat.K, mat.family) if det else None,
    )


def condition_number(sub: np.ndarray) -> float:
    """Ratio of extreme singular values from the eigenvalues of the Gram."""
    K, s = sub.shape
    g = sub.conj().T @ sub if s <= K else sub @ sub.conj().T
    ev = np.linalg.eigvalsh(g)
    lo, hi = ev[0], ev[-1]
    if s > K or lo <= SINGULAR_TOL**2:
        return math.inf
    return math.sqrt(hi / lo)


def _condition_trial(mat: SensingMatrix, s: int, seed: int, trial: int) -> float:
    rng = trial_rng(seed, s, trial)
    if mat.family is Family.GAUSSIAN:
        sub = build_gaussian_matrix(mat.K, s, rng).dense
    else:
        cols = rng.choice(mat.N, size=s, replace=False)
        sub = mat.dense[:, cols]
    return condition_number(sub)


def condition_numbers(mat: SensingMatrix, s: int, trials: int, seed: int, threads: int = 1) -> np.ndarray:
    """Per-trial condition numbers of random s-column submatrices.

    A Gaussian matrix is redrawn (K x s) on every trial.  Trial ``t`` uses its
    own generator keyed by ``(seed, s, t)``, so results do not depend on
    ``threads``.
    """
    if not 1 <= s <= mat.K:
        raise RangeError(f"s={s} outside [1, K={mat.K}]")
    if trials < 1:
        raise RangeError("trials must be >= 1")
    mat.dense  # materialize once before threads share it
    if threads <= 1:
        return np.array([_condition_trial(mat, s, seed, t) for t in range(trials)])
    with ThreadPoolExecutor(threads) as pool:
        return np.array(list(pool.map(lambda t: _condition_trial(mat, s, seed, t), range(trials))))


def condition_number_stats(mat: SensingMatrix, s: int, trials: int, seed: int, threads: int = 1) -> ConditionStats:
    kappa = condition_numbers(mat, s, trials, seed, threads)
    finite = kappa[np.isfinite(kappa)]
    n_inf = int(kappa.size - finite.size)
    if finite.size:
        mean, std = float(finite.mean()), float(finite.std())
    else:
        mean = std = math.inf
    return ConditionStats(s, trials, mean, std, seed, n_inf)


COND_COLUMNS = ["family", "K", "N", "M", "s", "trials", "mean", "std", "infinite_count", "seed"]


def write_cond_stats_csv(mat: SensingMatrix, stats, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COND_COLUMNS)
    for st in stats:
        w.writerow([mat.family.value, mat.K, mat.N, mat.M, st.s, st.trials,
                    repr(st.mean), repr(st.std_dev), st.infinite_count, st.seed])
