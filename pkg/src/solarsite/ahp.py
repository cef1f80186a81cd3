"""Pairwise-comparison weighting engine.

Priority vectors come from power iteration on the positive reciprocal
judgment matrix (principal right eigenvector, normalized to sum 1), with the
classic column-normalize-and-row-average method available as a cross-check.
Consistency is judged by CR = CI / RI with CI = (lambda_max - n) / (n - 1)
and RI from the pinned random-index table; judgment sets with CR <= 5% are
accepted.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

MAX_N = 15
CR_THRESHOLD = 0.05
_SCALE_MIN, _SCALE_MAX = 1.0 / 9.0, 9.0
_TOL = 1e-9


class AhpError(Exception):
    pass


class MatrixValidationError(AhpError):
    """Carries a list of per-cell violation messages."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def _load_ri() -> dict[int, float]:
    with resources.files("solarsite.data").joinpath("saaty_ri.json").open() as f:
        return {int(k): float(v) for k, v in json.load(f).items()}


RANDOM_INDEX = _load_ri()


@dataclass(frozen=True)
class PairwiseMatrix:
    a: np.ndarray

    @property
    def n(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    ci: float
    ri: float
    cr: float
    consistent: bool


def parse_entry(token) -> float:
    """Accept a number or an 'a/b' fraction string."""
    if isinstance(token, (int, float)):
        return float(token)
    return float(Fraction(token))


def validate_matrix(raw) -> PairwiseMatrix:
    a = np.asarray(raw, dtype=np.float64)
    violations: list[str] = []
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixValidationError([f"matrix must be square, got shape {a.shape}"])
    n = a.shape[0]
    if n < 2 or n > MAX_N:
        raise MatrixValidationError([f"matrix size must be in 2..{MAX_N}, got {n}"])
    for i in range(n):
        if abs(a[i, i] - 1.0) > _TOL:
            violations.append(f"diagonal entry at ({i},{i}) must be 1, got {a[i, i]}")
    for i in range(n):
        for j in range(n):
            if not (_SCALE_MIN - _TOL <= a[i, j] <= _SCALE_MAX + _TOL):
                violations.append(
                    f"entry {a[i, j]} at ({i},{j}) outside the 1-9 judgment scale "
                    f"[1/9, 9]"
                )
    for i in range(n):
        for j in range(i + 1, n):
            if abs(a[j, i] - 1.0 / a[i, j]) > _TOL:
                violations.append(
                    f"reciprocity violated at ({j},{i}): expected {1.0 / a[i, j]}, "
                    f"got {a[j, i]}"
                )
    if violations:
        raise MatrixValidationError(violations)
    return PairwiseMatrix(a)


def priority_vector(m: PairwiseMatrix, max_iter: int = 100_000,
                    residual_tol: float = 1e-12) -> np.ndarray:
    """Principal right eigenvector by power iteration, normalized to sum 1."""
    a = m.a
    w = np.full(m.n, 1.0 / m.n)
    for _ in range(max_iter):
        aw = a @ w
        w_next = aw / aw.sum()
        lam = aw.sum()  # since w sums to 1, sum(Aw) is the Rayleigh estimate
        if np.abs(aw - lam * w).max() <= residual_tol:
            return w_next
        w = w_next
    raise AhpError("power iteration failed to converge")  # defensive; positive matrices converge


def column_average_priorities(m: PairwiseMatrix) -> np.ndarray:
    """Column-normalization method: divide each entry by its column sum and
    average the rows. Cross-check for the eigenvector route."""
    norm = m.a / m.a.sum(axis=0, keepdims=True)
    w = norm.mean(axis=1)
    return w / w.sum()


def consistency(m: PairwiseMatrix, w: np.ndarray) -> ConsistencyReport:
    aw = m.a @ w
    lambda_max = float(np.mean(aw / w))
    if m.n <= 2:
        return ConsistencyReport(lambda_max, 0.0, RANDOM_INDEX[m.n], 0.0, True)
    ci = (lambda_max - m.n) / (m.n - 1)
    ri = RANDOM_INDEX[m.n]
    cr = ci / ri
    return ConsistencyReport(lambda_max, ci, ri, cr, cr <= CR_THRESHOLD)


def evaluate(raw) -> tuple[np.ndarray, ConsistencyReport]:
    """Validate, derive priorities, and report consistency in one call."""
    m = validate_matrix(raw)
    w = priority_vector(m)
    return w, consistency(m, w)


def aggregate_criteria(weights: Mapping[str, float],
                       groups: Mapping[str, Sequence[str]]) -> dict[str, float]:
    """Sum factor weights into criteria groups; groups must partition the ids."""
    seen: dict[str, str] = {}
    for gname, members in groups.items():
        for fid in members:
            if fid in seen:
                raise AhpError(f"factor {fid!r} appears in groups {seen[fid]!r} and {gname!r}")
            if fid not in weights:
                raise AhpError(f"factor {fid!r} in group {gname!r} has no weight")
            seen[fid] = gname
    missing = set(weights) - set(seen)
    if missing:
        raise AhpError(f"factors missing from every group: {sorted(missing)}")
    return {g: float(sum(weights[fid] for fid in members)) for g, members in groups.items()}


def read_matrix_file(path) -> PairwiseMatrix:
    """Matrix file: first line n, then n rows of n entries ('1/3' allowed)."""
    with open(path) as f:
        tokens = f.read().split()
    if not tokens:
        raise AhpError(f"{path}: empty matrix file")
    n = int(tokens[0])
    if len(tokens) != 1 + n * n:
        raise AhpError(f"{path}: expected {n * n} entries for n={n}, found {len(tokens) - 1}")
    vals = [parse_entry(t) for t in tokens[1:]]
    return validate_matrix(np.array(vals).reshape(n, n))
