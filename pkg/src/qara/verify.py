"""Invariant suites run by ``qara verify``.

Each suite returns a ``CheckResult``; the figures of merit are the largest
deviation seen, so failures report how far off they were.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qara.engine import (
    analytic_distribution,
    best_case_probability,
    encode_window,
    outlier_bound,
    simulate_branches,
    simulate_statevector,
)
from qara.rotation import decompose_rotation, dense_rotation, verify_lemma_hrh


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _angles(rng, count):
    return rng.uniform(-2 * math.pi, 2 * math.pi, count)


def check_unitarity(rng, max_n=8, angles=20, tol=1e-12) -> CheckResult:
    worst = 0.0
    for n in range(1, max_n + 1):
        eye = np.eye(1 << n)
        for phi in _angles(rng, angles):
            r = dense_rotation(n, phi).entries
            worst = max(worst, np.abs(r @ r.T - eye).max(), np.abs(r.T @ r - eye).max())
    return CheckResult("unitarity", worst <= tol, f"max |R R^T - I| = {worst:.2e} (n<={max_n})")


def check_lemma(rng, max_n=8, angles=20, tol=1e-11) -> CheckResult:
    ok = all(verify_lemma_hrh(n, phi, tol) for n in range(1, max_n + 1) for phi in _angles(rng, angles))
    return CheckResult("hadamard conjugation", ok, f"H R H == R^T within {tol:g} (n<={max_n})")


def check_decomposition(rng, max_n=6, angles=10, tol=1e-10) -> CheckResult:
    worst = 0.0
    for n in range(1, max_n + 1):
        for phi in _angles(rng, angles):
            circ = decompose_rotation(n, phi).to_dense().entries
            worst = max(worst, np.abs(circ - dense_rotation(n, phi).entries).max())
    return CheckResult("decomposition fidelity", worst <= tol, f"max deviation {worst:.2e} (n<={max_n})")


def check_composition(rng, max_n=6, pairs=10, tol=1e-11) -> CheckResult:
    worst = 0.0
    for n in range(1, max_n + 1):
        for a, b in zip(_angles(rng, pairs), _angles(rng, pairs)):
            lhs = dense_rotation(n, a).entries @ dense_rotation(n, b).entries
            worst = max(worst, np.abs(lhs - dense_rotation(n, a + b).entries).max())
    return CheckResult("composition", worst <= tol, f"max |R(a)R(b) - R(a+b)| = {worst:.2e}")


def random_distinct_window(rng, M, n):
    values = rng.choice(1 << n, size=M, replace=False)
    return [int(v) for v in values], int(rng.integers(0, 1 << n))


def check_backends(rng, windows=100, tol=1e-10) -> CheckResult:
    worst = 0.0
    for t in range(windows):
        M, n = (4, 8)[t % 2], (4, 6)[(t // 2) % 2]
        values, ref = random_distinct_window(rng, M, n)
        w = encode_window(values, ref, n, True)
        a = analytic_distribution(w).probs
        worst = max(
            worst,
            np.abs(a - simulate_branches(w).probs).max(),
            np.abs(a - simulate_statevector(w).probs).max(),
        )
    return CheckResult("backend agreement", worst <= tol, f"max deviation {worst:.2e} over {windows} windows")


def strictly_ordered(values, reference, probs) -> bool:
    dist = np.abs(np.asarray(values) - reference)
    order = np.argsort(dist, kind="stable")
    p = np.asarray(probs)[order]
    d = dist[order]
    return all(p[i] > p[i + 1] for i in range(len(p) - 1) if d[i] < d[i + 1])


def check_ordering(rng, windows=100) -> CheckResult:
    cases = [([5, 0, 15, 10], 0, 4), ([8, 3, 29, 63, 14, 2, 45, 10], 0, 6)]
    for t in range(windows):
        M, n = (4, 8, 16)[t % 3], (4, 6, 8)[(t // 3) % 3]
        values, ref = random_distinct_window(rng, M, n)
        cases.append((values, ref, n))
    bad = sum(
        not strictly_ordered(v, r, analytic_distribution(encode_window(v, r, n, True)).probs)
        for v, r, n in cases
    )
    return CheckResult("monotone ordering", bad == 0, f"{bad} misordered of {len(cases)} windows")


def corollary_window(M, n, k=0, reference=0):
    values = [reference] * M
    values[k] = (1 << n) - 1
    return values, reference


def check_corollary(tol=1e-12) -> CheckResult:
    worst = 0.0
    for M in (4, 8, 16):
        for n in (2, 4, 8):
            for k in (0, M - 1):
                values, ref = corollary_window(M, n, k)
                p = analytic_distribution(encode_window(values, ref, n, True)).probs[k]
                worst = max(worst, abs(p - best_case_probability(M, n)))
    return CheckResult("best-case outlier probability", worst <= tol, f"max deviation {worst:.2e}")


def bound_instance(rng):
    """Random window meeting the outlier-bound hypotheses.

    Single outlier with d_k >= 2^l r and top data bit set, every other
    element within r / 2^p of the reference r >= 1.
    """
    n = int(rng.integers(3, 9))
    M = int(rng.choice([4, 8, 16]))
    l = int(rng.integers(1, n))
    p = int(rng.integers(0, 4))
    r = int(rng.integers(1, ((1 << n) - 1) // (1 << l) + 1))
    d_min = max(1 << (n - 1), r << l)
    k = int(rng.integers(0, M))
    sigma = r >> p
    values = [
        int(rng.integers(d_min, 1 << n)) if j == k
        else int(rng.integers(max(r - sigma, 0), min(r + sigma, (1 << n) - 1) + 1))
        for j in range(M)
    ]
    return values, r, n, M, l, p, k


def check_outlier_bound(rng, instances=200) -> CheckResult:
    violations = 0
    for _ in range(instances):
        values, r, n, M, l, p, k = bound_instance(rng)
        prob = analytic_distribution(encode_window(values, r, n, True)).probs[k]
        violations += prob > outlier_bound(M, n, l, p) + 1e-15
    return CheckResult("outlier bound", violations == 0, f"{violations} violations in {instances} instances")


def run_all(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    return [
        check_unitarity(rng),
        check_lemma(rng),
        check_decomposition(rng),
        check_composition(rng),
        check_backends(rng),
        check_ordering(rng),
        check_corollary(),
        check_outlier_bound(rng),
    ]
