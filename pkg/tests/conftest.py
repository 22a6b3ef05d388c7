import math

import numpy as np
import pytest


def kron_all(*mats):
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def brute_force_counter_distribution(values, reference, n, unique_mode):
    """Algorithm run with full-register dense matrices built from Kronecker products.

    Layout (most significant first): counter (m qubits) then data word.  Kept
    deliberately naive; only usable for ~10 qubits.
    """
    M = len(values)
    m = int(math.log2(M))
    extra = m if unique_mode else 0
    nd = n + extra
    dim_c, dim_d = 1 << m, 1 << nd
    words = [(v << extra) | j if unique_mode else v for j, v in enumerate(values)]

    # loading: |j>|0> -> |j>|word_j>, an xor-permutation on the data register
    load = np.zeros((dim_c * dim_d, dim_c * dim_d))
    for c in range(dim_c):
        for d in range(dim_d):
            load[c * dim_d + (d ^ words[c]), c * dim_d + d] = 1.0
    state = np.zeros(dim_c * dim_d)
    state[[c * dim_d for c in range(dim_c)]] = 1 / math.sqrt(dim_c)
    state = load @ state

    def r_matrix(phi):
        # entry formula with the sign layout expanded from its verbal definition
        signs = np.array([[0.0, -1.0], [1.0, 0.0]])
        for k in range(1, m):
            h = kron_all(*[np.array([[1.0, 1.0], [1.0, -1.0]])] * k)
            signs = np.block([[signs, -h], [h, signs]])
        return math.cos(phi / 2) * np.eye(dim_c) + math.sin(phi / 2) / math.sqrt(dim_c - 1) * signs

    for i in range(n):
        phi = math.pi * 2**i / 2**n
        if (reference >> i) & 1:
            state = np.kron(r_matrix(phi), np.eye(dim_d)) @ state
        proj = np.diag([float((d >> (i + extra)) & 1) for d in range(dim_d)])
        ctrl = np.kron(r_matrix(-phi), proj) + np.kron(np.eye(dim_c), np.eye(dim_d) - proj)
        state = ctrl @ state
    return (state.reshape(dim_c, dim_d) ** 2).sum(axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
