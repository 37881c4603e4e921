"""Shared fixtures and generators of random test matrices."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_hpd(rng, n, cond=50.0, complex_=False):
    """Hermitian positive definite matrix with eigenvalues in [1, cond]."""
    X = rng.standard_normal((n, n))
    if complex_:
        X = X + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(X)
    w = np.geomspace(1.0, cond, n) if n > 1 else np.array([1.0])
    return (Q * w) @ np.conj(Q).T


def random_sectorial(rng, n, max_arg=0.6, cond=20.0):
    """Diagonalizable non-normal matrix with spectrum in a sector of half-angle ``max_arg``.

    Complex eigenvalues come with their conjugates so the matrix is real.
    """
    mods = np.geomspace(1.0, cond, n)
    args = rng.uniform(0.0, max_arg, n)
    w = np.empty(n, dtype=complex)
    k = 0
    while k < n:
        if k + 1 < n:
            w[k] = mods[k] * np.exp(1j * args[k])
            w[k + 1] = np.conj(w[k])
            k += 2
        else:
            w[k] = mods[k]
            k += 1
    # real block-diagonal form, then a well-conditioned similarity
    D = np.zeros((n, n))
    k = 0
    while k < n:
        if k + 1 < n:
            a, b = w[k].real, w[k].imag
            D[k:k + 2, k:k + 2] = [[a, b], [-b, a]]
            k += 2
        else:
            D[k, k] = w[k].real
            k += 1
    X = np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)
    return X @ D @ np.linalg.inv(X)


def random_triple_grams(rng, n):
    """A random HPD pair ``(gram_H, gram_V)`` with ``gram_V >= gram_H``."""
    H = random_hpd(rng, n, cond=5.0)
    return H, H + random_hpd(rng, n, cond=100.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance summary -------------------------------------------------------------

ACCEPTANCE_LINES = []


def record_acceptance(number, title, ok, detail):
    """Store (and print) the one-line verdict of an acceptance criterion."""
    line = f"[{'PASS' if ok else 'FAIL'}] #{number} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("#")[1].split()[0])):
            terminalreporter.write_line(line)
