import sys

import numpy as np
import pytest


def rand_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def rand_spd(rng, n, cond=None):
    q, _ = np.linalg.qr(rand_complex(rng, n))
    if cond is None:
        w = rng.uniform(0.2, 5.0, n)
    else:
        w = np.geomspace(1.0, cond, n)
    return (q * w) @ q.conj().T


def rand_unitary(rng, n):
    q, r = np.linalg.qr(rand_complex(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_anti_hermitian(rng, n, opnorm=None):
    x = rand_complex(rng, n)
    z = 0.5 * (x - x.conj().T)
    if opnorm is not None:
        z *= opnorm / np.linalg.norm(z, 2)
    return z


def rand_invertible(rng, n):
    return rand_complex(rng, n) + 2 * np.sqrt(n) * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance")
    for num in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.RESULTS[num])
