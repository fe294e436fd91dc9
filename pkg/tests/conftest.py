import itertools

import pytest

from synthopt import kernels

BACKENDS = [kernels.python_backend]
if kernels.compiled_backend is not None:
    BACKENDS.append(kernels.compiled_backend)


@pytest.fixture(scope="session", params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


def brute_partition(weights):
    """Minimum heap difference by trying every side vector."""
    total = sum(weights)
    best = None
    for sides in itertools.product((0, 1), repeat=len(weights)):
        s2 = sum(w for w, s in zip(weights, sides) if s)
        d = abs(total - 2 * s2)
        if best is None or d < best:
            best = d
    return best


def brute_tsp(dist, forbidden=frozenset()):
    """Shortest Hamiltonian cycle length by trying every permutation."""
    n = len(dist)
    best = None
    for perm in itertools.permutations(range(1, n)):
        order = (0,) + perm
        pairs = [(order[k], order[(k + 1) % n]) for k in range(n)]
        if any((min(a, b), max(a, b)) in forbidden for a, b in pairs):
            continue
        length = sum(dist[a][b] for a, b in pairs)
        if best is None or length < best:
            best = length
    return best


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
