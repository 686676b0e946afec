import pytest

from progsynth import search as se


def sieve(n: int) -> list[int]:
    """Primes up to ``n`` by the sieve of Eratosthenes."""
    flags = [False, False] + [True] * (n - 1)
    for p in range(2, int(n**0.5) + 1):
        if flags[p]:
            for q in range(p * p, n + 1, p):
                flags[q] = False
    return [p for p in range(n + 1) if flags[p]]


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


@pytest.fixture(scope="session")
def store() -> se.TheoremStore:
    s = se.TheoremStore()
    se.bootstrap_theorems(s)
    return s
