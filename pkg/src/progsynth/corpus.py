"""Named specs used as a regression corpus: the numbered theorems plus extras."""

from __future__ import annotations

from dataclasses import dataclass

from .search import THEOREMS


@dataclass(frozen=True)
class CorpusSpec:
    name: str
    text: str
    description: str
    # "required" rows must synthesize and verify; "stretch" rows may be
    # reported unsupported; "unsupported" rows are expected to fail
    status: str = "required"
    # inclusive upper end of the verification grid per input
    grid: int = 40


THEOREM_SPECS = tuple(CorpusSpec(f"thm{n}", text, desc, "required", 30) for n, text, desc in THEOREMS)

EXTRA_SPECS: tuple[CorpusSpec, ...] = (
    CorpusSpec("extra1", "PFAC(I,J)", "Is one number a proper factor of another?"),
    CorpusSpec(
        "extra2",
        "PFAC(x,I)^(all A)(~PFAC(A,I) v ~LT(A,x))",
        "Smallest proper factor of a number.",
        "stretch",
    ),
    CorpusSpec(
        "extra3",
        "PRIME(x)^FAC(x,I)^(all A)(~PRIME(A) v ~FAC(A,I) v ~LT(A,x))",
        "Smallest prime factor of a number.",
        "stretch",
    ),
    CorpusSpec(
        "extra4",
        "LT(I,x)^PRIME(x)^(all A)(~LT(I,A) v ~LT(A,x) v ~PRIME(A))",
        "Next prime after a number.",
        "stretch",
    ),
    CorpusSpec("extra5", "(exists A)(PRIME(A)^BETW(I,A,J))", "Is there a prime between two numbers?"),
    CorpusSpec("extra6", "~PRIME(x)^BETW(I,x,J)", "List the composites between two numbers."),
    CorpusSpec("extra7", "FAC(x,I)^FAC(x,J)", "List the common factors of two numbers."),
    CorpusSpec("extra8", "(exists A)(PFAC(A,I)^PFAC(A,J))", "Do two numbers share a proper factor?"),
    CorpusSpec("extra9", "(exists A)(FAC(A,I)^FAC(A,J)^PRIME(A))", "Do two numbers share a prime factor?"),
    CorpusSpec("extra10", "MUL(x,x,I)", "Integer square root of a number.", "unsupported"),
)

CORPUS = THEOREM_SPECS + EXTRA_SPECS


def lookup(name: str) -> CorpusSpec:
    for c in CORPUS:
        if c.name == name:
            return c
    raise KeyError(name)
