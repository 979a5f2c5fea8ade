"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or in the
``-v`` summary captured output) followed by the individual measurements.
"""

import pytest

from rotorsym import verify

LABELS = {
    "1": "picture equivalence",
    "2": "closed-form oracle and RK4 order",
    "3": "scalar elimination",
    "4": "window-shift k-independence",
    "5": "vector-field identities",
    "6": "Hamiltonian elimination",
    "7": "Euler-flow symplecticity (literal form)",
    "7b": "Euler-flow pullback (supplementary)",
    "8": "discrete critical points",
    "9": "orbit finders",
    "10": "well-definedness regression",
}


@pytest.mark.parametrize("key", list(verify.CRITERIA), ids=[f"criterion_{k}" for k in verify.CRITERIA])
def test_criterion(key):
    checks = verify.CRITERIA[key]()
    ok = all(c.passed for c in checks)
    print(f"{'PASS' if ok else 'FAIL'} criterion {key}: {LABELS[key]}")
    for c in checks:
        print("   ", c.row())
    failed = [c.row() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)
