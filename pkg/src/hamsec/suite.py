"""Property-run drivers shared by ``hamsec verify`` and the test-suite.

Each trial owns its random state, seeded from ``(seed, index)``, so a
run can be split or repeated and still report identical results in
trial order.
"""

import random
from dataclasses import dataclass, field

from .classify import typical
from .errors import HamsecError
from .generators import disguise_exact, random_section
from .moduli import assemble_moduli

__all__ = ["TrialResult", "trial_rng", "invariance_classes", "invariance_trial", "run_invariance"]

DEFAULT_CLASSES = ((1, 1), (2, 1), (1, 2), (2, 2))


def trial_rng(seed, index):
    return random.Random(f"{seed}:{index}")


def invariance_classes(n, classes=DEFAULT_CLASSES):
    return [(k, l) for k, l in classes if typical(k, l, n)]


@dataclass
class TrialResult:
    index: int
    cls: str
    ok: bool
    order: int = None
    detail: str = ""
    mismatched: list = field(default_factory=list)

    def to_json(self):
        return {"trial": self.index, "class": self.cls, "ok": self.ok, "compared_order": self.order,
                "detail": self.detail, "mismatched": self.mismatched}


def invariance_trial(seed, index, n, N, k, l):
    """Moduli of a random section and of its image under a random isotropy
    map and unit must agree through ``min(N - 2, valid orders)``."""
    rng = trial_rng(seed, index)
    name = f"S({k},{l})"
    try:
        h, _ = random_section(k, l, n, N, rng)
        h2, _, _ = disguise_exact(h, k, N, rng)
        before = assemble_moduli(h)
        after = assemble_moduli(h2, N=N)
    except HamsecError as exc:
        return TrialResult(index, name, False, detail=f"{type(exc).__name__}: {exc}")
    order = min(N - 2, before.valid_order, after.valid_order)
    bad = [i for i, (a, b) in enumerate(zip(before.jets(), after.jets()))
           if not a.equal_to_order(b, min(order, a.order, b.order))]
    ok = not bad and len(before.jets()) == len(after.jets()) and before.theorem == after.theorem
    return TrialResult(index, name, ok, order, "" if ok else "moduli differ", bad)


def run_invariance(n, N, trials, seed, classes=DEFAULT_CLASSES):
    """Run ``trials`` invariance trials, cycling through the typical classes."""
    pool = invariance_classes(n, classes)
    results = []
    for i in range(trials):
        k, l = pool[i % len(pool)]
        results.append(invariance_trial(seed, i, n, N, k, l))
    return results
